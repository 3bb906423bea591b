#pragma once

// Discrete copulas on the grid <n> x <m> = {0..n} x {0..m} and their
// square-case dictionary with bistochastic matrices.

#include <cstddef>
#include <string>
#include <vector>

#include "markovcomb/core.hpp"

namespace mcomb {

// Dense row-major matrix of rationals.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  RationalMatrix(std::size_t rows, std::size_t cols, std::vector<Rational> data);

  static RationalMatrix identity(std::size_t n);
  // Permutation matrix with a(r, perm[r]) = 1.
  static RationalMatrix permutation(const std::vector<std::size_t>& perm);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<Rational>& data() const { return data_; }

  friend bool operator==(const RationalMatrix&, const RationalMatrix&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Rational> data_;
};

RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b);
RationalMatrix operator*(const Rational& c, const RationalMatrix& a);
RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b);

bool is_bistochastic(const RationalMatrix& a);

// values is (n+1) x (m+1); values(i, j) = C(i, j).
struct DiscreteCopula {
  std::size_t n = 0, m = 0;
  RationalMatrix values;

  friend bool operator==(const DiscreteCopula&, const DiscreteCopula&) = default;
};

enum class CopulaCondition { None, Shape, C1, C2, C3 };
std::string_view to_string(CopulaCondition c);

struct CopulaCheck {
  bool valid = true;
  CopulaCondition failed = CopulaCondition::None;
  std::size_t i = 0, j = 0;  // grid point of the first violation
  std::string detail;
  explicit operator bool() const { return valid; }
};

CopulaCheck validate_copula(const DiscreteCopula& c);

// Boundary condition replaced by C(i, m) = nu_1 + ... + nu_i and
// C(n, j) = mu_1 + ... + mu_j.
CopulaCheck validate_generalized_copula(const DiscreteCopula& c, const std::vector<Rational>& nu,
                                        const std::vector<Rational>& mu);

DiscreteCopula independence_copula(std::size_t n, std::size_t m);
DiscreteCopula comonotone_copula(std::size_t n, std::size_t m);

// C(i, j) = (1/n) sum_{k <= i, l <= j} a(k, l). Throws NotBistochastic.
DiscreteCopula copula_from_bistochastic(const RationalMatrix& a);

// h(k, l) = C(k-1, l-1) - C(k, l-1) - C(k-1, l) + C(k, l) for k, l >= 1.
// Throws InvalidCopula.
RationalMatrix density_matrix(const DiscreteCopula& c);
// The same for a generalized copula with marginals nu and mu.
RationalMatrix density_matrix(const DiscreteCopula& c, const std::vector<Rational>& nu, const std::vector<Rational>& mu);
Dist density_from_copula(const DiscreteCopula& c);
// n * density; square copulas only.
RationalMatrix bistochastic_from_copula(const DiscreteCopula& c);

// Copula of A * B. Throws SizeMismatch unless both are square of equal n.
DiscreteCopula product_copula(const DiscreteCopula& c1, const DiscreteCopula& c2);

// Ids "(i,j)" for 1 <= i <= n, 1 <= j <= m in row-major order.
CategorySet grid_categories(std::size_t n, std::size_t m);

// Dist on the grid from a density matrix, and back.
Dist grid_dist(const RationalMatrix& h);
RationalMatrix grid_matrix(const Dist& d, std::size_t n, std::size_t m);

// gamma = aggregate over (i, j) of the Markov combination of alpha and beta
// glued along the second coordinate of alpha and the first of beta.
// Throws MarginalsNotUniform.
Dist product_via_markov(const Dist& alpha, const Dist& beta, std::size_t n);

}  // namespace mcomb
