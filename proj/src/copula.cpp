#include "markovcomb/copula.hpp"

#include "markovcomb/combine.hpp"

namespace mcomb {

RationalMatrix::RationalMatrix(std::size_t rows, std::size_t cols, std::vector<Rational> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw Error(ErrorCode::SizeMismatch, "matrix data has the wrong length");
}

RationalMatrix RationalMatrix::identity(std::size_t n) {
  RationalMatrix a(n, n);
  for (std::size_t r = 0; r < n; ++r) a(r, r) = Rational(1);
  return a;
}

RationalMatrix RationalMatrix::permutation(const std::vector<std::size_t>& perm) {
  const std::size_t n = perm.size();
  RationalMatrix a(n, n);
  std::vector<bool> used(n, false);
  for (std::size_t r = 0; r < n; ++r) {
    if (perm[r] >= n || used[perm[r]]) throw Error(ErrorCode::InvalidArgument, "not a permutation");
    used[perm[r]] = true;
    a(r, perm[r]) = Rational(1);
  }
  return a;
}

RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::SizeMismatch, "matrix shapes do not chain");
  RationalMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(r, k).is_zero()) continue;
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += a(r, k) * b(k, c);
    }
  return out;
}

RationalMatrix operator*(const Rational& c, const RationalMatrix& a) {
  RationalMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) out(r, k) *= c;
  return out;
}

RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::SizeMismatch, "matrix shapes differ");
  RationalMatrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) += b(r, c);
  return out;
}

bool is_bistochastic(const RationalMatrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  const std::size_t n = a.rows();
  for (std::size_t r = 0; r < n; ++r) {
    Rational row, col;
    for (std::size_t c = 0; c < n; ++c) {
      if (a(r, c).sign() < 0) return false;
      row += a(r, c);
      col += a(c, r);
    }
    if (row != Rational(1) || col != Rational(1)) return false;
  }
  return true;
}

std::string_view to_string(CopulaCondition c) {
  switch (c) {
    case CopulaCondition::None: return "none";
    case CopulaCondition::Shape: return "shape";
    case CopulaCondition::C1: return "C1";
    case CopulaCondition::C2: return "C2";
    case CopulaCondition::C3: return "C3";
  }
  return "unknown";
}

namespace {

CopulaCheck fail(CopulaCondition cond, std::size_t i, std::size_t j, std::string detail) {
  return CopulaCheck{false, cond, i, j, std::move(detail)};
}

std::string at(std::size_t i, std::size_t j) {
  return "C(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

// Shared by both validators; `row_end(i)` and `col_end(j)` give the required
// boundary values C(i, m) and C(n, j).
template <class RowEnd, class ColEnd>
CopulaCheck validate(const DiscreteCopula& c, RowEnd row_end, ColEnd col_end) {
  const auto& v = c.values;
  if (c.n == 0 || c.m == 0 || v.rows() != c.n + 1 || v.cols() != c.m + 1)
    return fail(CopulaCondition::Shape, 0, 0, "grid must be (n+1) x (m+1) with n, m >= 1");
  for (std::size_t i = 0; i <= c.n; ++i)
    if (!v(i, 0).is_zero()) return fail(CopulaCondition::C1, i, 0, at(i, 0) + " is not 0");
  for (std::size_t j = 0; j <= c.m; ++j)
    if (!v(0, j).is_zero()) return fail(CopulaCondition::C1, 0, j, at(0, j) + " is not 0");
  for (std::size_t i = 0; i <= c.n; ++i)
    if (v(i, c.m) != row_end(i)) return fail(CopulaCondition::C2, i, c.m, at(i, c.m) + " should be " + row_end(i).str());
  for (std::size_t j = 0; j <= c.m; ++j)
    if (v(c.n, j) != col_end(j)) return fail(CopulaCondition::C2, c.n, j, at(c.n, j) + " should be " + col_end(j).str());
  for (std::size_t i = 1; i <= c.n; ++i)
    for (std::size_t j = 1; j <= c.m; ++j)
      if ((v(i - 1, j - 1) - v(i, j - 1) - v(i - 1, j) + v(i, j)).sign() < 0)
        return fail(CopulaCondition::C3, i, j, "negative rectangle mass at " + at(i, j));
  for (std::size_t i = 0; i <= c.n; ++i)
    for (std::size_t j = 0; j <= c.m; ++j)
      if (v(i, j).sign() < 0 || v(i, j) > Rational(1))
        return fail(CopulaCondition::Shape, i, j, at(i, j) + " outside [0, 1]");
  return CopulaCheck{};
}

}  // namespace

CopulaCheck validate_copula(const DiscreteCopula& c) {
  const Rational n(static_cast<std::int64_t>(c.n)), m(static_cast<std::int64_t>(c.m));
  return validate(
      c, [&](std::size_t i) { return Rational(static_cast<std::int64_t>(i)) / n; },
      [&](std::size_t j) { return Rational(static_cast<std::int64_t>(j)) / m; });
}

CopulaCheck validate_generalized_copula(const DiscreteCopula& c, const std::vector<Rational>& nu,
                                        const std::vector<Rational>& mu) {
  if (nu.size() != c.n || mu.size() != c.m)
    return fail(CopulaCondition::Shape, 0, 0, "marginals do not match the grid");
  std::vector<Rational> nu_cum(c.n + 1), mu_cum(c.m + 1);
  for (std::size_t i = 1; i <= c.n; ++i) nu_cum[i] = nu_cum[i - 1] + nu[i - 1];
  for (std::size_t j = 1; j <= c.m; ++j) mu_cum[j] = mu_cum[j - 1] + mu[j - 1];
  return validate(
      c, [&](std::size_t i) { return nu_cum[i]; }, [&](std::size_t j) { return mu_cum[j]; });
}

DiscreteCopula independence_copula(std::size_t n, std::size_t m) {
  DiscreteCopula c{n, m, RationalMatrix(n + 1, m + 1)};
  const Rational nm(static_cast<std::int64_t>(n * m));
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= m; ++j) c.values(i, j) = Rational(static_cast<std::int64_t>(i * j)) / nm;
  return c;
}

DiscreteCopula comonotone_copula(std::size_t n, std::size_t m) {
  DiscreteCopula c{n, m, RationalMatrix(n + 1, m + 1)};
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= m; ++j)
      c.values(i, j) = std::min(Rational(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n)),
                                Rational(static_cast<std::int64_t>(j), static_cast<std::int64_t>(m)));
  return c;
}

DiscreteCopula copula_from_bistochastic(const RationalMatrix& a) {
  if (!is_bistochastic(a)) throw Error(ErrorCode::NotBistochastic, "rows and columns must sum to 1");
  const std::size_t n = a.rows();
  const Rational scale(1, static_cast<std::int64_t>(n));
  DiscreteCopula c{n, n, RationalMatrix(n + 1, n + 1)};
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      c.values(i, j) = c.values(i - 1, j) + c.values(i, j - 1) - c.values(i - 1, j - 1) + scale * a(i - 1, j - 1);
  return c;
}

namespace {

RationalMatrix second_differences(const DiscreteCopula& c, const CopulaCheck& check) {
  if (!check) throw Error(ErrorCode::InvalidCopula, std::string(to_string(check.failed)) + ": " + check.detail);
  RationalMatrix h(c.n, c.m);
  const auto& v = c.values;
  for (std::size_t k = 1; k <= c.n; ++k)
    for (std::size_t l = 1; l <= c.m; ++l) h(k - 1, l - 1) = v(k - 1, l - 1) - v(k, l - 1) - v(k - 1, l) + v(k, l);
  return h;
}

}  // namespace

RationalMatrix density_matrix(const DiscreteCopula& c) { return second_differences(c, validate_copula(c)); }

RationalMatrix density_matrix(const DiscreteCopula& c, const std::vector<Rational>& nu, const std::vector<Rational>& mu) {
  return second_differences(c, validate_generalized_copula(c, nu, mu));
}

Dist density_from_copula(const DiscreteCopula& c) { return grid_dist(density_matrix(c)); }

RationalMatrix bistochastic_from_copula(const DiscreteCopula& c) {
  if (c.n != c.m) throw Error(ErrorCode::SizeMismatch, "bistochastic matrices need a square copula");
  return Rational(static_cast<std::int64_t>(c.n)) * density_matrix(c);
}

DiscreteCopula product_copula(const DiscreteCopula& c1, const DiscreteCopula& c2) {
  if (c1.n != c1.m || c2.n != c2.m || c1.n != c2.n)
    throw Error(ErrorCode::SizeMismatch, "copula products need square copulas of equal size");
  return copula_from_bistochastic(bistochastic_from_copula(c1) * bistochastic_from_copula(c2));
}

CategorySet grid_categories(std::size_t n, std::size_t m) {
  std::vector<std::string> ids;
  ids.reserve(n * m);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) ids.push_back(pair_id(std::to_string(i), std::to_string(j)));
  return CategorySet(std::move(ids));
}

Dist grid_dist(const RationalMatrix& h) {
  return Dist(grid_categories(h.rows(), h.cols()), h.data());
}

RationalMatrix grid_matrix(const Dist& d, std::size_t n, std::size_t m) {
  if (!(d.index() == grid_categories(n, m)))
    throw Error(ErrorCode::IndexMismatch, "distribution is not indexed by the " + std::to_string(n) + "x" +
                                              std::to_string(m) + " grid");
  return RationalMatrix(n, m, d.entries());
}

Dist product_via_markov(const Dist& alpha, const Dist& beta, std::size_t n) {
  const auto a = grid_matrix(alpha, n, n);
  const auto b = grid_matrix(beta, n, n);
  const Rational u(1, static_cast<std::int64_t>(n));
  for (const auto* mat : {&a, &b})
    for (std::size_t r = 0; r < n; ++r) {
      Rational row, col;
      for (std::size_t c = 0; c < n; ++c) {
        row += (*mat)(r, c);
        col += (*mat)(c, r);
      }
      if (row != u || col != u) throw Error(ErrorCode::MarginalsNotUniform, "marginals must all equal 1/n");
    }

  // p : (i, k) -> k and q : (k, j) -> k onto M = [n].
  const auto grid = grid_categories(n, n);
  const auto meta = CategorySet::range(n, 1);
  std::vector<std::size_t> pa(n * n), qa(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      pa[r * n + c] = c;
      qa[r * n + c] = r;
    }
  const auto p = mapping_from_positions(grid, meta, std::move(pa));
  const auto q = mapping_from_positions(grid, meta, std::move(qa));
  const auto combined = star(alpha.vector(), beta.vector(), p, q);

  // M' : (k, (i, k), (k, j)) -> (i, j).
  std::vector<std::size_t> to_pair;
  to_pair.reserve(combined.index.size());
  for (const auto& t : combined.index.triples()) to_pair.push_back((t.i / n) * n + (t.j % n));
  const auto m_prime = mapping_from_positions(combined.index.categories(), grid, std::move(to_pair));
  return Dist(aggregate(combined.values, m_prime));
}

}  // namespace mcomb
