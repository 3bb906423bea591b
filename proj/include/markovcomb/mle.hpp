#pragma once

// Closed-form maximum likelihood estimate for the Markov combination of two
// saturated models, and its Horn-pair certificate.

#include <string>
#include <vector>

#include "markovcomb/core.hpp"

namespace mcomb {

// x_hat_ij = u_i v_j / (u_M,k x_bar) with u, v the row and column sums of x
// over I x_M J. x may hold intensities. Throws NegativeEntry, AllZero,
// IndexMismatch.
Dist mle(const IndexedVector& x, const CategoryMapping& p, const CategoryMapping& q);

struct HornPair {
  ProductIndex index;
  // Rows: per metacategory k (in p's codomain order) the rows of I_k, then
  // of J_k, then one row for k; finally one row of -1. Columns follow the
  // product order.
  std::vector<std::vector<int>> h;
  std::vector<std::string> row_labels;
  std::vector<int> lambda;

  std::size_t rows() const { return h.size(); }
  std::size_t cols() const { return index.size(); }
  // Rows [first, last) belonging to metacategory k.
  std::pair<std::size_t, std::size_t> block_rows(std::size_t k) const { return blocks_.at(k); }
  // H_k: the block rows restricted to the columns of block k.
  std::vector<std::vector<int>> block(std::size_t k) const;

  std::vector<std::pair<std::size_t, std::size_t>> blocks_;
};

HornPair build_horn_pair(const CategoryMapping& p, const CategoryMapping& q);

bool column_sums_zero(const HornPair& hp);

// lambda_ij * prod_l (sum_(i',j') h_l,(i',j') x_i'j')^h_l,(i,j), exactly.
// Throws ZeroLinearForm when a vanishing form meets a negative exponent.
std::vector<Rational> horn_map(const HornPair& hp, const IndexedVector& x);

// True iff horn_map(x) equals mle(x) entrywise.
bool verify_horn_identity(const HornPair& hp, const IndexedVector& x);

// sum x_ij log m_ij over the support of x. Throws SupportViolation.
double log_likelihood(const IndexedVector& x, const IndexedVector& m);

}  // namespace mcomb
