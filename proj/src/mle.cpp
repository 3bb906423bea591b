#include "markovcomb/mle.hpp"

#include <cmath>

namespace mcomb {

namespace {

struct Margins {
  std::vector<Rational> u, v, block;
  Rational total;
};

Margins margins(const IndexedVector& x, const ProductIndex& prod) {
  if (!(x.index() == prod.categories())) throw Error(ErrorCode::IndexMismatch, "data is not indexed by I x_M J");
  Margins m;
  m.u.assign(prod.left().domain().size(), Rational(0));
  m.v.assign(prod.right().domain().size(), Rational(0));
  m.block.assign(prod.meta().size(), Rational(0));
  for (std::size_t n = 0; n < prod.size(); ++n) {
    if (x[n].sign() < 0) throw Error(ErrorCode::NegativeEntry, "data entry for '" + x.index()[n] + "' is negative");
    const auto& t = prod.triples()[n];
    m.u[t.i] += x[n];
    m.v[t.j] += x[n];
    m.block[t.k] += x[n];
    m.total += x[n];
  }
  if (m.total.is_zero()) throw Error(ErrorCode::AllZero, "all data entries are zero");
  return m;
}

}  // namespace

Dist mle(const IndexedVector& x, const CategoryMapping& p, const CategoryMapping& q) {
  const auto prod = mapping_product(p, q);
  const auto m = margins(x, prod);
  std::vector<Rational> out(prod.size());
  for (std::size_t n = 0; n < prod.size(); ++n) {
    const auto& t = prod.triples()[n];
    if (m.block[t.k].is_zero()) {
      if (!x[n].is_zero()) throw Error(ErrorCode::ZeroBlock, "block '" + prod.meta()[t.k] + "' has zero mass");
      continue;
    }
    out[n] = m.u[t.i] * m.v[t.j] / (m.block[t.k] * m.total);
  }
  return Dist(prod.categories(), std::move(out));
}

HornPair build_horn_pair(const CategoryMapping& p, const CategoryMapping& q) {
  HornPair hp;
  hp.index = mapping_product(p, q);
  const auto& prod = hp.index;
  const std::size_t cols = prod.size();
  for (std::size_t k = 0; k < prod.meta().size(); ++k) {
    const std::size_t first_row = hp.h.size();
    const auto& fi = p.fiber_positions(k);
    const auto& fj = q.fiber_positions(prod.right_meta(k));
    const auto [c0, c1] = prod.block(k);
    for (auto i : fi) {
      std::vector<int> row(cols, 0);
      for (std::size_t c = c0; c < c1; ++c)
        if (prod.triples()[c].i == i) row[c] = 1;
      hp.h.push_back(std::move(row));
      hp.row_labels.push_back(p.domain()[i]);
    }
    for (auto j : fj) {
      std::vector<int> row(cols, 0);
      for (std::size_t c = c0; c < c1; ++c)
        if (prod.triples()[c].j == j) row[c] = 1;
      hp.h.push_back(std::move(row));
      hp.row_labels.push_back(q.domain()[j]);
    }
    std::vector<int> row(cols, 0);
    for (std::size_t c = c0; c < c1; ++c) row[c] = -1;
    hp.h.push_back(std::move(row));
    hp.row_labels.push_back(prod.meta()[k]);
    hp.blocks_.emplace_back(first_row, hp.h.size());
  }
  hp.h.emplace_back(cols, -1);
  hp.row_labels.emplace_back("total");
  hp.lambda.assign(cols, 1);
  return hp;
}

std::vector<std::vector<int>> HornPair::block(std::size_t k) const {
  const auto [r0, r1] = block_rows(k);
  const auto [c0, c1] = index.block(k);
  std::vector<std::vector<int>> out;
  for (std::size_t r = r0; r < r1; ++r) out.emplace_back(h[r].begin() + static_cast<std::ptrdiff_t>(c0), h[r].begin() + static_cast<std::ptrdiff_t>(c1));
  return out;
}

bool column_sums_zero(const HornPair& hp) {
  for (std::size_t c = 0; c < hp.cols(); ++c) {
    long sum = 0;
    for (const auto& row : hp.h) sum += row[c];
    if (sum != 0) return false;
  }
  return true;
}

std::vector<Rational> horn_map(const HornPair& hp, const IndexedVector& x) {
  if (!(x.index() == hp.index.categories())) throw Error(ErrorCode::IndexMismatch, "data is not indexed by I x_M J");
  std::vector<Rational> w(hp.rows());
  for (std::size_t l = 0; l < hp.rows(); ++l)
    for (std::size_t c = 0; c < hp.cols(); ++c)
      if (hp.h[l][c] != 0) w[l] += Rational(hp.h[l][c]) * x[c];
  std::vector<Rational> out(hp.cols());
  for (std::size_t c = 0; c < hp.cols(); ++c) {
    Rational v(hp.lambda[c]);
    for (std::size_t l = 0; l < hp.rows(); ++l) {
      const int e = hp.h[l][c];
      if (e == 0) continue;
      if (e < 0 && w[l].is_zero())
        throw Error(ErrorCode::ZeroLinearForm, "form '" + hp.row_labels[l] + "' vanishes under a negative exponent");
      v *= pow(w[l], e);
    }
    out[c] = v;
  }
  return out;
}

bool verify_horn_identity(const HornPair& hp, const IndexedVector& x) {
  const auto lhs = mle(x, hp.index.left(), hp.index.right());
  return horn_map(hp, x) == lhs.entries();
}

double log_likelihood(const IndexedVector& x, const IndexedVector& m) {
  if (!(x.index() == m.index())) throw Error(ErrorCode::IndexMismatch, "data and model use different indexes");
  double out = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (x[n].is_zero()) continue;
    if (m[n].sign() <= 0)
      throw Error(ErrorCode::SupportViolation, "model gives no mass to observed '" + x.index()[n] + "'");
    out += x[n].to_double() * std::log(m[n].to_double());
  }
  return out;
}

}  // namespace mcomb
