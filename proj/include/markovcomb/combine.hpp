#pragma once

// Markov combinations of concrete vectors.
//
// For p : I -> M and q : J -> M the left combination has entry
// f_i g_j / f_{M,k} at (k, i, j); the right combination divides by g_{M,k}.
// When f and g have equal aggregates both coincide and define the Markov
// combination f * g.

#include <span>
#include <string>
#include <vector>

#include "markovcomb/core.hpp"

namespace mcomb {

enum class ZeroPolicy {
  Strict,      // a zero aggregate raises ZeroAggregate
  Permissive,  // the block is filled with zeros and the result is flagged
};

struct CombineOptions {
  ZeroPolicy zero_policy = ZeroPolicy::Strict;
};

ProductVector left_combine(const IndexedVector& f, const IndexedVector& g, const CategoryMapping& p,
                           const CategoryMapping& q, CombineOptions opts = {});
ProductVector right_combine(const IndexedVector& f, const IndexedVector& g, const CategoryMapping& p,
                            const CategoryMapping& q, CombineOptions opts = {});

bool is_consistent(const IndexedVector& f, const IndexedVector& g, const CategoryMapping& p,
                   const CategoryMapping& q);

// Throws NotConsistent unless the aggregates coincide.
ProductVector star(const IndexedVector& f, const IndexedVector& g, const CategoryMapping& p,
                   const CategoryMapping& q, CombineOptions opts = {});

// Aggregate along pi_I (Axis::Left) or pi_J (Axis::Right).
IndexedVector project(const ProductVector& v, Axis axis);

// The mapping (k, i, j) -> next(i) (or next(j)) out of the product, used to
// chain combinations.
CategoryMapping induced_mapping(const ProductIndex& prod, Axis through, const CategoryMapping& next);

// Reindexes a vector on I x_M J (built from p, q) onto J x_M I (built from
// q, p) via (k, i, j) -> (k, j, i).
ProductVector swap_sides(const ProductVector& v);

// Left-fold of binary Markov combinations over a common metacategory set.
// mappings[l] maps the index of vectors[l] onto M.
ProductVector star_all(const std::vector<IndexedVector>& vectors, const std::vector<CategoryMapping>& mappings,
                       CombineOptions opts = {});

// The unit for star: the one-point distribution on {id}.
Dist unit_dist(const std::string& id = "*");

namespace detail {

template <class S>
std::vector<S> aggregate_values(std::span<const S> v, const CategoryMapping& p) {
  std::vector<S> out(p.codomain().size(), S(0));
  for (std::size_t i = 0; i < v.size(); ++i) out[p.image(i)] += v[i];
  return out;
}

enum class Denominator { Left, Right };

[[noreturn]] void throw_zero_aggregate(const ProductIndex& prod, std::size_t k);

// Shared kernel of the left and right combinations for any scalar type.
// Returns true in `zeroed` when a block was zero-filled.
template <class S>
std::vector<S> combine_values(std::span<const S> f, std::span<const S> g, const ProductIndex& prod,
                              Denominator denom, ZeroPolicy policy, bool* zeroed = nullptr) {
  const auto fm = aggregate_values<S>(f, prod.left());
  const auto gm = aggregate_values<S>(g, prod.right());
  std::vector<S> out(prod.size(), S(0));
  for (std::size_t k = 0; k < prod.meta().size(); ++k) {
    const S& d = denom == Denominator::Left ? fm[k] : gm[prod.right_meta(k)];
    const auto [first, last] = prod.block(k);
    if (d == S(0)) {
      if (policy == ZeroPolicy::Strict) throw_zero_aggregate(prod, k);
      if (zeroed) *zeroed = true;
      continue;
    }
    for (std::size_t n = first; n < last; ++n) {
      const auto& t = prod.triples()[n];
      out[n] = f[t.i] * g[t.j] / d;
    }
  }
  return out;
}

}  // namespace detail

}  // namespace mcomb
