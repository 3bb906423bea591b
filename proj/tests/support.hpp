#pragma once

// Random instance generators and brute-force oracles shared by the tests.
// The oracles work on plain maps keyed by category id and never call the
// library routine they check.

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>


#include "markovcomb/combine.hpp"
#include "markovcomb/copula.hpp"
#include "markovcomb/invariance.hpp"
#include "markovcomb/json_io.hpp"
#include "markovcomb/parametric.hpp"
#include "markovcomb/staged_tree.hpp"

namespace testing_support {

using mcomb::CategoryMapping;
using mcomb::CategorySet;
using mcomb::Dist;
using mcomb::IndexedVector;
using mcomb::Rational;

using Gen = std::mt19937_64;

inline std::int64_t uniform_int(Gen& gen, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen);
}

inline CategorySet named_set(const std::string& prefix, std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return CategorySet(ids);
}

// Surjective mapping of `domain` onto m metacategories "k0".."k{m-1}";
// requires m <= |domain|.
inline CategoryMapping random_mapping(Gen& gen, const CategorySet& domain, std::size_t m,
                                      const std::string& meta_prefix = "k") {
  std::vector<std::size_t> image(domain.size());
  std::vector<std::size_t> order(domain.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), gen);
  for (std::size_t n = 0; n < order.size(); ++n)
    image[order[n]] = n < m ? n : static_cast<std::size_t>(uniform_int(gen, 0, static_cast<std::int64_t>(m) - 1));
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < domain.size(); ++i) pairs.emplace_back(domain[i], meta_prefix + std::to_string(image[i]));
  return mcomb::make_mapping(domain, pairs, named_set(meta_prefix, m));
}

// Positive integer weights normalised to a distribution.
inline std::vector<Rational> random_weights(Gen& gen, std::size_t n, std::int64_t max_weight = 20,
                                            bool allow_zero = false) {
  std::vector<std::int64_t> w(n);
  std::int64_t total = 0;
  for (auto& x : w) total += (x = uniform_int(gen, allow_zero ? 0 : 1, max_weight));
  if (total == 0) {
    w[0] = 1;
    total = 1;
  }
  std::vector<Rational> out;
  for (auto x : w) out.emplace_back(x, total);
  return out;
}

inline Dist random_dist(Gen& gen, const CategorySet& index, std::int64_t max_weight = 20) {
  return Dist(index, random_weights(gen, index.size(), max_weight));
}

// f on p's domain with aggregate h: h_k split over the fiber by random weights.
inline Dist lift_dist(Gen& gen, const CategoryMapping& p, const std::vector<Rational>& h) {
  std::vector<Rational> f(p.domain().size());
  for (std::size_t k = 0; k < p.codomain().size(); ++k) {
    const auto& fib = p.fiber_positions(k);
    const auto w = random_weights(gen, fib.size());
    for (std::size_t n = 0; n < fib.size(); ++n) f[fib[n]] = h[k] * w[n];
  }
  return Dist(p.domain(), std::move(f));
}

struct ConsistentPair {
  CategoryMapping p, q;
  Dist f, g;
};

inline ConsistentPair random_consistent_pair(Gen& gen, std::size_t max_size) {
  const auto ni = static_cast<std::size_t>(uniform_int(gen, 1, static_cast<std::int64_t>(max_size)));
  const auto nj = static_cast<std::size_t>(uniform_int(gen, 1, static_cast<std::int64_t>(max_size)));
  const auto m = static_cast<std::size_t>(uniform_int(gen, 1, static_cast<std::int64_t>(std::min(ni, nj))));
  auto p = random_mapping(gen, named_set("i", ni), m);
  auto q = random_mapping(gen, named_set("j", nj), m);
  const auto h = random_weights(gen, m);
  auto f = lift_dist(gen, p, h);
  auto g = lift_dist(gen, q, h);
  return {std::move(p), std::move(q), std::move(f), std::move(g)};
}

// --- oracles ----------------------------------------------------------------

using IdMap = std::map<std::string, Rational>;

inline IdMap as_map(const IndexedVector& v) {
  IdMap out;
  for (std::size_t n = 0; n < v.size(); ++n) out[v.index()[n]] = v[n];
  return out;
}

inline std::string image_of(const CategoryMapping& p, const std::string& i) {
  return p.codomain()[p.image(p.domain().position(i))];
}

inline IdMap oracle_aggregate(const IdMap& f, const CategoryMapping& p) {
  IdMap out;
  for (const auto& k : p.codomain()) out[k] = Rational(0);
  for (const auto& [i, v] : f) out[image_of(p, i)] += v;
  return out;
}

// All (i, j) with p(i) = q(j), visited as a double loop over I x J.
inline std::vector<std::pair<std::string, std::string>> oracle_pairs(const CategoryMapping& p,
                                                                    const CategoryMapping& q) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& i : p.domain())
    for (const auto& j : q.domain())
      if (image_of(p, i) == image_of(q, j)) out.emplace_back(i, j);
  return out;
}

// f_i g_j / f_{M,p(i)} keyed by "(i,j)".
inline IdMap oracle_left(const IdMap& f, const IdMap& g, const CategoryMapping& p, const CategoryMapping& q) {
  const auto fm = oracle_aggregate(f, p);
  IdMap out;
  for (const auto& [i, j] : oracle_pairs(p, q)) out["(" + i + "," + j + ")"] = f.at(i) * g.at(j) / fm.at(image_of(p, i));
  return out;
}

inline IdMap oracle_right(const IdMap& f, const IdMap& g, const CategoryMapping& p, const CategoryMapping& q) {
  const auto gm = oracle_aggregate(g, q);
  IdMap out;
  for (const auto& [i, j] : oracle_pairs(p, q)) out["(" + i + "," + j + ")"] = f.at(i) * g.at(j) / gm.at(image_of(p, i));
  return out;
}

// Code of the mcomb::Error thrown by f. Throws logic_error when nothing is
// thrown, which fails the enclosing check.
inline mcomb::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const mcomb::Error& e) {
    return e.code();
  }
  throw std::logic_error("expected an mcomb::Error");
}

inline std::vector<Rational> ratios(std::initializer_list<const char*> xs) {
  std::vector<Rational> out;
  for (const auto* x : xs) out.push_back(Rational::parse(x));
  return out;
}

// The running example: I = {a,b,c}, J = {♣,♦,♥,♠}, M = {1,2}.
struct RunningExample {
  CategorySet I{"a", "b", "c"};
  CategorySet J{"♣", "♦", "♥", "♠"};
  CategoryMapping p = mcomb::make_mapping(I, {{"a", "1"}, {"b", "2"}, {"c", "2"}});
  CategoryMapping q = mcomb::make_mapping(J, {{"♣", "1"}, {"♦", "1"}, {"♥", "1"}, {"♠", "2"}});
};

// --- triples for the associativity laws -------------------------------------

// f, g, h on I = A x B, J = B x C, K = C x A, all marginals of one joint law on
// A x B x C, with M1, M2, M3 random coarsenings of B, C, A. The triple is
// pairwise meta-consistent by construction.
struct Triple {
  CategoryMapping p1, r3;  // I -> M1, I -> M3
  CategoryMapping q1, q2;  // J -> M1, J -> M2
  CategoryMapping t2, t3;  // K -> M2, K -> M3
  Dist f, g, h;
};

inline Triple triple_from_joint(const std::vector<std::vector<std::vector<Rational>>>& pi,
                                const std::vector<std::size_t>& ca, const std::vector<std::size_t>& cb,
                                const std::vector<std::size_t>& cc) {
  const std::size_t na = pi.size(), nb = pi[0].size(), nc = pi[0][0].size();
  auto id = [](char c, std::size_t x) { return std::string(1, c) + std::to_string(x); };
  auto meta = [](const char* prefix, std::size_t x) { return std::string(prefix) + std::to_string(x); };
  std::vector<std::string> I, J, K;
  std::vector<Rational> f, g, h;
  std::vector<std::pair<std::string, std::string>> p1, r3, q1, q2, t2, t3;
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < nb; ++b) {
      I.push_back(id('a', a) + id('b', b));
      Rational s;
      for (std::size_t c = 0; c < nc; ++c) s += pi[a][b][c];
      f.push_back(s);
      p1.emplace_back(I.back(), meta("m1_", cb[b]));
      r3.emplace_back(I.back(), meta("m3_", ca[a]));
    }
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t c = 0; c < nc; ++c) {
      J.push_back(id('b', b) + id('c', c));
      Rational s;
      for (std::size_t a = 0; a < na; ++a) s += pi[a][b][c];
      g.push_back(s);
      q1.emplace_back(J.back(), meta("m1_", cb[b]));
      q2.emplace_back(J.back(), meta("m2_", cc[c]));
    }
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t a = 0; a < na; ++a) {
      K.push_back(id('c', c) + id('a', a));
      Rational s;
      for (std::size_t b = 0; b < nb; ++b) s += pi[a][b][c];
      h.push_back(s);
      t2.emplace_back(K.back(), meta("m2_", cc[c]));
      t3.emplace_back(K.back(), meta("m3_", ca[a]));
    }
  auto mk = [](const std::vector<std::string>& dom, const std::vector<std::pair<std::string, std::string>>& pairs,
               const char* prefix, const std::vector<std::size_t>& coarse) {
    std::size_t m = 0;
    for (auto x : coarse) m = std::max(m, x + 1);
    std::vector<std::string> order;
    for (std::size_t x = 0; x < m; ++x) order.push_back(std::string(prefix) + std::to_string(x));
    return mcomb::make_mapping(CategorySet(dom), pairs, CategorySet(order));
  };
  return {mk(I, p1, "m1_", cb), mk(I, r3, "m3_", ca), mk(J, q1, "m1_", cb), mk(J, q2, "m2_", cc),
          mk(K, t2, "m2_", cc), mk(K, t3, "m3_", ca), Dist(CategorySet(I), f), Dist(CategorySet(J), g),
          Dist(CategorySet(K), h)};
}

// Surjective random coarsening of {0..n-1}.
inline std::vector<std::size_t> random_coarsening(Gen& gen, std::size_t n) {
  const auto m = static_cast<std::size_t>(uniform_int(gen, 1, static_cast<std::int64_t>(n)));
  std::vector<std::size_t> out(n);
  for (std::size_t x = 0; x < n; ++x) out[x] = x < m ? x : static_cast<std::size_t>(uniform_int(gen, 0, m - 1));
  std::shuffle(out.begin(), out.end(), gen);
  return out;
}

inline Triple random_triple(Gen& gen, std::size_t max_side = 3) {
  const auto side = [&] { return static_cast<std::size_t>(uniform_int(gen, 1, static_cast<std::int64_t>(max_side))); };
  const std::size_t na = side(), nb = side(), nc = side();
  const auto w = random_weights(gen, na * nb * nc, 9);
  std::vector<std::vector<std::vector<Rational>>> pi(na, std::vector<std::vector<Rational>>(nb, std::vector<Rational>(nc)));
  std::size_t n = 0;
  for (auto& x : pi)
    for (auto& y : x)
      for (auto& z : y) z = w[n++];
  return triple_from_joint(pi, random_coarsening(gen, na), random_coarsening(gen, nb), random_coarsening(gen, nc));
}

// A triple stored as {"joint": [a][b][c], "coarsen_a": [...], ...}.
inline Triple triple_from_file(const std::string& path) {
  const auto j = mcomb::read_json_file(path);
  std::vector<std::vector<std::vector<Rational>>> pi;
  for (const auto& plane : j.at("joint")) {
    auto& a = pi.emplace_back();
    for (const auto& row : plane) {
      auto& b = a.emplace_back();
      for (const auto& x : row) b.push_back(Rational::parse(x.get<std::string>()));
    }
  }
  auto coarse = [&](const char* key) { return j.at(key).get<std::vector<std::size_t>>(); };
  return triple_from_joint(pi, coarse("coarsen_a"), coarse("coarsen_b"), coarse("coarsen_c"));
}

// Entries of a nested combination keyed by (i, j, k), with roles[n] telling
// whether the n-th id met (inner left, inner right, outer other) is i, j or k.
using TripleKey = std::array<std::string, 3>;
inline std::map<TripleKey, Rational> flatten(const mcomb::ProductVector& outer, const mcomb::ProductIndex& inner,
                                             bool inner_on_left, std::array<int, 3> roles) {
  std::map<TripleKey, Rational> out;
  for (std::size_t n = 0; n < outer.index.size(); ++n) {
    const auto& t = outer.index.triples()[n];
    const auto& it = inner.triples()[inner_on_left ? t.i : t.j];
    const std::string& other = inner_on_left ? outer.index.right().domain()[t.j] : outer.index.left().domain()[t.i];
    TripleKey key;
    key[roles[0]] = inner.left().domain()[it.i];
    key[roles[1]] = inner.right().domain()[it.j];
    key[roles[2]] = other;
    out[key] = outer.values[n];
  }
  return out;
}

// The six ways of combining a triple twice, in the order
// (f*1 g)*3 h, (f*3 h)*1 g, (f*1 g)*2 h, f*1 (g*2 h), f*3 (g*2 h), f*3 (h*2 g).
inline std::array<std::map<TripleKey, Rational>, 6> six_combinations(const Triple& t) {
  using mcomb::Axis;
  using mcomb::induced_mapping;
  using mcomb::star;
  std::array<std::map<TripleKey, Rational>, 6> out;
  const auto fg = star(t.f, t.g, t.p1, t.q1);
  const auto fh = star(t.f, t.h, t.r3, t.t3);
  const auto gh = star(t.g, t.h, t.q2, t.t2);
  const auto hg = star(t.h, t.g, t.t2, t.q2);
  out[0] = flatten(star(fg.values, t.h, induced_mapping(fg.index, Axis::Left, t.r3), t.t3), fg.index, true, {0, 1, 2});
  out[1] = flatten(star(fh.values, t.g, induced_mapping(fh.index, Axis::Left, t.p1), t.q1), fh.index, true, {0, 2, 1});
  out[2] = flatten(star(fg.values, t.h, induced_mapping(fg.index, Axis::Right, t.q2), t.t2), fg.index, true, {0, 1, 2});
  out[3] = flatten(star(t.f, gh.values, t.p1, induced_mapping(gh.index, Axis::Left, t.q1)), gh.index, false, {1, 2, 0});
  out[4] = flatten(star(t.f, gh.values, t.r3, induced_mapping(gh.index, Axis::Right, t.t3)), gh.index, false, {1, 2, 0});
  out[5] = flatten(star(t.f, hg.values, t.r3, induced_mapping(hg.index, Axis::Left, t.t3)), hg.index, false, {2, 1, 0});
  return out;
}

// --- bistochastic samples ----------------------------------------------------

inline std::vector<std::size_t> random_permutation(Gen& gen, std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t x = 0; x < n; ++x) perm[x] = x;
  std::shuffle(perm.begin(), perm.end(), gen);
  return perm;
}

// A rational convex combination of a few random permutation matrices.
inline mcomb::RationalMatrix random_bistochastic(Gen& gen, std::size_t n, std::size_t terms = 3) {
  const auto w = random_weights(gen, terms, 9);
  mcomb::RationalMatrix out(n, n);
  for (std::size_t t = 0; t < terms; ++t) out = out + w[t] * mcomb::RationalMatrix::permutation(random_permutation(gen, n));
  return out;
}

// gamma(i, j) = sum_k n alpha(i, k) beta(k, j) on the grid ids "(i,j)".
inline IdMap oracle_copula_product(const mcomb::RationalMatrix& alpha, const mcomb::RationalMatrix& beta) {
  const std::size_t n = alpha.rows();
  IdMap out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Rational s;
      for (std::size_t k = 0; k < n; ++k) s += Rational(static_cast<std::int64_t>(n)) * alpha(i, k) * beta(k, j);
      out[mcomb::pair_id(std::to_string(i + 1), std::to_string(j + 1))] = s;
    }
  return out;
}

// --- staged trees -------------------------------------------------------------

struct RandomTree {
  mcomb::StagedTree tree;
  std::vector<std::string> cut;
};

// Root floret with labels root_labels; below each of its children a random
// subtree of depth 0, 1 or 2. Florets of equal size reuse an earlier stage
// half of the time. Vertex and non-root labels carry `prefix`.
inline RandomTree random_staged_tree(Gen& gen, const std::string& prefix, const std::vector<std::string>& root_labels) {
  std::vector<std::string> vertices{prefix + "root"};
  std::vector<mcomb::TreeEdge> edges;
  std::map<std::size_t, std::vector<std::vector<std::string>>> stages;  // by size
  std::size_t fresh = 0;
  auto add_floret = [&](std::string from, std::size_t size, std::vector<std::string> labels) {
    std::vector<std::string> kids;
    if (labels.empty()) {
      auto& known = stages[size];
      if (!known.empty() && uniform_int(gen, 0, 1) == 0) {
        labels = known[static_cast<std::size_t>(uniform_int(gen, 0, static_cast<std::int64_t>(known.size()) - 1))];
      } else {
        for (std::size_t n = 0; n < size; ++n) labels.push_back(prefix + "l" + std::to_string(fresh++));
        known.push_back(labels);
      }
    }
    for (std::size_t n = 0; n < size; ++n) {
      vertices.push_back(prefix + "v" + std::to_string(vertices.size()));
      edges.push_back({from, vertices.back(), labels[n]});
      kids.push_back(vertices.back());
    }
    return kids;
  };
  const auto cut = add_floret(vertices[0], root_labels.size(), root_labels);
  for (const auto& c : cut) {
    const auto depth = uniform_int(gen, 0, 2);
    std::vector<std::string> frontier{c};
    for (std::int64_t d = 0; d < depth; ++d) {
      std::vector<std::string> next;
      for (const auto& v : frontier)
        for (const auto& kid : add_floret(v, static_cast<std::size_t>(uniform_int(gen, 1, 3)), {})) next.push_back(kid);
      frontier = std::move(next);
    }
  }
  return {mcomb::StagedTree(vertices, edges, vertices[0]), cut};
}

// The combined tree's model against the meta-Markov combination of the two
// tree models, exactly, at `count` seeded rational points. Also checks that
// the tree built with the roles reversed is statistically equivalent.
struct StagedComparison {
  bool model_matches = true;
  bool reversed_equivalent = true;
  bool staged = true;
};

inline StagedComparison compare_staged_combination(const mcomb::StagedTree& t1, const std::vector<std::string>& cut1,
                                                   const mcomb::StagedTree& t2, const std::vector<std::string>& cut2,
                                                   const mcomb::CutBijection& phi, std::size_t count,
                                                   std::uint64_t seed) {
  using namespace mcomb;
  StagedComparison out;
  const auto d1 = decompose(t1, cut1);
  const auto d2 = decompose(t2, cut2);
  const auto c = staged_combine(t1, d1, t2, d2, phi);
  out.staged = validate_staged(c.tree).valid;
  const auto layout = joint_layout({&t1, &t2});
  const auto combined = tree_model(c.tree, layout);
  const auto ms = meta_star(tree_model(t1, layout), tree_model(t2, layout), d1.p, pulled_back_mapping(d1, d2, phi));
  for (const auto& point : random_stage_points(layout, count, seed)) {
    const auto tree_values = eval_exact(combined, point);
    const auto star_values = eval_exact(ms.model, point);
    for (std::size_t n = 0; n < c.path_pairs.size(); ++n) {
      const auto& [i, j] = c.path_pairs[n];
      if (tree_values[n] != star_values.at(pair_id(t1.paths()[i], t2.paths()[j]))) out.model_matches = false;
    }
  }
  CutBijection inverse;
  for (const auto& [a, b] : phi) inverse.emplace(b, a);
  const auto r = staged_combine(t2, d2, t1, d1, inverse);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> where;
  for (std::size_t n = 0; n < r.path_pairs.size(); ++n) where[{r.path_pairs[n].second, r.path_pairs[n].first}] = n;
  std::vector<std::size_t> bijection;
  for (const auto& pr : c.path_pairs) bijection.push_back(where.at(pr));
  ModelsEqualOptions opts;
  opts.samples = count;
  opts.seed = seed;
  opts.path_bijection = bijection;
  out.reversed_equivalent = models_equal(c.tree, r.tree, opts);
  return out;
}

// --- invariance fixtures -----------------------------------------------------

// Z/2 acting on {0,1,2,3} by i -> 3 - i, swapping the blocks {0,1} and {2,3}.
inline mcomb::FiniteAction flip4() {
  return mcomb::FiniteAction(CategorySet::range(4), {"e", "s"}, {{0, 1, 2, 3}, {3, 2, 1, 0}});
}

inline CategoryMapping halves() {
  return mcomb::make_mapping(CategorySet::range(4), {{"0", "a"}, {"1", "a"}, {"2", "b"}, {"3", "b"}});
}

inline mcomb::ParamTransport flip_theta() {
  return mcomb::ParamTransport::generic(1, [](std::size_t g, auto t) {
    using S = std::remove_const_t<typename decltype(t)::value_type>;
    return std::vector<S>{g == 0 ? t[0] : S(1) - t[0]};
  });
}

// (t/2, t/2, (1-t)/2, (1-t)/2).
inline mcomb::ParametricModel half_split() {
  return mcomb::ParametricModel::generic(CategorySet::range(4), mcomb::ParamBox::unit(1), [](auto t) {
    using S = std::remove_const_t<typename decltype(t)::value_type>;
    const S h = S(1) / S(2);
    return std::vector<S>{h * t[0], h * t[0], h * (S(1) - t[0]), h * (S(1) - t[0])};
  });
}

// Block mass of binomial(3) on {0,1}.
template <class S>
S binomial_low(const S& t) {
  return (S(1) - t) * (S(1) - t) * (S(1) + S(2) * t);
}

// Same aggregate as binomial(3) under halves(), split evenly.
inline mcomb::ParametricModel binomial_shadow() {
  return mcomb::ParametricModel::generic(CategorySet::range(4), mcomb::ParamBox::unit(1), [](auto t) {
    using S = std::remove_const_t<typename decltype(t)::value_type>;
    const S a = binomial_low(t[0]);
    const S h = S(1) / S(2);
    return std::vector<S>{h * a, h * a, h * (S(1) - a), h * (S(1) - a)};
  });
}

// (t, 1 - t) on {a, b}.
inline mcomb::ParametricModel coin() {
  return mcomb::ParametricModel::generic(CategorySet{"a", "b"}, mcomb::ParamBox::unit(1), [](auto t) {
    using S = std::remove_const_t<typename decltype(t)::value_type>;
    return std::vector<S>{t[0], S(1) - t[0]};
  });
}

inline std::vector<mcomb::ExactPoint> with_flags(const std::vector<mcomb::ExactPoint>& base) {
  std::vector<mcomb::ExactPoint> out;
  for (const auto& b : base)
    for (int flag = 0; flag <= 1; ++flag) {
      auto p = b;
      p.emplace_back(flag);
      out.push_back(std::move(p));
    }
  return out;
}

}  // namespace testing_support
