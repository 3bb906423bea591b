// Acceptance run: one PASS/FAIL line per criterion, with its time limit.
// Exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

#include "markovcomb/cli.hpp"
#include "markovcomb/mle.hpp"
#include "markovcomb/sampling.hpp"
#include "support.hpp"

using namespace mcomb;
using namespace testing_support;

namespace {

const std::string data_dir = MARKOVCOMB_DATA_DIR;

// Collects failed checks; a criterion passes when none fail.
struct Tally {
  std::size_t checks = 0;
  std::vector<std::string> failures;
  void operator()(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok && failures.size() >= 5) failures.back() = what + " (and more)";
  }
  bool ok() const { return failures.empty(); }
};

ParamBox quarter() { return ParamBox({Interval{Rational(0), Rational(1, 4)}}); }

ParametricModel f_theta(const RunningExample& ex) {
  return ParametricModel::generic(ex.I, quarter(), [](auto t) {
    using S = std::remove_const_t<typename decltype(t)::value_type>;
    return std::vector<S>{S(3) * t[0], t[0], S(1) - S(4) * t[0]};
  });
}
ParametricModel g_theta(const RunningExample& ex) {
  return ParametricModel::generic(ex.J, quarter(), [](auto t) {
    using S = std::remove_const_t<typename decltype(t)::value_type>;
    return std::vector<S>{t[0], t[0], t[0], S(1) - S(3) * t[0]};
  });
}
ParametricModel f_restricted(const RunningExample& ex) {
  return ParametricModel::generic(ex.I, quarter(), [](auto t) {
    using S = std::remove_const_t<typename decltype(t)::value_type>;
    return std::vector<S>{S(1) - S(4) * t[0], S(2) * t[0], S(2) * t[0]};
  });
}

void worked_examples(Tally& check) {
  const RunningExample ex;
  const Dist f(ex.I, ratios({"3/4", "1/8", "1/8"}));
  const Dist f_bad(ex.I, ratios({"1/8", "1/8", "3/4"}));
  const Dist g(ex.J, ratios({"1/4", "1/4", "1/4", "1/4"}));
  check(is_consistent(f, g, ex.p, ex.q), "f and g consistent");
  check(!is_consistent(f_bad, g, ex.p, ex.q), "(1/8,1/8,3/4) and g inconsistent");
  check(star(f, g, ex.p, ex.q).values.entries() == ratios({"1/4", "1/4", "1/4", "1/8", "1/8"}), "f * g");
  const auto meta = is_meta_consistent(f_theta(ex), g_theta(ex), ex.p, ex.q);
  check(meta.consistent && meta.worst_gap == 0.0, "parametric pair meta-consistent");
  std::vector<ExactPoint> grid;
  for (int k = 0; k <= 70; ++k) grid.push_back({Rational(k, 70)});
  const auto c = restricted_lower(f_restricted(ex), g_theta(ex), ex.p, ex.q, grid);
  check(c.admissible == std::vector<ExactPoint>{{Rational(1, 7)}}, "restricted pair consistent exactly at 1/7");
}

void aggregate_recovery(Tally& check) {
  Gen gen(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pr = random_consistent_pair(gen, 8);
    const auto s = star(pr.f, pr.g, pr.p, pr.q);
    check(project(s, Axis::Left) == pr.f.vector(), "I-marginal of f * g is f");
    check(project(s, Axis::Right) == pr.g.vector(), "J-marginal of f * g is g");
  }
}

void associativity(Tally& check) {
  Gen gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto six = six_combinations(random_triple(gen));
    check(six[0] == six[1], "(f*1g)*3h = (f*3h)*1g");
    check(six[2] == six[3], "(f*1g)*2h = f*1(g*2h)");
    check(six[4] == six[5], "f*3(g*2h) = f*3(h*2g)");
  }
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = static_cast<std::size_t>(uniform_int(gen, 1, 3));
    auto sized = [&](const char* prefix) {
      return named_set(prefix, static_cast<std::size_t>(uniform_int(gen, static_cast<std::int64_t>(m), 4)));
    };
    const auto p = random_mapping(gen, sized("i"), m), q = random_mapping(gen, sized("j"), m),
               r = random_mapping(gen, sized("l"), m);
    const auto hm = random_weights(gen, m);
    const auto f = lift_dist(gen, p, hm), g = lift_dist(gen, q, hm), h = lift_dist(gen, r, hm);
    const auto fg = star(f, g, p, q), gh = star(g, h, q, r), fh = star(f, h, p, r);
    const auto e1 = flatten(star(fg.values, h, induced_mapping(fg.index, Axis::Left, p), r), fg.index, true, {0, 1, 2});
    const auto e2 = flatten(star(f, gh.values, p, induced_mapping(gh.index, Axis::Left, q)), gh.index, false, {1, 2, 0});
    const auto e3 = flatten(star(fh.values, g, induced_mapping(fh.index, Axis::Right, r), q), fh.index, true, {0, 2, 1});
    check(e1 == e2 && e1 == e3, "full associativity over a common M");
  }
  const auto six = six_combinations(triple_from_file(data_dir + "/assoc/counterexample.json"));
  check(six[0] != six[2] && six[0] != six[4] && six[2] != six[4], "stored counterexample separates the classes");
}

void mixture_chain(Tally& check) {
  Gen gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto I = named_set("i", static_cast<std::size_t>(uniform_int(gen, 1, 6)));
    const auto f = saturated(I), g = saturated(I);
    const bool shared = trial % 2 == 0;
    const auto sharing = shared ? ParameterSharing::Shared : ParameterSharing::Separate;
    ExactPoint theta = saturated_preimage(random_dist(gen, I));
    if (!shared) {
      const auto tg = saturated_preimage(random_dist(gen, I));
      theta.insert(theta.end(), tg.begin(), tg.end());
    }
    theta.emplace_back(uniform_int(gen, 0, 24), 24);
    const auto direct = eval_exact(mixture(f, g, sharing), theta);
    const auto chain = eval_exact(mixture_via_chain(f, g, sharing), theta);
    check(direct == chain, "mixture_via_chain equals mixture");
    // Through the floating evaluator, both sides snapped to rationals.
    const auto real = to_real(theta);
    check(eval(mixture_via_chain(f, g, sharing), real).dist == eval(mixture(f, g, sharing), real).dist,
          "snapped chain equals snapped mixture");
    check(eval(mixture_via_chain(f, g, sharing), real).dist == direct, "snapped chain equals exact mixture");
  }
}

void copula_identity(Tally& check) {
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<std::vector<std::size_t>> perms;
    std::vector<std::size_t> perm(n);
    for (std::size_t x = 0; x < n; ++x) perm[x] = x;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    const Rational scale(1, static_cast<std::int64_t>(n));
    std::vector<RationalMatrix> dens;
    std::vector<DiscreteCopula> cops;
    for (const auto& p : perms) {
      const auto a = RationalMatrix::permutation(p);
      dens.push_back(scale * a);
      cops.push_back(copula_from_bistochastic(a));
    }
    for (std::size_t x = 0; x < perms.size(); ++x)
      for (std::size_t y = 0; y < perms.size(); ++y) {
        const auto gamma = product_via_markov(grid_dist(dens[x]), grid_dist(dens[y]), n);
        check(gamma == density_from_copula(product_copula(cops[x], cops[y])), "permutation copulas");
      }
  }
  Gen gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_int(gen, 1, 6));
    const auto a = random_bistochastic(gen, n), b = random_bistochastic(gen, n);
    const Rational scale(1, static_cast<std::int64_t>(n));
    const auto gamma = product_via_markov(grid_dist(scale * a), grid_dist(scale * b), n);
    check(gamma == density_from_copula(product_copula(copula_from_bistochastic(a), copula_from_bistochastic(b))),
          "Birkhoff bistochastic pairs");
    check(as_map(gamma) == oracle_copula_product(scale * a, scale * b), "copula product against the oracle");
  }
}

IndexedVector random_counts(Gen& gen, const CategorySet& index, std::int64_t lo, std::int64_t hi) {
  std::vector<Rational> e;
  for (std::size_t n = 0; n < index.size(); ++n) e.emplace_back(uniform_int(gen, lo, hi));
  return IndexedVector(index, std::move(e));
}

double loglik(const IndexedVector& x, const std::vector<double>& m) {
  double out = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n)
    if (!x[n].is_zero()) out += x[n].to_double() * std::log(m[n]);
  return out;
}

CategoryMapping by_blocks(const std::vector<std::string>& ids, const std::vector<std::string>& metas) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t n = 0; n < ids.size(); ++n) pairs.emplace_back(ids[n], metas[n]);
  return make_mapping(CategorySet(ids), pairs);
}

void mle_criterion(Tally& check) {
  Gen gen(6);
  // (a) Horn pairs on random mappings.
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pr = random_consistent_pair(gen, 6);
    const auto hp = build_horn_pair(pr.p, pr.q);
    check(column_sums_zero(hp), "Horn column sums vanish");
    check(verify_horn_identity(hp, random_counts(gen, hp.index.categories(), 1, 40)), "Horn identity");
  }
  // (b) Dense grids of step 1/64 over the pure-mixture parameters.
  {
    const auto p = constant_mapping(named_set("i", 3), "k"), q = constant_mapping(named_set("j", 3), "k");
    const auto idx = mapping_product(p, q).categories();
    std::vector<std::array<double, 3>> simplex;
    for (int a = 0; a <= 64; ++a)
      for (int b = 0; a + b <= 64; ++b) simplex.push_back({a / 64.0, b / 64.0, (64 - a - b) / 64.0});
    for (int trial = 0; trial < 2; ++trial) {
      const auto x = random_counts(gen, idx, 0, 20);
      const double best = log_likelihood(x, mle(x, p, q));
      double grid_best = -std::numeric_limits<double>::infinity();
      std::vector<double> m(9);
      for (const auto& u : simplex)
        for (const auto& v : simplex) {
          for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t s = 0; s < 3; ++s) m[r * 3 + s] = u[r] * v[s];
          grid_best = std::max(grid_best, loglik(x, m));
        }
      check(best >= grid_best - 1e-12, "mle beats the grid on 3 x 3");
    }
  }
  {
    const auto p = by_blocks({"1", "2", "3"}, {"a", "a", "b"}), q = by_blocks({"1", "2", "3"}, {"a", "a", "b"});
    const auto idx = mapping_product(p, q).categories();
    for (int trial = 0; trial < 5; ++trial) {
      const auto x = random_counts(gen, idx, 0, 20);
      const double best = log_likelihood(x, mle(x, p, q));
      double grid_best = -std::numeric_limits<double>::infinity();
      for (int h = 0; h <= 64; ++h)
        for (int a = 0; a <= 64; ++a)
          for (int b = 0; b <= 64; ++b) {
            const double hh = h / 64.0, aa = a / 64.0, bb = b / 64.0;
            grid_best = std::max(grid_best, loglik(x, {hh * aa * bb, hh * aa * (1 - bb), hh * (1 - aa) * bb,
                                                       hh * (1 - aa) * (1 - bb), 1 - hh}));
          }
      check(best >= grid_best - 1e-12, "mle beats the grid on two blocks");
    }
  }
  // (c) The displayed block.
  const auto hp = build_horn_pair(mapping_from_json(read_json_file(data_dir + "/horn/p.json")),
                                  mapping_from_json(read_json_file(data_dir + "/horn/q.json")));
  const std::vector<std::vector<int>> displayed{
      {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0},
      {0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0},
      {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1},
      {1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0},
      {0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0},
      {0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0},
      {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1},
      {-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
  };
  check(hp.block(0) == displayed, "displayed 8 x 12 block");
}

void expfam_dimension(Tally& check) {
  Gen gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pr = random_consistent_pair(gen, 6);
    const auto pair = consistent_saturated_pair(pr.p, pr.q);
    const auto c = meta_star(pair.f, pair.g, pr.p, pr.q);
    // Strictly positive laws give an interior point.
    const auto f = lift_dist(gen, pr.p, random_weights(gen, pr.p.codomain().size()));
    std::vector<Rational> hm;
    for (std::size_t k = 0; k < pr.p.codomain().size(); ++k) hm.push_back(aggregate(f, pr.p)[k]);
    const auto g = lift_dist(gen, pr.q, hm);
    const auto theta = pure_mixture_coordinates(pr.p, pr.q, f, g);
    const auto rank = jacobian_rank(c.model, to_real(theta), 1e-8);
    const std::size_t expected = pr.p.domain().size() + pr.q.domain().size() - pr.p.codomain().size() - 1;
    check(rank.rank == expected, "Jacobian rank is |I|+|J|-|M|-1");
  }
}

void staged_trees(Tally& check) {
  const auto t1 = tree_from_json(read_json_file(data_dir + "/trees/t1.json"));
  const auto t2 = tree_from_json(read_json_file(data_dir + "/trees/t2.json"));
  const auto fixed = compare_staged_combination(t1, {"v1", "v2"}, t2, {"w1", "w2"}, {{"v1", "w1"}, {"v2", "w2"}}, 50, 8);
  check(fixed.model_matches, "stored trees: combined model equals the meta-Markov combination");
  check(fixed.reversed_equivalent, "stored trees: reversed roles equivalent");
  check(fixed.staged, "stored trees: result is staged");
  Gen gen(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = static_cast<std::size_t>(uniform_int(gen, 1, 3));
    std::vector<std::string> root;
    for (std::size_t k = 0; k < m; ++k) root.push_back("r" + std::to_string(k));
    const auto a = random_staged_tree(gen, "a", root), b = random_staged_tree(gen, "b", root);
    CutBijection phi;
    for (std::size_t k = 0; k < m; ++k) phi.emplace(a.cut[k], b.cut[k]);
    const auto cmp = compare_staged_combination(a.tree, a.cut, b.tree, b.cut, phi, 50, 800 + static_cast<unsigned>(trial));
    check(cmp.model_matches, "random trees: combined model");
    check(cmp.reversed_equivalent, "random trees: reversed roles");
    check(cmp.staged, "random trees: staged");
  }
}

void invariance(Tally& check) {
  for (int n = 1; n <= 6; ++n) {
    const auto f = binomial(n);
    std::vector<std::size_t> id, mirror;
    for (int i = 0; i <= n; ++i) {
      id.push_back(static_cast<std::size_t>(i));
      mirror.push_back(static_cast<std::size_t>(n - i));
    }
    const FiniteAction action(f.index(), {"e", "s"}, {id, mirror});
    check(static_cast<bool>(check_invariance(f, action, flip_theta(), 1e-12)), "binomial flip");
  }
  const auto action = flip4();
  const auto p = halves(), q = halves();
  const auto on_prod = induced_action_on_product(action, action, p, q);
  const auto f = binomial(3);
  auto holds = [&](const CombinedModel& c, const ParamTransport& t, const std::vector<ExactPoint>& points) {
    return static_cast<bool>(check_invariance(c.model, on_prod, t, points, 1e-12));
  };
  const auto t1 = flip_theta();
  check(holds(meta_star(f, binomial_shadow(), p, q), combined_transport(Variant::MetaStar, {t1}),
              halton_points(f.box(), 64)),
        "part (2) meta-star");
  std::vector<ExactPoint> lower_points;
  for (const auto& t : halton_points(f.box(), 64)) lower_points.push_back({t[0], binomial_low(t[0])});
  check(holds(lower_combine(f, half_split(), p, q), combined_transport(Variant::Lower, {t1, t1}), lower_points),
        "part (3) lower");
  check(holds(upper_combine(f, half_split(), p, q), combined_transport(Variant::Upper, {t1, t1}),
              with_flags(halton_points(concat(f.box(), f.box()), 32))),
        "part (4) upper");
  check(holds(super_combine(f, half_split(), p, q), combined_transport(Variant::Super, {t1, t1}),
              with_flags(halton_points(concat(concat(f.box(), f.box()), f.box()), 32))),
        "part (5) super");
  check(holds(structured_super(f, coin(), half_split(), p, q), combined_transport(Variant::StructuredSuper, {t1, t1, t1}),
              halton_points(concat(concat(f.box(), f.box()), f.box()), 64)),
        "part (5) structured super");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void sampling(Tally& check) {
  const RunningExample ex;
  const auto f = f_theta(ex), g = g_theta(ex);
  const ExactPoint eighth{Rational(1, 8)};
  const std::size_t n = 100000;
  {
    const MetaStarSampler s(f, g, ex.p, ex.q, eighth);
    Rng rng(42);
    std::vector<std::size_t> draws;
    for (std::size_t k = 0; k < n; ++k) draws.push_back(s.position(s.draw(rng)));
    check(chi_square_gof(counts(draws, s.index().size()), s.law().entries()).p_value > 1e-3, "meta-star GOF");
  }
  {
    const auto h = aggregate_model(f, ex.p);
    const ExactPoint t1{Rational(1, 10)}, t2{Rational(1, 5)}, t3{Rational(1, 20)};
    const StructuredSuperSampler s(f, h, g, ex.p, ex.q, t1, t2, t3);
    Rng rng(43);
    std::vector<std::size_t> draws;
    for (std::size_t k = 0; k < n; ++k) draws.push_back(s.position(s.draw(rng)));
    check(chi_square_gof(counts(draws, s.index().size()), s.law().entries()).p_value > 1e-3, "structured-super GOF");
  }
  const auto dir = std::filesystem::temp_directory_path() / ("markovcomb-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  auto draw_file = [&](const std::string& variant, const std::string& name) {
    const auto path = (dir / name).string();
    std::vector<std::string> args{"sample", "--variant", variant, "--f", data_dir + "/running/f_theta.json", "--g",
                                  data_dir + "/running/g_theta.json", "--p", data_dir + "/running/p.json", "--q",
                                  data_dir + "/running/q.json", "--seed", "2024", "--n", "20000", "--out", path};
    if (variant == "meta-star") {
      args.insert(args.end(), {"--theta", "1/8"});
    } else {
      args.insert(args.end(), {"--h", "saturated:2", "--theta", "1/10,1/3,1/20"});
    }
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::cerr << err.str();
    return code == 0 ? slurp(path) : std::string();
  };
  for (const std::string variant : {"meta-star", "structured-super"}) {
    const auto a = draw_file(variant, "a.jsonl"), b = draw_file(variant, "b.jsonl");
    check(!a.empty() && a == b, variant + " draw files identical for one seed");
  }
  std::filesystem::remove_all(dir);
}

struct Criterion {
  int number;
  const char* name;
  double limit_seconds;
  std::function<void(Tally&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "worked examples", 1, worked_examples},
      {2, "aggregate recovery", 5, aggregate_recovery},
      {3, "associativity", 5, associativity},
      {4, "mixture chain", 2, mixture_chain},
      {5, "copula identity", 10, copula_identity},
      {6, "mle and Horn pair", 30, mle_criterion},
      {7, "exponential-family dimension", 10, expfam_dimension},
      {8, "staged trees", 5, staged_trees},
      {9, "invariance", 5, invariance},
      {10, "sampling", 30, sampling},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Tally tally;
    std::string error;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(tally);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.limit_seconds;
    const bool pass = error.empty() && tally.ok() && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %zu checks, %.3f s of %.0f s\n", pass ? "PASS" : "FAIL", c.number, c.name,
                tally.checks, seconds, c.limit_seconds);
    if (!error.empty()) std::printf("  exception: %s\n", error.c_str());
    for (const auto& f : tally.failures) std::printf("  failed: %s\n", f.c_str());
    if (!in_time) std::printf("  over the time limit\n");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
