#include <cmath>
#include <limits>

#include <doctest.h>

#include "markovcomb/json_io.hpp"
#include "markovcomb/mle.hpp"
#include "support.hpp"

using namespace mcomb;
using namespace testing_support;

namespace {

const std::string data_dir = MARKOVCOMB_DATA_DIR;

CategoryMapping blocks(const std::vector<std::string>& ids, const std::vector<std::string>& metas) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t n = 0; n < ids.size(); ++n) pairs.emplace_back(ids[n], metas[n]);
  return make_mapping(CategorySet(ids), pairs);
}

// {1,2} -> a, {3,4} -> b on both sides.
struct FourByFour {
  CategoryMapping p = blocks({"1", "2", "3", "4"}, {"a", "a", "b", "b"});
  CategoryMapping q = blocks({"1", "2", "3", "4"}, {"a", "a", "b", "b"});
  IndexedVector x{mapping_product(p, q).categories(),
                  ratios({"3/16", "1/16", "1/16", "3/16", "1/8", "1/8", "1/8", "1/8"})};
};

IndexedVector random_counts(Gen& gen, const CategorySet& index, std::int64_t lo = 1, std::int64_t hi = 30) {
  std::vector<Rational> e;
  for (std::size_t n = 0; n < index.size(); ++n) e.emplace_back(uniform_int(gen, lo, hi));
  return IndexedVector(index, std::move(e));
}

// Test-side u, v, block masses and total, keyed by id.
struct Sums {
  IdMap u, v, block;
  Rational total;
};

Sums oracle_sums(const IndexedVector& x, const CategoryMapping& p, const CategoryMapping& q) {
  Sums s;
  for (const auto& [i, j] : oracle_pairs(p, q)) {
    const auto& val = x.at(pair_id(i, j));
    s.u[i] += val;
    s.v[j] += val;
    s.block[image_of(p, i)] += val;
    s.total += val;
  }
  return s;
}

double oracle_loglik(const IndexedVector& x, const std::vector<double>& m) {
  double out = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n)
    if (!x[n].is_zero()) out += x[n].to_double() * std::log(m[n]);
  return out;
}

// Points of the probability simplex of dimension d on the grid of step 1/s.
std::vector<std::vector<double>> simplex_grid(std::size_t d, int s) {
  std::vector<std::vector<double>> out;
  std::vector<int> c(d, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos + 1 == d) {
      c[pos] = left;
      std::vector<double> pt;
      for (int v : c) pt.push_back(static_cast<double>(v) / s);
      out.push_back(std::move(pt));
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, s);
  return out;
}

}  // namespace

TEST_CASE("mle on the block example") {
  const FourByFour ex;
  const auto hat = mle(ex.x, ex.p, ex.q);
  CHECK(hat.entries() == std::vector<Rational>(8, Rational(1, 8)));
  CHECK(mle(Rational(16) * ex.x, ex.p, ex.q) == hat);
}

TEST_CASE("trivial mle cases") {
  Gen gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ni = static_cast<std::size_t>(uniform_int(gen, 1, 5));
    const auto nj = static_cast<std::size_t>(uniform_int(gen, 1, 5));
    // One metacategory: the independence estimate.
    const auto p = constant_mapping(named_set("i", ni), "k");
    const auto q = constant_mapping(named_set("j", nj), "k");
    const auto x = random_counts(gen, mapping_product(p, q).categories(), 0, 9);
    if (x.sum().is_zero()) continue;
    const auto s = oracle_sums(x, p, q);
    const auto hat = mle(x, p, q);
    for (const auto& [i, j] : oracle_pairs(p, q))
      CHECK(hat.at(pair_id(i, j)) == s.u.at(i) * s.v.at(j) / (s.total * s.total));

    // Every fiber a singleton: the model is saturated on the product.
    const auto ip = identity_mapping(named_set("c", ni));
    const auto y = random_counts(gen, mapping_product(ip, ip).categories());
    CHECK(mle(y, ip, ip).vector() == (Rational(1) / y.sum()) * y);
  }
  const auto p = constant_mapping(named_set("i", 2), "k"), q = constant_mapping(named_set("j", 3), "k");
  const auto idx = mapping_product(p, q).categories();
  const IndexedVector uniform(idx, std::vector<Rational>(6, Rational(1, 6)));
  CHECK(mle(uniform, p, q) == Dist(uniform));
}

TEST_CASE("mle errors") {
  const FourByFour ex;
  auto bad = ex.x.entries();
  bad[0] = Rational(-1, 16);
  CHECK(code_of([&] { mle(IndexedVector(ex.x.index(), bad), ex.p, ex.q); }) == ErrorCode::NegativeEntry);
  CHECK(code_of([&] { mle(IndexedVector(ex.x.index(), std::vector<Rational>(8)), ex.p, ex.q); }) ==
        ErrorCode::AllZero);
  CHECK(code_of([&] { mle(IndexedVector(named_set("z", 8), ex.x.entries()), ex.p, ex.q); }) ==
        ErrorCode::IndexMismatch);
  // A block without data gets zero mass.
  auto half = ex.x.entries();
  for (std::size_t n = 4; n < 8; ++n) half[n] = Rational(0);
  const auto hat = mle(IndexedVector(ex.x.index(), half), ex.p, ex.q);
  for (std::size_t n = 4; n < 8; ++n) CHECK(hat[n].is_zero());
  CHECK(hat.vector().sum() == Rational(1));
}

TEST_CASE("mle properties on random data") {
  Gen gen(41);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pair = random_consistent_pair(gen, 6);
    const auto prod = mapping_product(pair.p, pair.q);
    const auto x = random_counts(gen, prod.categories(), 0, 12);
    if (x.sum().is_zero()) continue;
    const auto hat = mle(x, pair.p, pair.q);
    const auto s = oracle_sums(x, pair.p, pair.q);

    // Scale invariance and idempotence.
    const Rational c(uniform_int(gen, 1, 50), uniform_int(gen, 1, 50));
    CHECK(mle(c * x, pair.p, pair.q) == hat);
    CHECK(mle(hat, pair.p, pair.q) == hat);

    // Matching margins and block masses.
    const auto hs = oracle_sums(hat, pair.p, pair.q);
    for (const auto& [i, v] : s.u) CHECK(hs.u.at(i) == v / s.total);
    for (const auto& [j, v] : s.v) CHECK(hs.v.at(j) == v / s.total);
    for (const auto& [k, v] : s.block) CHECK(hs.block.at(k) == v / s.total);

    // Rank one inside each block: all 2x2 minors vanish.
    const auto pairs = oracle_pairs(pair.p, pair.q);
    for (const auto& [i1, j1] : pairs)
      for (const auto& [i2, j2] : pairs) {
        if (image_of(pair.p, i1) != image_of(pair.p, i2)) continue;
        CHECK(hat.at(pair_id(i1, j1)) * hat.at(pair_id(i2, j2)) == hat.at(pair_id(i1, j2)) * hat.at(pair_id(i2, j1)));
      }
  }
}

TEST_CASE("mle beats a dense grid on small instances") {
  Gen gen(43);
  SUBCASE("one metacategory, 3 x 3") {
    const auto p = constant_mapping(named_set("i", 3), "k"), q = constant_mapping(named_set("j", 3), "k");
    const auto idx = mapping_product(p, q).categories();
    for (int trial = 0; trial < 2; ++trial) {
      const auto x = random_counts(gen, idx, 0, 20);
      const auto hat = mle(x, p, q);
      const double best_mle = log_likelihood(x, hat);
      const auto grid = simplex_grid(3, 64);
      double best_grid = -std::numeric_limits<double>::infinity();
      std::vector<double> m(9);
      for (const auto& a : grid)
        for (const auto& b : grid) {
          for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t s = 0; s < 3; ++s) m[r * 3 + s] = a[r] * b[s];
          best_grid = std::max(best_grid, oracle_loglik(x, m));
        }
      CHECK(best_mle >= best_grid - 1e-12);
      CHECK(best_mle - best_grid < 0.05);
    }
  }
  SUBCASE("two metacategories, five cells") {
    const auto p = blocks({"1", "2", "3"}, {"a", "a", "b"});
    const auto q = blocks({"1", "2", "3"}, {"a", "a", "b"});
    const auto idx = mapping_product(p, q).categories();
    REQUIRE(idx.size() == 5);
    for (int trial = 0; trial < 5; ++trial) {
      const auto x = random_counts(gen, idx, 0, 20);
      const double best_mle = log_likelihood(x, mle(x, p, q));
      double best_grid = -std::numeric_limits<double>::infinity();
      for (int h = 0; h <= 64; ++h)
        for (int a = 0; a <= 64; ++a)
          for (int b = 0; b <= 64; ++b) {
            const double hh = h / 64.0, aa = a / 64.0, bb = b / 64.0;
            const std::vector<double> m{hh * aa * bb, hh * aa * (1 - bb), hh * (1 - aa) * bb, hh * (1 - aa) * (1 - bb),
                                        1 - hh};
            best_grid = std::max(best_grid, oracle_loglik(x, m));
          }
      CHECK(best_mle >= best_grid - 1e-12);
    }
  }
  SUBCASE("random search on the block example") {
    const FourByFour ex;
    const double best_mle = log_likelihood(ex.x, mle(ex.x, ex.p, ex.q));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool beaten = false;
    for (int trial = 0; trial < 10000; ++trial) {
      const double h = u(gen), a1 = u(gen), b1 = u(gen), a2 = u(gen), b2 = u(gen);
      const std::vector<double> m{h * a1 * b1,
                                  h * a1 * (1 - b1),
                                  h * (1 - a1) * b1,
                                  h * (1 - a1) * (1 - b1),
                                  (1 - h) * a2 * b2,
                                  (1 - h) * a2 * (1 - b2),
                                  (1 - h) * (1 - a2) * b2,
                                  (1 - h) * (1 - a2) * (1 - b2)};
      beaten = beaten || oracle_loglik(ex.x, m) > best_mle + 1e-12;
    }
    CHECK_FALSE(beaten);
  }
}

TEST_CASE("log likelihood") {
  const auto idx = named_set("c", 4);
  const IndexedVector x(idx, std::vector<Rational>(4, Rational(3)));
  const IndexedVector m(idx, std::vector<Rational>(4, Rational(1, 4)));
  CHECK(log_likelihood(x, m) == doctest::Approx(-12.0 * std::log(4.0)));
  const IndexedVector holes(idx, ratios({"1/2", "1/2", "0", "0"}));
  CHECK(code_of([&] { log_likelihood(x, holes); }) == ErrorCode::SupportViolation);
  const IndexedVector sparse(idx, ratios({"1", "1", "0", "0"}));
  CHECK(log_likelihood(sparse, holes) == doctest::Approx(2.0 * std::log(0.5)));
}

TEST_CASE("the displayed Horn block") {
  const auto p = mapping_from_json(read_json_file(data_dir + "/horn/p.json"));
  const auto q = mapping_from_json(read_json_file(data_dir + "/horn/q.json"));
  const auto hp = build_horn_pair(p, q);
  CHECK(hp.rows() == 9);
  CHECK(hp.cols() == 12);
  const std::vector<std::vector<int>> expected{
      {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0},
      {0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0},
      {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1},
      {1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0},
      {0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0},
      {0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0},
      {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1},
      {-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
  };
  CHECK(hp.block(0) == expected);
  CHECK(hp.h.back() == std::vector<int>(12, -1));
  CHECK(hp.lambda == std::vector<int>(12, 1));
  CHECK(column_sums_zero(hp));
  const auto counts = read_json_file(data_dir + "/horn/counts.json");
  std::vector<Rational> e;
  for (const auto& s : counts["entries"]) e.push_back(Rational::parse(s.get<std::string>()));
  const IndexedVector x(hp.index.categories(), e);
  CHECK(verify_horn_identity(hp, x));
}

TEST_CASE("a single cell block") {
  const auto p = identity_mapping(CategorySet{"x"}), q = identity_mapping(CategorySet{"x"});
  const auto hp = build_horn_pair(p, q);
  CHECK(hp.block(0) == std::vector<std::vector<int>>{{1}, {1}, {-1}});
  CHECK(hp.rows() == 4);
}

TEST_CASE("Horn pairs of random mappings") {
  Gen gen(47);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pair = random_consistent_pair(gen, 8);
    const auto hp = build_horn_pair(pair.p, pair.q);
    const auto ni = pair.p.domain().size(), nj = pair.q.domain().size(), m = pair.p.codomain().size();
    CHECK(hp.rows() == ni + nj + m + 1);
    CHECK(hp.cols() == oracle_pairs(pair.p, pair.q).size());
    CHECK(column_sums_zero(hp));
    if (trial % 4 == 0) {
      const auto x = random_counts(gen, hp.index.categories());
      CHECK(verify_horn_identity(hp, x));
    }
  }
  SUBCASE("positive distributions") {
    for (int trial = 0; trial < 1000; ++trial) {
      const auto pair = random_consistent_pair(gen, 4);
      const auto hp = build_horn_pair(pair.p, pair.q);
      const auto x = random_dist(gen, hp.index.categories());
      CHECK(horn_map(hp, x) == mle(x, pair.p, pair.q).entries());
    }
  }
  const FourByFour ex;
  const auto hp = build_horn_pair(ex.p, ex.q);
  CHECK(verify_horn_identity(hp, ex.x));
  auto half = ex.x.entries();
  for (std::size_t n = 4; n < 8; ++n) half[n] = Rational(0);
  CHECK(code_of([&] { horn_map(hp, IndexedVector(ex.x.index(), half)); }) == ErrorCode::ZeroLinearForm);
}
