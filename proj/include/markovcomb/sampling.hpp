#pragma once

// Seeded samplers for distributions and combined models.
//
// Draws use inverse-CDF over the stored index order: a 53-bit uniform
// u = k / 2^53 is compared exactly against the rational cumulative sums.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "markovcomb/parametric.hpp"
#include "markovcomb/random.hpp"

namespace mcomb {

class CategoricalSampler {
 public:
  explicit CategoricalSampler(std::vector<Rational> probabilities);
  explicit CategoricalSampler(const Dist& d) : CategoricalSampler(d.entries()) {}
  std::size_t draw(Rng& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<Rational> cumulative_;
};

// Position of the drawn category in d's index.
std::size_t sample_position(const Dist& d, Rng& rng);
const std::string& sample_dist(const Dist& d, Rng& rng);

struct PairDraw {
  std::size_t i = 0, j = 0;  // positions in I and J
  friend bool operator==(const PairDraw&, const PairDraw&) = default;
};

// Draw i from f(theta), then j from g(theta) restricted to J_p(i).
class MetaStarSampler {
 public:
  // Throws NotMetaConsistent when the evaluations disagree beyond the
  // consistency tolerance.
  MetaStarSampler(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                  const CategoryMapping& q, std::span<const Rational> theta);

  PairDraw draw(Rng& rng) const;
  const ProductIndex& index() const { return prod_; }
  std::size_t position(const PairDraw& d) const;
  // Closed-form law of a draw, on the product index.
  const Dist& law() const { return law_; }

 private:
  ProductIndex prod_;
  CategoricalSampler first_;
  std::vector<std::optional<CategoricalSampler>> second_;  // per metacategory of p
  std::unordered_map<std::uint64_t, std::size_t> pos_;
  Dist law_;
};

// Draw k from h(theta2), i from f(theta1) restricted to I_k, j from
// g(theta3) restricted to J_k.
class StructuredSuperSampler {
 public:
  StructuredSuperSampler(const ParametricModel& f, const ParametricModel& h, const ParametricModel& g,
                         const CategoryMapping& p, const CategoryMapping& q, std::span<const Rational> theta1,
                         std::span<const Rational> theta2, std::span<const Rational> theta3);

  PairDraw draw(Rng& rng) const;
  const ProductIndex& index() const { return prod_; }
  std::size_t position(const PairDraw& d) const;
  const Dist& law() const { return law_; }

 private:
  ProductIndex prod_;
  CategoricalSampler meta_;
  std::vector<std::optional<CategoricalSampler>> left_, right_;  // per metacategory of p
  std::unordered_map<std::uint64_t, std::size_t> pos_;
  Dist law_;
};

PairDraw sample_meta_star(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                          const CategoryMapping& q, std::span<const Rational> theta, Rng& rng);
PairDraw sample_structured_super(const ParametricModel& f, const ParametricModel& h, const ParametricModel& g,
                                 const CategoryMapping& p, const CategoryMapping& q,
                                 std::span<const Rational> theta1, std::span<const Rational> theta2,
                                 std::span<const Rational> theta3, Rng& rng);

// Relative frequencies of positions into index. Throws EmptyInput.
Dist empirical_dist(std::span<const std::size_t> draws, const CategorySet& index);
std::vector<std::uint64_t> counts(std::span<const std::size_t> draws, std::size_t cells);

struct GofResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

// Pearson chi-square against a law; cells with expected count below
// min_expected are pooled into one cell.
GofResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const Rational> law,
                         double min_expected = 5.0);

}  // namespace mcomb
