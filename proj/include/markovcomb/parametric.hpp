#pragma once

// Parametric categorical models and their combinations.
//
// A model is a black-box map from a parameter box to probability vectors.
// Every model has a double evaluator; models built from polynomial pieces
// (saturated, binomial, lifts, staged trees, tabulated polynomials and every
// combination of those) also carry an exact evaluator over rationals, so the
// combination identities can be checked without tolerances.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "markovcomb/combine.hpp"
#include "markovcomb/core.hpp"

namespace mcomb {

namespace tolerance {
inline constexpr double norm = 1e-9;         // |sum - 1| allowed for a raw evaluation
inline constexpr double neg = 1e-12;         // negative slack clamped to zero
inline constexpr double consistency = 1e-9;  // aggregate agreement for doubles
inline constexpr double snap = 1e-13;                // radius searched for the simplest rational
inline constexpr std::int64_t snap_denominator = 1'000'000'000'000;
}  // namespace tolerance

using RealPoint = std::vector<double>;
using ExactPoint = std::vector<Rational>;

RealPoint to_real(std::span<const Rational> point);

struct Interval {
  Rational lo;
  Rational hi;
  bool binary = false;  // only the endpoints 0 and 1 are admissible

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Axis-aligned parameter box, optionally with groups of coordinates whose sum
// must not exceed one (simplex constraints of standard parametrisations).
class ParamBox {
 public:
  ParamBox() = default;
  explicit ParamBox(std::vector<Interval> coords, std::vector<std::vector<std::size_t>> simplex_groups = {});

  static ParamBox unit(std::size_t dimension);
  static ParamBox flag();

  std::size_t dimension() const noexcept { return coords_.size(); }
  const std::vector<Interval>& coords() const noexcept { return coords_; }
  const std::vector<std::vector<std::size_t>>& simplex_groups() const noexcept { return groups_; }

  bool contains(std::span<const double> theta, double slack = tolerance::neg) const;
  bool contains(std::span<const Rational> theta) const;

  friend bool operator==(const ParamBox&, const ParamBox&) = default;

 private:
  std::vector<Interval> coords_;
  std::vector<std::vector<std::size_t>> groups_;
};

ParamBox concat(const ParamBox& a, const ParamBox& b);

// Deterministic low-discrepancy sample of interior points: the Halton
// sequence (skipping index 0) with simplex groups filled by stick breaking.
// Binary coordinates alternate deterministically between 0 and 1.
std::vector<ExactPoint> halton_points(const ParamBox& box, std::size_t count, std::size_t skip = 0);

// Tensor grid with `steps` intervals per coordinate, keeping points that
// satisfy the simplex constraints.
std::vector<ExactPoint> uniform_grid(const ParamBox& box, std::size_t steps);

std::vector<Rational> snap_values(std::span<const double> raw);

class ParametricModel {
 public:
  using RealFn = std::function<std::vector<double>(std::span<const double>)>;
  using ExactFn = std::function<std::vector<Rational>(std::span<const Rational>)>;

  ParametricModel() = default;
  ParametricModel(CategorySet index, ParamBox box, RealFn real, ExactFn exact = {});

  // Builds both evaluators from one generic callable `f(std::span<const S>)`
  // returning std::vector<S> for S in {double, Rational}.
  template <class F>
  static ParametricModel generic(CategorySet index, ParamBox box, F f) {
    RealFn real = [f](std::span<const double> t) { return f(t); };
    ExactFn exact = [f](std::span<const Rational> t) { return f(t); };
    return ParametricModel(std::move(index), std::move(box), std::move(real), std::move(exact));
  }

  const CategorySet& index() const noexcept { return index_; }
  const ParamBox& box() const noexcept { return box_; }
  std::size_t dimension() const noexcept { return box_.dimension(); }
  bool exact() const noexcept { return static_cast<bool>(exact_); }

  // Unvalidated raw values. Rational points go through the exact evaluator
  // when there is one and otherwise snap the double evaluation.
  template <class S>
  std::vector<S> values(std::span<const S> theta) const {
    if constexpr (std::is_same_v<S, double>) {
      return real_(theta);
    } else {
      if (exact_) return exact_(theta);
      const auto t = to_real(theta);
      return snap_values(real_(t));
    }
  }

 private:
  CategorySet index_;
  ParamBox box_;
  RealFn real_;
  ExactFn exact_;
};

struct Evaluation {
  Dist dist;
  std::vector<double> raw;
  double snap_error = 0.0;  // max |snapped - raw| before exact renormalisation
};

// Validates the box, clamps negatives within tolerance::neg, requires the sum
// within tolerance::norm of one, snaps to rationals and renormalises exactly.
Evaluation eval(const ParametricModel& m, std::span<const double> theta);

// Exact evaluation at a rational point. Falls back to eval() for models
// without an exact evaluator.
Dist eval_exact(const ParametricModel& m, std::span<const Rational> theta);

// Snaps a raw vector to a Dist as eval() does.
Evaluation snap_to_dist(const CategorySet& index, std::vector<double> raw);

// Evaluate `m` on a subset of the coordinates of a larger parameter vector.
ParametricModel embed(const ParametricModel& m, ParamBox outer, std::vector<std::size_t> coords);

// Algorithm "Aggregates" applied to a model: the model f_M on M.
ParametricModel aggregate_model(const ParametricModel& m, const CategoryMapping& p);

// --- built-in models -------------------------------------------------------

// theta_0 = 1 - sum_{i>0} theta_i; the other coordinates are free.
ParametricModel saturated(const CategorySet& index);
ParametricModel binomial(int n);
// Fixed distribution, no parameters.
ParametricModel constant_model(const Dist& d);

// A model over p's domain with aggregate h: f_i = lambda_{k,i} h_k. The
// parameters are h's followed, for every metacategory k in codomain order,
// by lambda_{k,i} for all but the first i in the fiber.
ParametricModel model_lift(const CategoryMapping& p, const ParametricModel& h);

// Parameters of saturated(index) producing `target`.
ExactPoint saturated_preimage(const Dist& target);

// Parameters of model_lift(p, h) producing `target`, given h-parameters
// whose image is aggregate(target, p).
ExactPoint lift_preimage(const CategoryMapping& p, std::span<const Rational> h_theta, const Dist& target);

struct SaturatedPair {
  ParametricModel f;   // over I, ignores the mu block
  ParametricModel g;   // over J, ignores the lambda block
  ParamBox box;        // (h, lambda, mu)
  std::size_t h_dim = 0;
  std::size_t lambda_dim = 0;
  std::size_t mu_dim = 0;
};

// Saturated models over I and J lifted from the standard saturated model on
// M, hence meta-consistent by construction.
SaturatedPair consistent_saturated_pair(const CategoryMapping& p, const CategoryMapping& q);

// Pure-mixture parameters (h, lambda, mu) reproducing a consistent pair of
// distributions f on I and g on J.
ExactPoint pure_mixture_coordinates(const CategoryMapping& p, const CategoryMapping& q, const Dist& f,
                                    const Dist& g);

struct ExpFamDimension {
  std::size_t model = 0;
  std::size_t ambient = 0;
};
ExpFamDimension expfam_combination_dim(const CategoryMapping& p, const CategoryMapping& q);

struct JacobianRank {
  std::size_t rank = 0;
  std::vector<double> singular_values;
};
// Central finite-difference Jacobian of the double evaluator at theta.
JacobianRank jacobian_rank(const ParametricModel& m, std::span<const double> theta, double tol = 1e-8,
                           double step = 1e-6);

// --- combinations ----------------------------------------------------------

enum class Variant {
  MetaStar,
  Lower,
  RestrictedLower,
  Upper,
  RestrictedUpper,
  Super,
  RestrictedSuper,
  StructuredSuper,
};

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);

struct CombinedModel {
  ParametricModel model;
  Variant variant = Variant::MetaStar;
  ProductIndex index;
  // f, g; or f, h, g for the structured variant.
  std::vector<ParametricModel> components;
  // Surviving grid points of a restricted lower combination.
  std::vector<ExactPoint> admissible;
};

struct MetaConsistencyReport {
  bool consistent = true;
  double worst_gap = 0.0;
  ExactPoint worst_point;
};

// max over the points of |f_M(theta) - g_M(theta)|_inf <= tol. Exact
// comparison when both models are exact.
MetaConsistencyReport is_meta_consistent(const ParametricModel& f, const ParametricModel& g,
                                         const CategoryMapping& p, const CategoryMapping& q,
                                         std::span<const ExactPoint> points, double tol = tolerance::consistency);
// Default sample: 64 Halton points of f's box.
MetaConsistencyReport is_meta_consistent(const ParametricModel& f, const ParametricModel& g,
                                         const CategoryMapping& p, const CategoryMapping& q,
                                         double tol = tolerance::consistency);

struct MetaOptions {
  std::size_t sample_points = 64;
  double tol = tolerance::consistency;
  ZeroPolicy zero_policy = ZeroPolicy::Strict;
};

CombinedModel meta_star(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                        const CategoryMapping& q, MetaOptions opts = {});

// Parameters (theta_1, theta_2) in Theta_f x Theta_g; evaluation raises
// InconsistentPair off the consistent set.
CombinedModel lower_combine(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                            const CategoryMapping& q, double tol = tolerance::consistency);

bool lower_admissible(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                      const CategoryMapping& q, std::span<const Rational> theta1, std::span<const Rational> theta2,
                      double tol = tolerance::consistency);

// Theta' is the set of grid points where f(theta) and g(theta) are consistent.
CombinedModel restricted_lower(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                               const CategoryMapping& q, std::span<const ExactPoint> grid,
                               double tol = tolerance::consistency);

// (theta_1, theta_2, flag): flag 0 left combination, flag 1 right.
CombinedModel upper_combine(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                            const CategoryMapping& q, CombineOptions opts = {});
CombinedModel restricted_upper(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                               const CategoryMapping& q, CombineOptions opts = {});

// (theta_1, theta_2, theta_3, flag); the middle factor is f_M(theta_2) for
// flag 0 and g_M(theta_2) for flag 1.
CombinedModel super_combine(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                            const CategoryMapping& q, CombineOptions opts = {});
// (theta_1, theta_2, flag) with theta_3 = theta_1.
CombinedModel restricted_super(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                               const CategoryMapping& q, CombineOptions opts = {});

// (theta_1, theta_2, theta_3) -> f_i/f_{M,k} * h_k * g_j/g_{M,k}.
CombinedModel structured_super(const ParametricModel& f, const ParametricModel& h, const ParametricModel& g,
                               const CategoryMapping& p, const CategoryMapping& q, CombineOptions opts = {});

struct StructuredMarginals {
  ParametricModel left;   // on I, parameters (theta_1, theta_2)
  ParametricModel right;  // on J, parameters (theta_2, theta_3)
  ParametricModel meta;   // on M, parameters theta_2
};
StructuredMarginals structured_marginals(const CombinedModel& c);

enum class ParameterSharing {
  Shared,    // f and g read the same theta; boxes must be equal
  Separate,  // parameters (theta_f, theta_g)
};

// (theta, lambda) -> lambda f(theta) + (1 - lambda) g(theta).
ParametricModel mixture(const ParametricModel& f, const ParametricModel& g,
                        ParameterSharing sharing = ParameterSharing::Shared);

// The same model built only from Markov combinations and aggregates: two
// independence products with the model (lambda, 1 - lambda), two aggregates,
// one meta-Markov combination over {0, 1} and a final pairwise aggregate.
ParametricModel mixture_via_chain(const ParametricModel& f, const ParametricModel& g,
                                  ParameterSharing sharing = ParameterSharing::Shared);

// --- helpers shared with other modules --------------------------------------

namespace detail {

template <class S>
S ipow(const S& base, int e) {
  S r(1);
  for (int n = 0; n < e; ++n) r *= base;
  return r;
}

template <class S>
double gap(const S& a, const S& b) {
  if constexpr (std::is_same_v<S, double>) {
    return a > b ? a - b : b - a;
  } else {
    return (a - b).abs().to_double();
  }
}

}  // namespace detail

}  // namespace mcomb
