#pragma once

// Finite group actions on category sets, compatibility with a pair of
// mappings, and invariance of (combined) models.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "markovcomb/parametric.hpp"

namespace mcomb {

// A finite group acting on a category set by permutations.
// perm(g)[x] is the position of g.x; compose(a, b) is the element acting as
// x -> a.(b.x).
class FiniteAction {
 public:
  // Checks that every perm is a bijection, that an identity exists, and that
  // the compose table is closed and matches the permutations and that
  // inverses exist. When `compose` is absent it is derived from the
  // permutations, which then must be pairwise distinct. Throws InvalidAction.
  FiniteAction(CategorySet set, std::vector<std::string> elements, std::vector<std::vector<std::size_t>> perms,
               std::optional<std::vector<std::vector<std::size_t>>> compose = std::nullopt);

  static FiniteAction trivial(const CategorySet& set);

  const CategorySet& set() const { return set_; }
  const std::vector<std::string>& elements() const { return elements_; }
  std::size_t order() const { return elements_.size(); }
  std::size_t element(std::string_view name) const;
  const std::vector<std::size_t>& perm(std::size_t g) const { return perms_[g]; }
  std::size_t act(std::size_t g, std::size_t x) const { return perms_[g][x]; }
  std::size_t compose(std::size_t a, std::size_t b) const { return compose_[a][b]; }
  std::size_t identity() const { return identity_; }
  std::size_t inverse(std::size_t g) const { return inverse_[g]; }
  const std::vector<std::vector<std::size_t>>& compose_table() const { return compose_; }

 private:
  CategorySet set_;
  std::vector<std::string> elements_;
  std::vector<std::vector<std::size_t>> perms_;
  std::vector<std::vector<std::size_t>> compose_;
  std::vector<std::size_t> inverse_;
  std::size_t identity_ = 0;
};

// Parameter maps alpha_bar, one per group element.
class ParamTransport {
 public:
  using RealFn = std::function<RealPoint(std::size_t, std::span<const double>)>;
  using ExactFn = std::function<ExactPoint(std::size_t, std::span<const Rational>)>;

  ParamTransport(std::size_t dimension, RealFn real, ExactFn exact = {});

  // Builds both evaluators from f(g, span<const S>) -> std::vector<S>.
  template <class F>
  static ParamTransport generic(std::size_t dimension, F f) {
    return ParamTransport(
        dimension, [f](std::size_t g, std::span<const double> t) { return f(g, t); },
        [f](std::size_t g, std::span<const Rational> t) { return f(g, t); });
  }

  static ParamTransport identity(std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  bool exact() const { return static_cast<bool>(exact_); }

  template <class S>
  std::vector<S> apply(std::size_t g, std::span<const S> theta) const {
    if constexpr (std::is_same_v<S, double>) {
      return real_(g, theta);
    } else {
      return exact_(g, theta);
    }
  }

 private:
  std::size_t dimension_;
  RealFn real_;
  ExactFn exact_;
};

struct InvarianceReport {
  bool invariant = true;
  bool injective = true;  // no two sampled points collide under a transport
  double worst_gap = 0.0;
  std::string element;
  ExactPoint point;
  explicit operator bool() const { return invariant && injective; }
};

// Checks f(theta)_{alpha^-1(i)} = f(alpha_bar(theta))_i at every sampled
// (theta, alpha, i). Throws TransportOutOfBox.
InvarianceReport check_invariance(const ParametricModel& f, const FiniteAction& action,
                                  const ParamTransport& transport, std::span<const ExactPoint> points, double tol);
// 64 Halton points of f's box.
InvarianceReport check_invariance(const ParametricModel& f, const FiniteAction& action,
                                  const ParamTransport& transport, double tol = 1e-12);

// Both actions must list the same elements in the same order.
bool is_compatible(const FiniteAction& on_i, const FiniteAction& on_j, const CategoryMapping& p,
                   const CategoryMapping& q);

// alpha.p(i) := p(alpha.i). Throws NotCompatible.
FiniteAction induced_action_on_M(const FiniteAction& on_i, const FiniteAction& on_j, const CategoryMapping& p,
                                 const CategoryMapping& q);

// alpha.(i, j) := (alpha.i, alpha.j) on I x_M J. Throws NotCompatible.
FiniteAction induced_action_on_product(const FiniteAction& on_i, const FiniteAction& on_j, const CategoryMapping& p,
                                       const CategoryMapping& q);

// Transport for a combined model built from component transports:
//   meta-star, restricted lower/upper/super: {shared}
//   lower, upper, super: {for f, for g}
//   structured super: {for f, for h, for g}
ParamTransport combined_transport(Variant variant, const std::vector<ParamTransport>& components);

}  // namespace mcomb
