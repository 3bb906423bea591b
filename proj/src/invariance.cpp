#include "markovcomb/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace mcomb {

FiniteAction::FiniteAction(CategorySet set, std::vector<std::string> elements,
                           std::vector<std::vector<std::size_t>> perms,
                           std::optional<std::vector<std::vector<std::size_t>>> compose)
    : set_(std::move(set)), elements_(std::move(elements)), perms_(std::move(perms)) {
  const std::size_t n = elements_.size();
  if (n == 0) throw Error(ErrorCode::InvalidAction, "a group needs at least one element");
  if (perms_.size() != n) throw Error(ErrorCode::InvalidAction, "one permutation per element is required");
  std::set<std::string> names(elements_.begin(), elements_.end());
  if (names.size() != n) throw Error(ErrorCode::InvalidAction, "duplicate element names");
  for (std::size_t g = 0; g < n; ++g) {
    if (perms_[g].size() != set_.size())
      throw Error(ErrorCode::InvalidAction, "permutation of '" + elements_[g] + "' has the wrong length");
    std::vector<bool> hit(set_.size(), false);
    for (auto x : perms_[g]) {
      if (x >= set_.size() || hit[x])
        throw Error(ErrorCode::InvalidAction, "'" + elements_[g] + "' does not act as a bijection");
      hit[x] = true;
    }
  }
  bool found_identity = false;
  for (std::size_t g = 0; g < n && !found_identity; ++g) {
    bool id = true;
    for (std::size_t x = 0; x < set_.size(); ++x) id = id && perms_[g][x] == x;
    if (id) {
      identity_ = g;
      found_identity = true;
    }
  }
  if (!found_identity) throw Error(ErrorCode::InvalidAction, "no element acts as the identity");

  auto composed = [&](std::size_t a, std::size_t b) {
    std::vector<std::size_t> out(set_.size());
    for (std::size_t x = 0; x < set_.size(); ++x) out[x] = perms_[a][perms_[b][x]];
    return out;
  };
  if (compose) {
    compose_ = std::move(*compose);
    if (compose_.size() != n) throw Error(ErrorCode::InvalidAction, "compose table has the wrong size");
    for (std::size_t a = 0; a < n; ++a) {
      if (compose_[a].size() != n) throw Error(ErrorCode::InvalidAction, "compose table has the wrong size");
      for (std::size_t b = 0; b < n; ++b) {
        if (compose_[a][b] >= n) throw Error(ErrorCode::InvalidAction, "compose table leaves the group");
        if (perms_[compose_[a][b]] != composed(a, b))
          throw Error(ErrorCode::InvalidAction,
                      "compose(" + elements_[a] + ", " + elements_[b] + ") does not match the permutations");
      }
    }
    if (compose_[identity_] != [&] {
          std::vector<std::size_t> row(n);
          for (std::size_t b = 0; b < n; ++b) row[b] = b;
          return row;
        }())
      throw Error(ErrorCode::InvalidAction, "identity element does not compose trivially");
  } else {
    std::map<std::vector<std::size_t>, std::size_t> by_perm;
    for (std::size_t g = 0; g < n; ++g)
      if (!by_perm.emplace(perms_[g], g).second)
        throw Error(ErrorCode::InvalidAction, "two elements act identically; give a compose table");
    compose_.assign(n, std::vector<std::size_t>(n));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        auto it = by_perm.find(composed(a, b));
        if (it == by_perm.end())
          throw Error(ErrorCode::InvalidAction, "the permutations are not closed under composition");
        compose_[a][b] = it->second;
      }
  }
  // Associativity follows from the permutation check only when the action is
  // faithful; check the table directly.
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (compose_[compose_[a][b]][c] != compose_[a][compose_[b][c]])
          throw Error(ErrorCode::InvalidAction, "compose table is not associative");
  inverse_.assign(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (compose_[a][b] == identity_ && compose_[b][a] == identity_) inverse_[a] = b;
  for (std::size_t a = 0; a < n; ++a)
    if (inverse_[a] == n) throw Error(ErrorCode::InvalidAction, "'" + elements_[a] + "' has no inverse");
}

FiniteAction FiniteAction::trivial(const CategorySet& set) {
  std::vector<std::size_t> id(set.size());
  for (std::size_t x = 0; x < id.size(); ++x) id[x] = x;
  return FiniteAction(set, {"1"}, {id});
}

std::size_t FiniteAction::element(std::string_view name) const {
  for (std::size_t g = 0; g < elements_.size(); ++g)
    if (elements_[g] == name) return g;
  throw Error(ErrorCode::InvalidAction, "unknown group element '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

ParamTransport::ParamTransport(std::size_t dimension, RealFn real, ExactFn exact)
    : dimension_(dimension), real_(std::move(real)), exact_(std::move(exact)) {
  if (!real_) throw Error(ErrorCode::InvalidArgument, "a transport needs a double evaluator");
}

ParamTransport ParamTransport::identity(std::size_t dimension) {
  return generic(dimension, [](std::size_t, auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    return std::vector<S>(theta.begin(), theta.end());
  });
}

namespace {

std::string point_text(const ExactPoint& p) {
  std::string s = "(";
  for (std::size_t n = 0; n < p.size(); ++n) s += (n ? ", " : "") + p[n].str();
  return s + ")";
}

}  // namespace

InvarianceReport check_invariance(const ParametricModel& f, const FiniteAction& action,
                                  const ParamTransport& transport, std::span<const ExactPoint> points, double tol) {
  if (!(action.set() == f.index())) throw Error(ErrorCode::IndexMismatch, "action is not on the model's index");
  if (transport.dimension() != f.dimension())
    throw Error(ErrorCode::InvalidArgument, "transport dimension differs from the model's");
  const bool exact = f.exact() && transport.exact();
  InvarianceReport report;
  for (std::size_t g = 0; g < action.order(); ++g) {
    const std::size_t inv = action.inverse(g);
    std::set<std::vector<std::string>> images;
    std::set<std::vector<std::string>> sources;
    for (const auto& point : points) {
      std::vector<double> lhs, rhs;
      ExactPoint moved;
      if (exact) {
        moved = transport.apply<Rational>(g, point);
        if (!f.box().contains(std::span<const Rational>(moved)))
          throw Error(ErrorCode::TransportOutOfBox, "transport of '" + action.elements()[g] + "' leaves the box at " +
                                                        point_text(point));
        const auto a = f.values<Rational>(point);
        const auto b = f.values<Rational>(moved);
        for (std::size_t i = 0; i < a.size(); ++i) {
          const Rational gap = a[action.act(inv, i)] - b[i];
          const double d = std::abs(gap.to_double());
          if (d > report.worst_gap) report.worst_gap = d;
          if (!(d <= tol)) {
            if (report.invariant) {
              report.element = action.elements()[g];
              report.point = point;
            }
            report.invariant = false;
          }
        }
      } else {
        const auto x = to_real(point);
        const auto y = transport.apply<double>(g, x);
        if (!f.box().contains(std::span<const double>(y)))
          throw Error(ErrorCode::TransportOutOfBox, "transport of '" + action.elements()[g] + "' leaves the box at " +
                                                        point_text(point));
        for (double v : y) moved.push_back(Rational::from_double(v));
        const auto a = f.values<double>(x);
        const auto b = f.values<double>(y);
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double d = std::abs(a[action.act(inv, i)] - b[i]);
          if (d > report.worst_gap) report.worst_gap = d;
          if (!(d <= tol)) {
            if (report.invariant) {
              report.element = action.elements()[g];
              report.point = point;
            }
            report.invariant = false;
          }
        }
      }
      std::vector<std::string> key, src;
      for (const auto& v : moved) key.push_back(v.str());
      for (const auto& v : point) src.push_back(v.str());
      if (sources.insert(src).second && !images.insert(key).second) report.injective = false;
    }
  }
  return report;
}

InvarianceReport check_invariance(const ParametricModel& f, const FiniteAction& action,
                                  const ParamTransport& transport, double tol) {
  const auto points = halton_points(f.box(), 64);
  return check_invariance(f, action, transport, points, tol);
}

namespace {

void require_same_group(const FiniteAction& a, const FiniteAction& b) {
  if (a.elements() != b.elements() || a.compose_table() != b.compose_table())
    throw Error(ErrorCode::InvalidAction, "the two actions must be of the same group");
}

}  // namespace

bool is_compatible(const FiniteAction& on_i, const FiniteAction& on_j, const CategoryMapping& p,
                   const CategoryMapping& q) {
  require_same_group(on_i, on_j);
  if (!(on_i.set() == p.domain()) || !(on_j.set() == q.domain()))
    throw Error(ErrorCode::IndexMismatch, "actions are not on the mapping domains");
  if (!p.codomain().same_elements(q.codomain()))
    throw Error(ErrorCode::CodomainMismatch, "category mappings have different metacategories");
  for (std::size_t g = 0; g < on_i.order(); ++g)
    for (std::size_t i = 0; i < p.domain().size(); ++i)
      for (std::size_t j = 0; j < q.domain().size(); ++j) {
        if (p.image(p.domain()[i]) != q.image(q.domain()[j])) continue;
        if (p.image(p.domain()[on_i.act(g, i)]) != q.image(q.domain()[on_j.act(g, j)])) return false;
      }
  return true;
}

FiniteAction induced_action_on_M(const FiniteAction& on_i, const FiniteAction& on_j, const CategoryMapping& p,
                                 const CategoryMapping& q) {
  if (!is_compatible(on_i, on_j, p, q)) throw Error(ErrorCode::NotCompatible, "action is not compatible with (p, q)");
  const std::size_t m = p.codomain().size();
  std::vector<std::vector<std::size_t>> perms(on_i.order(), std::vector<std::size_t>(m));
  for (std::size_t g = 0; g < on_i.order(); ++g)
    for (std::size_t k = 0; k < m; ++k) {
      const auto& fib = p.fiber_positions(k);
      const std::size_t image = p.image(on_i.act(g, fib.front()));
      for (auto i : fib)
        if (p.image(on_i.act(g, i)) != image)
          throw Error(ErrorCode::NotCompatible, "induced action on '" + p.codomain()[k] + "' is not well defined");
      perms[g][k] = image;
    }
  return FiniteAction(p.codomain(), on_i.elements(), std::move(perms), on_i.compose_table());
}

FiniteAction induced_action_on_product(const FiniteAction& on_i, const FiniteAction& on_j, const CategoryMapping& p,
                                       const CategoryMapping& q) {
  if (!is_compatible(on_i, on_j, p, q)) throw Error(ErrorCode::NotCompatible, "action is not compatible with (p, q)");
  const auto prod = mapping_product(p, q);
  std::vector<std::vector<std::size_t>> perms(on_i.order(), std::vector<std::size_t>(prod.size()));
  for (std::size_t g = 0; g < on_i.order(); ++g)
    for (std::size_t n = 0; n < prod.size(); ++n) {
      const auto& t = prod.triples()[n];
      perms[g][n] = prod.categories().position(pair_id(p.domain()[on_i.act(g, t.i)], q.domain()[on_j.act(g, t.j)]));
    }
  return FiniteAction(prod.categories(), on_i.elements(), std::move(perms), on_i.compose_table());
}

// ---------------------------------------------------------------------------

namespace {

// Applies parts[n] to consecutive coordinate ranges; an empty optional keeps
// the range (used for the flag).
struct Piece {
  std::size_t width;
  std::optional<ParamTransport> t;
};

template <class S>
std::vector<S> apply_pieces(const std::vector<Piece>& pieces, std::size_t g, std::span<const S> theta) {
  std::vector<S> out;
  out.reserve(theta.size());
  std::size_t c = 0;
  for (const auto& piece : pieces) {
    const auto part = theta.subspan(c, piece.width);
    if (piece.t) {
      const auto moved = piece.t->template apply<S>(g, part);
      out.insert(out.end(), moved.begin(), moved.end());
    } else {
      out.insert(out.end(), part.begin(), part.end());
    }
    c += piece.width;
  }
  return out;
}

ParamTransport from_pieces(std::vector<Piece> pieces) {
  std::size_t dim = 0;
  bool exact = true;
  for (const auto& piece : pieces) {
    dim += piece.width;
    if (piece.t) exact = exact && piece.t->exact();
  }
  ParamTransport::RealFn real = [pieces](std::size_t g, std::span<const double> t) {
    return apply_pieces<double>(pieces, g, t);
  };
  ParamTransport::ExactFn ex;
  if (exact)
    ex = [pieces](std::size_t g, std::span<const Rational> t) { return apply_pieces<Rational>(pieces, g, t); };
  return ParamTransport(dim, std::move(real), std::move(ex));
}

template <class S>
bool flag_of(const S& x) {
  if (x == S(0)) return false;
  if (x == S(1)) return true;
  throw Error(ErrorCode::InvalidArgument, "flag coordinate must be 0 or 1");
}

// (a1 theta1, (l ? a3 : a1) theta2, a3 theta3, l), or with a shared
// transport when a1 and a3 coincide.
ParamTransport super_transport(const ParamTransport& a1, const ParamTransport& a3, bool restricted) {
  const std::size_t d = a1.dimension();
  const bool exact = a1.exact() && a3.exact();
  auto apply = [a1, a3, d, restricted](std::size_t g, auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    const std::size_t blocks = restricted ? 2 : 3;
    const bool right = flag_of(theta[blocks * d]);
    std::vector<S> out;
    auto push = [&](const ParamTransport& t, std::size_t block) {
      const auto moved = t.template apply<S>(g, theta.subspan(block * d, d));
      out.insert(out.end(), moved.begin(), moved.end());
    };
    push(a1, 0);
    push(right ? a3 : a1, 1);
    if (!restricted) push(a3, 2);
    out.push_back(theta[blocks * d]);
    return out;
  };
  ParamTransport::RealFn real = [apply](std::size_t g, std::span<const double> t) { return apply(g, t); };
  ParamTransport::ExactFn ex;
  if (exact) ex = [apply](std::size_t g, std::span<const Rational> t) { return apply(g, t); };
  return ParamTransport((restricted ? 2 : 3) * d + 1, std::move(real), std::move(ex));
}

void expect(const std::vector<ParamTransport>& c, std::size_t n, Variant v) {
  if (c.size() != n)
    throw Error(ErrorCode::InvalidArgument, std::string(to_string(v)) + " needs " + std::to_string(n) + " transports");
}

}  // namespace

ParamTransport combined_transport(Variant variant, const std::vector<ParamTransport>& c) {
  switch (variant) {
    case Variant::MetaStar:
    case Variant::RestrictedLower:
      expect(c, 1, variant);
      return c[0];
    case Variant::Lower:
      expect(c, 2, variant);
      return from_pieces({{c[0].dimension(), c[0]}, {c[1].dimension(), c[1]}});
    case Variant::Upper:
      expect(c, 2, variant);
      return from_pieces({{c[0].dimension(), c[0]}, {c[1].dimension(), c[1]}, {1, std::nullopt}});
    case Variant::RestrictedUpper:
      expect(c, 1, variant);
      return from_pieces({{c[0].dimension(), c[0]}, {1, std::nullopt}});
    case Variant::Super:
      expect(c, 2, variant);
      if (c[0].dimension() != c[1].dimension())
        throw Error(ErrorCode::InvalidArgument, "super combination transports need equal dimensions");
      return super_transport(c[0], c[1], false);
    case Variant::RestrictedSuper:
      expect(c, 1, variant);
      return super_transport(c[0], c[0], true);
    case Variant::StructuredSuper:
      expect(c, 3, variant);
      return from_pieces({{c[0].dimension(), c[0]}, {c[1].dimension(), c[1]}, {c[2].dimension(), c[2]}});
  }
  throw Error(ErrorCode::UnknownVariant, "unknown combination variant");
}

}  // namespace mcomb
