#include "markovcomb/parametric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

namespace mcomb {

RealPoint to_real(std::span<const Rational> point) {
  RealPoint out(point.size());
  for (std::size_t n = 0; n < point.size(); ++n) out[n] = point[n].to_double();
  return out;
}

namespace {

template <class S>
std::string point_str(std::span<const S> theta) {
  std::ostringstream os;
  os << '(';
  for (std::size_t n = 0; n < theta.size(); ++n) {
    if (n) os << ", ";
    if constexpr (std::is_same_v<S, double>) {
      os << theta[n];
    } else {
      os << theta[n].str();
    }
  }
  os << ')';
  return os.str();
}

// Codomain positions of q matching p's metacategories in p's order.
std::vector<std::size_t> right_meta_positions(const CategoryMapping& p, const CategoryMapping& q) {
  if (!p.codomain().same_elements(q.codomain()))
    throw Error(ErrorCode::CodomainMismatch, "category mappings have different metacategories");
  std::vector<std::size_t> out(p.codomain().size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = q.codomain().position(p.codomain()[k]);
  return out;
}

// Builds a model whose exact evaluator exists only if requested.
template <class F>
ParametricModel make_model(CategorySet index, ParamBox box, bool exact, F f) {
  ParametricModel::RealFn real = [f](std::span<const double> t) { return f(t); };
  ParametricModel::ExactFn ex;
  if (exact) ex = [f](std::span<const Rational> t) { return f(t); };
  return ParametricModel(std::move(index), std::move(box), std::move(real), std::move(ex));
}

template <class S>
std::span<const S> slice(std::span<const S> theta, std::size_t first, std::size_t count) {
  return theta.subspan(first, count);
}

template <class S>
bool agree(const std::vector<S>& fm, const std::vector<S>& gm, const std::vector<std::size_t>& gpos, double tol,
           bool exact, double* worst = nullptr) {
  double w = 0.0;
  bool ok = true;
  for (std::size_t k = 0; k < fm.size(); ++k) {
    if constexpr (std::is_same_v<S, Rational>) {
      if (exact) {
        if (fm[k] != gm[gpos[k]]) ok = false;
        w = std::max(w, detail::gap(fm[k], gm[gpos[k]]));
        continue;
      }
    }
    const double d = detail::gap(fm[k], gm[gpos[k]]);
    w = std::max(w, d);
    if (!(d <= tol)) ok = false;
  }
  if (worst) *worst = w;
  return ok;
}

template <class S>
bool flag_value(const S& flag) {
  if (flag == S(0)) return false;
  if (flag == S(1)) return true;
  throw Error(ErrorCode::InvalidArgument, "flag coordinate must be 0 or 1");
}

// f_i/f_M,k(.) * mid_k * g_j/g_M,k(.) with mid in p's codomain order.
template <class S>
std::vector<S> super_values(const std::vector<S>& f1, const std::vector<S>& mid, const std::vector<S>& g3,
                            const ProductIndex& prod, ZeroPolicy policy) {
  const auto fm = detail::aggregate_values<S>(std::span<const S>(f1), prod.left());
  const auto gm = detail::aggregate_values<S>(std::span<const S>(g3), prod.right());
  std::vector<S> out(prod.size(), S(0));
  for (std::size_t k = 0; k < prod.meta().size(); ++k) {
    const S& fd = fm[k];
    const S& gd = gm[prod.right_meta(k)];
    if (fd == S(0) || gd == S(0)) {
      if (policy == ZeroPolicy::Strict) detail::throw_zero_aggregate(prod, k);
      continue;
    }
    const auto [first, last] = prod.block(k);
    for (std::size_t n = first; n < last; ++n) {
      const auto& t = prod.triples()[n];
      out[n] = f1[t.i] / fd * mid[k] * (g3[t.j] / gd);
    }
  }
  return out;
}

ParamBox tail_box(const ParamBox& box, std::size_t from) {
  std::vector<Interval> coords(box.coords().begin() + static_cast<std::ptrdiff_t>(from), box.coords().end());
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& g : box.simplex_groups()) {
    if (g.empty() || g.front() < from) continue;
    std::vector<std::size_t> shifted;
    for (auto c : g) shifted.push_back(c - from);
    groups.push_back(std::move(shifted));
  }
  return ParamBox(std::move(coords), std::move(groups));
}

void require_same_box(const ParametricModel& f, const ParametricModel& g) {
  if (!(f.box() == g.box()))
    throw Error(ErrorCode::InvalidArgument, "this combination needs both models on the same parameter box");
}

void require_domains(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                     const CategoryMapping& q) {
  if (!(f.index() == p.domain())) throw Error(ErrorCode::IndexMismatch, "first model index differs from p's domain");
  if (!(g.index() == q.domain())) throw Error(ErrorCode::IndexMismatch, "second model index differs from q's domain");
}

std::vector<std::size_t> iota_vec(std::size_t first, std::size_t count) {
  std::vector<std::size_t> v(count);
  std::iota(v.begin(), v.end(), first);
  return v;
}

std::vector<std::size_t> primes(std::size_t count) {
  std::vector<std::size_t> out;
  for (std::size_t c = 2; out.size() < count; ++c) {
    bool prime = true;
    for (auto p : out) {
      if (p * p > c) break;
      if (c % p == 0) { prime = false; break; }
    }
    if (prime) out.push_back(c);
  }
  return out;
}

Rational radical_inverse(std::size_t n, std::size_t base) {
  Rational result;
  Rational scale(1, static_cast<std::int64_t>(base));
  const Rational step(1, static_cast<std::int64_t>(base));
  while (n > 0) {
    result += Rational(static_cast<std::int64_t>(n % base)) * scale;
    scale *= step;
    n /= base;
  }
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------

ParamBox::ParamBox(std::vector<Interval> coords, std::vector<std::vector<std::size_t>> simplex_groups)
    : coords_(std::move(coords)), groups_(std::move(simplex_groups)) {
  for (const auto& c : coords_)
    if (c.lo > c.hi) throw Error(ErrorCode::InvalidArgument, "interval with lower bound above upper bound");
  std::vector<bool> used(coords_.size(), false);
  for (const auto& g : groups_)
    for (auto c : g) {
      if (c >= coords_.size() || used[c])
        throw Error(ErrorCode::InvalidArgument, "simplex groups must be disjoint and inside the box");
      if (coords_[c].lo != Rational(0) || coords_[c].hi != Rational(1) || coords_[c].binary)
        throw Error(ErrorCode::InvalidArgument, "simplex group coordinates must range over [0, 1]");
      used[c] = true;
    }
}

ParamBox ParamBox::unit(std::size_t dimension) {
  return ParamBox(std::vector<Interval>(dimension, Interval{Rational(0), Rational(1)}));
}

ParamBox ParamBox::flag() { return ParamBox({Interval{Rational(0), Rational(1), true}}); }

bool ParamBox::contains(std::span<const double> theta, double slack) const {
  if (theta.size() != coords_.size()) return false;
  for (std::size_t n = 0; n < theta.size(); ++n) {
    const double x = theta[n];
    if (!std::isfinite(x)) return false;
    if (coords_[n].binary) {
      if (x != 0.0 && x != 1.0) return false;
      continue;
    }
    if (x < coords_[n].lo.to_double() - slack || x > coords_[n].hi.to_double() + slack) return false;
  }
  for (const auto& g : groups_) {
    double s = 0.0;
    for (auto c : g) s += theta[c];
    if (s > 1.0 + slack) return false;
  }
  return true;
}

bool ParamBox::contains(std::span<const Rational> theta) const {
  if (theta.size() != coords_.size()) return false;
  for (std::size_t n = 0; n < theta.size(); ++n) {
    if (coords_[n].binary) {
      if (theta[n] != Rational(0) && theta[n] != Rational(1)) return false;
      continue;
    }
    if (theta[n] < coords_[n].lo || theta[n] > coords_[n].hi) return false;
  }
  for (const auto& g : groups_) {
    Rational s;
    for (auto c : g) s += theta[c];
    if (s > Rational(1)) return false;
  }
  return true;
}

ParamBox concat(const ParamBox& a, const ParamBox& b) {
  std::vector<Interval> coords = a.coords();
  coords.insert(coords.end(), b.coords().begin(), b.coords().end());
  auto groups = a.simplex_groups();
  for (const auto& g : b.simplex_groups()) {
    std::vector<std::size_t> shifted;
    for (auto c : g) shifted.push_back(c + a.dimension());
    groups.push_back(std::move(shifted));
  }
  return ParamBox(std::move(coords), std::move(groups));
}

std::vector<ExactPoint> halton_points(const ParamBox& box, std::size_t count, std::size_t skip) {
  const std::size_t d = box.dimension();
  const auto bases = primes(d);
  std::vector<int> group_of(d, -1);
  for (std::size_t g = 0; g < box.simplex_groups().size(); ++g)
    for (auto c : box.simplex_groups()[g]) group_of[c] = static_cast<int>(g);

  std::vector<ExactPoint> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t n = skip + t + 1;
    ExactPoint u(d);
    for (std::size_t c = 0; c < d; ++c) u[c] = radical_inverse(n, bases[c]);
    ExactPoint point(d);
    for (std::size_t c = 0; c < d; ++c) {
      const auto& iv = box.coords()[c];
      if (iv.binary) {
        point[c] = u[c] >= Rational(1, 2) ? Rational(1) : Rational(0);
      } else if (group_of[c] < 0) {
        point[c] = iv.lo + (iv.hi - iv.lo) * u[c];
      }
    }
    for (const auto& g : box.simplex_groups()) {
      Rational remaining(1);
      for (auto c : g) {
        point[c] = remaining * u[c];
        remaining -= point[c];
      }
    }
    out.push_back(std::move(point));
  }
  return out;
}

std::vector<ExactPoint> uniform_grid(const ParamBox& box, std::size_t steps) {
  if (steps == 0) throw Error(ErrorCode::InvalidArgument, "grid needs at least one step");
  const std::size_t d = box.dimension();
  std::vector<std::vector<Rational>> axes(d);
  for (std::size_t c = 0; c < d; ++c) {
    const auto& iv = box.coords()[c];
    if (iv.binary) {
      axes[c] = {Rational(0), Rational(1)};
      continue;
    }
    for (std::size_t s = 0; s <= steps; ++s)
      axes[c].push_back(iv.lo + (iv.hi - iv.lo) * Rational(static_cast<std::int64_t>(s), static_cast<std::int64_t>(steps)));
  }
  std::vector<ExactPoint> out;
  std::vector<std::size_t> counter(d, 0);
  while (true) {
    ExactPoint point(d);
    for (std::size_t c = 0; c < d; ++c) point[c] = axes[c][counter[c]];
    if (box.contains(std::span<const Rational>(point))) out.push_back(std::move(point));
    std::size_t c = 0;
    while (c < d && ++counter[c] == axes[c].size()) counter[c++] = 0;
    if (c == d) break;
  }
  return out;
}

std::vector<Rational> snap_values(std::span<const double> raw) {
  std::vector<Rational> out;
  out.reserve(raw.size());
  const Rational radius = Rational::from_double(tolerance::snap);
  for (double x : raw) {
    // Doubles an ulp apart land on the same rational. The continued-fraction
    // cap only applies when nothing simple is that close.
    Rational r;
    if (x >= 0 && std::isfinite(x)) {
      const Rational exact = Rational::from_double(x);
      r = Rational::simplest_between(x > tolerance::snap ? exact - radius : Rational(0), exact + radius);
    }
    if (!(x >= 0 && std::isfinite(x)) || !r.denominator_at_most(tolerance::snap_denominator))
      r = Rational::approximate(x, tolerance::snap_denominator);
    out.push_back(std::move(r));
  }
  return out;
}

ParametricModel::ParametricModel(CategorySet index, ParamBox box, RealFn real, ExactFn exact)
    : index_(std::move(index)), box_(std::move(box)), real_(std::move(real)), exact_(std::move(exact)) {
  if (!real_) throw Error(ErrorCode::InvalidArgument, "a model needs a double evaluator");
}

Evaluation snap_to_dist(const CategorySet& index, std::vector<double> raw) {
  if (raw.size() != index.size())
    throw Error(ErrorCode::IndexMismatch, "evaluator returned the wrong number of entries");
  double total = 0.0;
  std::vector<double> clamped(raw.size());
  for (std::size_t n = 0; n < raw.size(); ++n) {
    if (!std::isfinite(raw[n])) throw Error(ErrorCode::NotNormalized, "non-finite entry for '" + index[n] + "'");
    if (raw[n] < -tolerance::neg)
      throw Error(ErrorCode::NegativeEntry, "entry for '" + index[n] + "' is negative");
    clamped[n] = std::max(raw[n], 0.0);
    total += clamped[n];
  }
  if (std::abs(total - 1.0) > tolerance::norm)
    throw Error(ErrorCode::NotNormalized, "entries sum to " + std::to_string(total));
  auto snapped = snap_values(clamped);
  Rational sum;
  for (const auto& s : snapped) sum += s;
  if (sum.is_zero()) throw Error(ErrorCode::NotNormalized, "all entries snap to zero");
  double err = 0.0;
  for (std::size_t n = 0; n < snapped.size(); ++n) {
    if (sum != Rational(1)) snapped[n] /= sum;
    err = std::max(err, std::abs(snapped[n].to_double() - raw[n]));
  }
  return Evaluation{Dist(index, std::move(snapped)), std::move(raw), err};
}

Evaluation eval(const ParametricModel& m, std::span<const double> theta) {
  if (theta.size() != m.dimension())
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(m.dimension()) + " parameters");
  if (!m.box().contains(theta)) throw Error(ErrorCode::OutOfBox, "parameter " + point_str(theta) + " outside the box");
  return snap_to_dist(m.index(), m.values<double>(theta));
}

Dist eval_exact(const ParametricModel& m, std::span<const Rational> theta) {
  if (theta.size() != m.dimension())
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(m.dimension()) + " parameters");
  if (!m.box().contains(theta)) throw Error(ErrorCode::OutOfBox, "parameter " + point_str(theta) + " outside the box");
  if (!m.exact()) return eval(m, to_real(theta)).dist;
  auto v = m.values<Rational>(theta);
  if (v.size() != m.index().size()) throw Error(ErrorCode::IndexMismatch, "evaluator returned the wrong number of entries");
  Rational sum;
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (v[n].sign() < 0) {
      if (v[n].to_double() < -tolerance::neg)
        throw Error(ErrorCode::NegativeEntry, "entry for '" + m.index()[n] + "' is negative");
      v[n] = Rational(0);
    }
    sum += v[n];
  }
  if (sum != Rational(1)) {
    if (std::abs(sum.to_double() - 1.0) > tolerance::norm)
      throw Error(ErrorCode::NotNormalized, "entries sum to " + sum.str());
    for (auto& x : v) x /= sum;
  }
  return Dist(m.index(), std::move(v));
}

ParametricModel embed(const ParametricModel& m, ParamBox outer, std::vector<std::size_t> coords) {
  if (coords.size() != m.dimension()) throw Error(ErrorCode::InvalidArgument, "coordinate selection has wrong size");
  for (auto c : coords)
    if (c >= outer.dimension()) throw Error(ErrorCode::InvalidArgument, "selected coordinate outside the outer box");
  return make_model(m.index(), std::move(outer), m.exact(), [m, coords](auto theta) {
    using S = typename decltype(theta)::value_type;
    std::vector<S> sub(coords.size());
    for (std::size_t n = 0; n < coords.size(); ++n) sub[n] = theta[coords[n]];
    return m.template values<std::remove_const_t<S>>(std::span<const std::remove_const_t<S>>(sub));
  });
}

ParametricModel aggregate_model(const ParametricModel& m, const CategoryMapping& p) {
  if (!(m.index() == p.domain())) throw Error(ErrorCode::IndexMismatch, "model index differs from the mapping domain");
  return make_model(p.codomain(), m.box(), m.exact(), [m, p](auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    const auto v = m.template values<S>(theta);
    return detail::aggregate_values<S>(std::span<const S>(v), p);
  });
}

// --- built-in models -------------------------------------------------------

ParametricModel saturated(const CategorySet& index) {
  if (index.empty()) throw Error(ErrorCode::InvalidArgument, "saturated model needs a category");
  const std::size_t d = index.size() - 1;
  std::vector<std::vector<std::size_t>> groups;
  if (d > 0) groups.push_back(iota_vec(0, d));
  ParamBox box(std::vector<Interval>(d, Interval{Rational(0), Rational(1)}), std::move(groups));
  return ParametricModel::generic(index, std::move(box), [d](auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    std::vector<S> out(d + 1);
    S rest(1);
    for (std::size_t n = 0; n < d; ++n) {
      out[n + 1] = theta[n];
      rest -= theta[n];
    }
    out[0] = rest;
    return out;
  });
}

ParametricModel binomial(int n) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "binomial size must be non-negative");
  std::vector<std::int64_t> coef(static_cast<std::size_t>(n) + 1, 1);
  for (int i = 1; i <= n; ++i) coef[static_cast<std::size_t>(i)] = coef[static_cast<std::size_t>(i - 1)] * (n - i + 1) / i;
  return ParametricModel::generic(CategorySet::range(static_cast<std::size_t>(n) + 1), ParamBox::unit(1),
                                  [n, coef](auto theta) {
                                    using S = std::remove_const_t<typename decltype(theta)::value_type>;
                                    std::vector<S> out(static_cast<std::size_t>(n) + 1);
                                    const S t = theta[0];
                                    const S u = S(1) - t;
                                    for (int i = 0; i <= n; ++i)
                                      out[static_cast<std::size_t>(i)] =
                                          S(coef[static_cast<std::size_t>(i)]) * detail::ipow(t, i) * detail::ipow(u, n - i);
                                    return out;
                                  });
}

ParametricModel constant_model(const Dist& d) {
  std::vector<double> real(d.size());
  for (std::size_t n = 0; n < d.size(); ++n) real[n] = d[n].to_double();
  const auto exact = d.entries();
  return ParametricModel(
      d.index(), ParamBox(), [real](std::span<const double>) { return real; },
      [exact](std::span<const Rational>) { return exact; });
}

ParametricModel model_lift(const CategoryMapping& p, const ParametricModel& h) {
  if (!h.index().same_elements(p.codomain()))
    throw Error(ErrorCode::IndexMismatch, "model index differs from the mapping codomain");
  const std::size_t hd = h.dimension();
  std::vector<std::size_t> hpos(p.codomain().size());
  for (std::size_t k = 0; k < hpos.size(); ++k) hpos[k] = h.index().position(p.codomain()[k]);

  std::size_t lambda_dim = 0;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> offset(p.codomain().size());
  for (std::size_t k = 0; k < p.codomain().size(); ++k) {
    offset[k] = lambda_dim;
    const std::size_t free = p.fiber_positions(k).size() - 1;
    if (free > 0) groups.push_back(iota_vec(lambda_dim, free));
    lambda_dim += free;
  }
  ParamBox lambda_box(std::vector<Interval>(lambda_dim, Interval{Rational(0), Rational(1)}), std::move(groups));

  return make_model(p.domain(), concat(h.box(), lambda_box), h.exact(), [p, h, hd, hpos, offset](auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    const auto hv = h.template values<S>(theta.subspan(0, hd));
    const auto lambda = theta.subspan(hd);
    std::vector<S> out(p.domain().size(), S(0));
    for (std::size_t k = 0; k < p.codomain().size(); ++k) {
      const auto& fib = p.fiber_positions(k);
      S first(1);
      for (std::size_t n = 1; n < fib.size(); ++n) {
        out[fib[n]] = lambda[offset[k] + n - 1] * hv[hpos[k]];
        first -= lambda[offset[k] + n - 1];
      }
      out[fib[0]] = first * hv[hpos[k]];
    }
    return out;
  });
}

ExactPoint saturated_preimage(const Dist& target) {
  return ExactPoint(target.entries().begin() + 1, target.entries().end());
}

ExactPoint lift_preimage(const CategoryMapping& p, std::span<const Rational> h_theta, const Dist& target) {
  if (!(target.index() == p.domain())) throw Error(ErrorCode::IndexMismatch, "target index differs from p's domain");
  ExactPoint out(h_theta.begin(), h_theta.end());
  const auto agg = aggregate(target.vector(), p);
  for (std::size_t k = 0; k < p.codomain().size(); ++k) {
    const auto& fib = p.fiber_positions(k);
    for (std::size_t n = 1; n < fib.size(); ++n)
      out.push_back(agg[k].is_zero() ? Rational(0) : target[fib[n]] / agg[k]);
  }
  return out;
}

SaturatedPair consistent_saturated_pair(const CategoryMapping& p, const CategoryMapping& q) {
  if (!p.codomain().same_elements(q.codomain()))
    throw Error(ErrorCode::CodomainMismatch, "category mappings have different metacategories");
  const auto h = saturated(p.codomain());
  const auto f_lift = model_lift(p, h);
  const auto g_lift = model_lift(q, h);
  SaturatedPair out;
  out.h_dim = h.dimension();
  out.lambda_dim = f_lift.dimension() - out.h_dim;
  out.mu_dim = g_lift.dimension() - out.h_dim;
  out.box = concat(f_lift.box(), tail_box(g_lift.box(), out.h_dim));
  out.f = embed(f_lift, out.box, iota_vec(0, out.h_dim + out.lambda_dim));
  auto gcoords = iota_vec(0, out.h_dim);
  for (auto c : iota_vec(out.h_dim + out.lambda_dim, out.mu_dim)) gcoords.push_back(c);
  out.g = embed(g_lift, out.box, std::move(gcoords));
  return out;
}

ExactPoint pure_mixture_coordinates(const CategoryMapping& p, const CategoryMapping& q, const Dist& f,
                                    const Dist& g) {
  if (!is_consistent(f.vector(), g.vector(), p, q))
    throw Error(ErrorCode::NotConsistent, "pure-mixture coordinates need a consistent pair");
  const Dist h = aggregate(f, p);
  const ExactPoint h_theta = saturated_preimage(h);
  ExactPoint out = lift_preimage(p, h_theta, f);
  const ExactPoint mu = lift_preimage(q, h_theta, g);
  out.insert(out.end(), mu.begin() + static_cast<std::ptrdiff_t>(h_theta.size()), mu.end());
  return out;
}

ExpFamDimension expfam_combination_dim(const CategoryMapping& p, const CategoryMapping& q) {
  const auto prod = mapping_product(p, q);
  return {p.domain().size() + q.domain().size() - p.codomain().size() - 1, prod.size() - 1};
}

JacobianRank jacobian_rank(const ParametricModel& m, std::span<const double> theta, double tol, double step) {
  const std::size_t d = m.dimension();
  const std::size_t n = m.index().size();
  if (theta.size() != d) throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(d) + " parameters");
  if (d == 0 || n == 0) return {};
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  RealPoint x(theta.begin(), theta.end());
  for (std::size_t c = 0; c < d; ++c) {
    RealPoint plus = x, minus = x;
    plus[c] += step;
    minus[c] -= step;
    const auto fp = m.values<double>(plus);
    const auto fm = m.values<double>(minus);
    for (std::size_t r = 0; r < n; ++r)
      jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (fp[r] - fm[r]) / (2.0 * step);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  JacobianRank out;
  for (Eigen::Index s = 0; s < svd.singularValues().size(); ++s) {
    const double v = svd.singularValues()(s);
    out.singular_values.push_back(v);
    if (v > tol) ++out.rank;
  }
  return out;
}

// --- combinations ----------------------------------------------------------

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::MetaStar: return "meta-star";
    case Variant::Lower: return "lower";
    case Variant::RestrictedLower: return "restricted-lower";
    case Variant::Upper: return "upper";
    case Variant::RestrictedUpper: return "restricted-upper";
    case Variant::Super: return "super";
    case Variant::RestrictedSuper: return "restricted-super";
    case Variant::StructuredSuper: return "structured-super";
  }
  return "unknown";
}

Variant variant_from_string(std::string_view name) {
  for (auto v : {Variant::MetaStar, Variant::Lower, Variant::RestrictedLower, Variant::Upper, Variant::RestrictedUpper,
                 Variant::Super, Variant::RestrictedSuper, Variant::StructuredSuper})
    if (to_string(v) == name) return v;
  throw Error(ErrorCode::UnknownVariant, "unknown combination variant '" + std::string(name) + "'");
}

MetaConsistencyReport is_meta_consistent(const ParametricModel& f, const ParametricModel& g,
                                         const CategoryMapping& p, const CategoryMapping& q,
                                         std::span<const ExactPoint> points, double tol) {
  require_domains(f, g, p, q);
  if (f.dimension() != g.dimension())
    throw Error(ErrorCode::InvalidArgument, "meta-consistency needs a shared parameter space");
  const auto gpos = right_meta_positions(p, q);
  const bool exact = f.exact() && g.exact();
  MetaConsistencyReport report;
  for (const auto& point : points) {
    double worst = 0.0;
    bool ok;
    if (exact) {
      const auto fv = f.values<Rational>(point);
      const auto gv = g.values<Rational>(point);
      ok = agree(detail::aggregate_values<Rational>(fv, p), detail::aggregate_values<Rational>(gv, q), gpos, tol, true,
                 &worst);
      ok = ok || worst <= tol;
    } else {
      const auto x = to_real(point);
      const auto fv = f.values<double>(x);
      const auto gv = g.values<double>(x);
      ok = agree(detail::aggregate_values<double>(fv, p), detail::aggregate_values<double>(gv, q), gpos, tol, false,
                 &worst);
    }
    if (worst > report.worst_gap || (report.worst_point.empty() && !ok)) {
      report.worst_gap = worst;
      report.worst_point = point;
    }
    if (!ok) report.consistent = false;
  }
  return report;
}

MetaConsistencyReport is_meta_consistent(const ParametricModel& f, const ParametricModel& g,
                                         const CategoryMapping& p, const CategoryMapping& q, double tol) {
  const auto points = halton_points(f.box(), 64);
  return is_meta_consistent(f, g, p, q, points, tol);
}

namespace {

// Pointwise Markov combination of two models read from the same theta;
// raises `code` when the evaluations are not consistent.
ParametricModel pointwise_star(const ParametricModel& f, const ParametricModel& g, const ProductIndex& prod,
                               double tol, ZeroPolicy policy, ErrorCode code) {
  const auto gpos = right_meta_positions(prod.left(), prod.right());
  const bool exact = f.exact() && g.exact();
  return make_model(prod.categories(), f.box(), exact, [f, g, prod, gpos, tol, policy, exact, code](auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    const auto fv = f.template values<S>(theta);
    const auto gv = g.template values<S>(theta);
    const auto fm = detail::aggregate_values<S>(std::span<const S>(fv), prod.left());
    const auto gm = detail::aggregate_values<S>(std::span<const S>(gv), prod.right());
    if (!agree(fm, gm, gpos, tol, exact))
      throw Error(code, "evaluations are not consistent at " + point_str(theta));
    return detail::combine_values<S>(fv, gv, prod, detail::Denominator::Left, policy);
  });
}

}  // namespace

CombinedModel meta_star(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                        const CategoryMapping& q, MetaOptions opts) {
  require_domains(f, g, p, q);
  require_same_box(f, g);
  const auto points = halton_points(f.box(), opts.sample_points);
  const auto report = is_meta_consistent(f, g, p, q, points, opts.tol);
  if (!report.consistent) {
    std::span<const Rational> w(report.worst_point);
    throw Error(ErrorCode::NotMetaConsistent,
                "aggregates differ by " + std::to_string(report.worst_gap) + " at " + point_str(w));
  }
  CombinedModel c;
  c.variant = Variant::MetaStar;
  c.index = mapping_product(p, q);
  c.components = {f, g};
  c.model = pointwise_star(f, g, c.index, opts.tol, opts.zero_policy, ErrorCode::NotMetaConsistent);
  return c;
}

bool lower_admissible(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                      const CategoryMapping& q, std::span<const Rational> theta1, std::span<const Rational> theta2,
                      double tol) {
  const auto gpos = right_meta_positions(p, q);
  const bool exact = f.exact() && g.exact();
  const auto fv = f.values<Rational>(theta1);
  const auto gv = g.values<Rational>(theta2);
  return agree(detail::aggregate_values<Rational>(fv, p), detail::aggregate_values<Rational>(gv, q), gpos, tol, exact);
}

CombinedModel lower_combine(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                            const CategoryMapping& q, double tol) {
  require_domains(f, g, p, q);
  CombinedModel c;
  c.variant = Variant::Lower;
  c.index = mapping_product(p, q);
  c.components = {f, g};
  const auto gpos = right_meta_positions(p, q);
  const bool exact = f.exact() && g.exact();
  const std::size_t fd = f.dimension(), gd = g.dimension();
  const auto& prod = c.index;
  c.model = make_model(prod.categories(), concat(f.box(), g.box()), exact,
                       [f, g, prod, gpos, tol, exact, fd, gd](auto theta) {
                         using S = std::remove_const_t<typename decltype(theta)::value_type>;
                         const auto fv = f.template values<S>(theta.subspan(0, fd));
                         const auto gv = g.template values<S>(theta.subspan(fd, gd));
                         const auto fm = detail::aggregate_values<S>(std::span<const S>(fv), prod.left());
                         const auto gm = detail::aggregate_values<S>(std::span<const S>(gv), prod.right());
                         if (!agree(fm, gm, gpos, tol, exact))
                           throw Error(ErrorCode::InconsistentPair,
                                       "f(theta_1) and g(theta_2) are not consistent at " + point_str(theta));
                         return detail::combine_values<S>(fv, gv, prod, detail::Denominator::Left, ZeroPolicy::Strict);
                       });
  return c;
}

CombinedModel restricted_lower(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                               const CategoryMapping& q, std::span<const ExactPoint> grid, double tol) {
  require_domains(f, g, p, q);
  require_same_box(f, g);
  CombinedModel c;
  c.variant = Variant::RestrictedLower;
  c.index = mapping_product(p, q);
  c.components = {f, g};
  for (const auto& point : grid) {
    if (!f.box().contains(std::span<const Rational>(point))) continue;
    if (lower_admissible(f, g, p, q, point, point, tol)) c.admissible.push_back(point);
  }
  if (c.admissible.empty())
    throw Error(ErrorCode::EmptyParameterSet, "no grid point gives consistent evaluations");
  c.model = pointwise_star(f, g, c.index, tol, ZeroPolicy::Strict, ErrorCode::InconsistentPair);
  return c;
}

CombinedModel upper_combine(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                            const CategoryMapping& q, CombineOptions opts) {
  require_domains(f, g, p, q);
  CombinedModel c;
  c.variant = Variant::Upper;
  c.index = mapping_product(p, q);
  c.components = {f, g};
  const std::size_t fd = f.dimension(), gd = g.dimension();
  const auto& prod = c.index;
  c.model = make_model(prod.categories(), concat(concat(f.box(), g.box()), ParamBox::flag()), f.exact() && g.exact(),
                       [f, g, prod, fd, gd, opts](auto theta) {
                         using S = std::remove_const_t<typename decltype(theta)::value_type>;
                         const bool right = flag_value(theta[fd + gd]);
                         const auto fv = f.template values<S>(theta.subspan(0, fd));
                         const auto gv = g.template values<S>(theta.subspan(fd, gd));
                         return detail::combine_values<S>(
                             fv, gv, prod, right ? detail::Denominator::Right : detail::Denominator::Left,
                             opts.zero_policy);
                       });
  return c;
}

CombinedModel restricted_upper(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                               const CategoryMapping& q, CombineOptions opts) {
  require_domains(f, g, p, q);
  require_same_box(f, g);
  CombinedModel c;
  c.variant = Variant::RestrictedUpper;
  c.index = mapping_product(p, q);
  c.components = {f, g};
  const std::size_t d = f.dimension();
  const auto& prod = c.index;
  c.model = make_model(prod.categories(), concat(f.box(), ParamBox::flag()), f.exact() && g.exact(),
                       [f, g, prod, d, opts](auto theta) {
                         using S = std::remove_const_t<typename decltype(theta)::value_type>;
                         const bool right = flag_value(theta[d]);
                         const auto fv = f.template values<S>(theta.subspan(0, d));
                         const auto gv = g.template values<S>(theta.subspan(0, d));
                         return detail::combine_values<S>(
                             fv, gv, prod, right ? detail::Denominator::Right : detail::Denominator::Left,
                             opts.zero_policy);
                       });
  return c;
}

namespace {

template <class S>
std::vector<S> reorder_to_left_meta(const std::vector<S>& gm, const ProductIndex& prod) {
  std::vector<S> out(prod.meta().size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = gm[prod.right_meta(k)];
  return out;
}

}  // namespace

CombinedModel super_combine(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                            const CategoryMapping& q, CombineOptions opts) {
  require_domains(f, g, p, q);
  require_same_box(f, g);
  CombinedModel c;
  c.variant = Variant::Super;
  c.index = mapping_product(p, q);
  c.components = {f, g};
  const std::size_t d = f.dimension();
  const auto& prod = c.index;
  c.model = make_model(prod.categories(), concat(concat(concat(f.box(), f.box()), f.box()), ParamBox::flag()),
                       f.exact() && g.exact(), [f, g, prod, d, opts](auto theta) {
                         using S = std::remove_const_t<typename decltype(theta)::value_type>;
                         const bool right = flag_value(theta[3 * d]);
                         const auto f1 = f.template values<S>(theta.subspan(0, d));
                         const auto g3 = g.template values<S>(theta.subspan(2 * d, d));
                         std::vector<S> mid;
                         if (right) {
                           const auto g2 = g.template values<S>(theta.subspan(d, d));
                           mid = reorder_to_left_meta(detail::aggregate_values<S>(std::span<const S>(g2), prod.right()), prod);
                         } else {
                           const auto f2 = f.template values<S>(theta.subspan(d, d));
                           mid = detail::aggregate_values<S>(std::span<const S>(f2), prod.left());
                         }
                         return super_values<S>(f1, mid, g3, prod, opts.zero_policy);
                       });
  return c;
}

CombinedModel restricted_super(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                               const CategoryMapping& q, CombineOptions opts) {
  require_domains(f, g, p, q);
  require_same_box(f, g);
  CombinedModel c;
  c.variant = Variant::RestrictedSuper;
  c.index = mapping_product(p, q);
  c.components = {f, g};
  const std::size_t d = f.dimension();
  const auto& prod = c.index;
  c.model = make_model(prod.categories(), concat(concat(f.box(), f.box()), ParamBox::flag()), f.exact() && g.exact(),
                       [f, g, prod, d, opts](auto theta) {
                         using S = std::remove_const_t<typename decltype(theta)::value_type>;
                         const bool right = flag_value(theta[2 * d]);
                         const auto f1 = f.template values<S>(theta.subspan(0, d));
                         const auto g1 = g.template values<S>(theta.subspan(0, d));
                         std::vector<S> mid;
                         if (right) {
                           const auto g2 = g.template values<S>(theta.subspan(d, d));
                           mid = reorder_to_left_meta(detail::aggregate_values<S>(std::span<const S>(g2), prod.right()), prod);
                         } else {
                           const auto f2 = f.template values<S>(theta.subspan(d, d));
                           mid = detail::aggregate_values<S>(std::span<const S>(f2), prod.left());
                         }
                         return super_values<S>(f1, mid, g1, prod, opts.zero_policy);
                       });
  return c;
}

CombinedModel structured_super(const ParametricModel& f, const ParametricModel& h, const ParametricModel& g,
                               const CategoryMapping& p, const CategoryMapping& q, CombineOptions opts) {
  require_domains(f, g, p, q);
  if (!h.index().same_elements(p.codomain()))
    throw Error(ErrorCode::IndexMismatch, "metacategory model index differs from M");
  CombinedModel c;
  c.variant = Variant::StructuredSuper;
  c.index = mapping_product(p, q);
  c.components = {f, h, g};
  std::vector<std::size_t> hpos(p.codomain().size());
  for (std::size_t k = 0; k < hpos.size(); ++k) hpos[k] = h.index().position(p.codomain()[k]);
  const std::size_t fd = f.dimension(), hd = h.dimension(), gd = g.dimension();
  const auto& prod = c.index;
  c.model = make_model(prod.categories(), concat(concat(f.box(), h.box()), g.box()), f.exact() && h.exact() && g.exact(),
                       [f, h, g, prod, hpos, fd, hd, gd, opts](auto theta) {
                         using S = std::remove_const_t<typename decltype(theta)::value_type>;
                         const auto f1 = f.template values<S>(theta.subspan(0, fd));
                         const auto h2 = h.template values<S>(theta.subspan(fd, hd));
                         const auto g3 = g.template values<S>(theta.subspan(fd + hd, gd));
                         std::vector<S> mid(hpos.size());
                         for (std::size_t k = 0; k < hpos.size(); ++k) mid[k] = h2[hpos[k]];
                         return super_values<S>(f1, mid, g3, prod, opts.zero_policy);
                       });
  return c;
}

StructuredMarginals structured_marginals(const CombinedModel& c) {
  if (c.variant != Variant::StructuredSuper || c.components.size() != 3)
    throw Error(ErrorCode::InvalidArgument, "marginals need a structured super-Markov combination");
  const auto& f = c.components[0];
  const auto& h = c.components[1];
  const auto& g = c.components[2];
  const auto p = c.index.left();
  const auto q = c.index.right();
  const std::size_t fd = f.dimension(), hd = h.dimension(), gd = g.dimension();
  std::vector<std::size_t> hpos(p.codomain().size());
  for (std::size_t k = 0; k < hpos.size(); ++k) hpos[k] = h.index().position(p.codomain()[k]);
  const auto gpos = right_meta_positions(p, q);

  StructuredMarginals out;
  out.left = make_model(p.domain(), concat(f.box(), h.box()), f.exact() && h.exact(), [f, h, p, hpos, fd, hd](auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    const auto fv = f.template values<S>(theta.subspan(0, fd));
    const auto hv = h.template values<S>(theta.subspan(fd, hd));
    const auto fm = detail::aggregate_values<S>(std::span<const S>(fv), p);
    std::vector<S> out(fv.size());
    for (std::size_t i = 0; i < fv.size(); ++i) {
      const std::size_t k = p.image(i);
      if (fm[k] == S(0)) throw Error(ErrorCode::ZeroAggregate, "aggregate of '" + p.codomain()[k] + "' is zero");
      out[i] = fv[i] / fm[k] * hv[hpos[k]];
    }
    return out;
  });
  out.right = make_model(q.domain(), concat(h.box(), g.box()), h.exact() && g.exact(),
                         [g, h, p, q, hpos, gpos, hd, gd](auto theta) {
                           using S = std::remove_const_t<typename decltype(theta)::value_type>;
                           const auto hv = h.template values<S>(theta.subspan(0, hd));
                           const auto gv = g.template values<S>(theta.subspan(hd, gd));
                           const auto gm = detail::aggregate_values<S>(std::span<const S>(gv), q);
                           // h value per q-codomain position
                           std::vector<S> hq(q.codomain().size());
                           for (std::size_t k = 0; k < gpos.size(); ++k) hq[gpos[k]] = hv[hpos[k]];
                           std::vector<S> out(gv.size());
                           for (std::size_t j = 0; j < gv.size(); ++j) {
                             const std::size_t k = q.image(j);
                             if (gm[k] == S(0))
                               throw Error(ErrorCode::ZeroAggregate, "aggregate of '" + q.codomain()[k] + "' is zero");
                             out[j] = hq[k] * (gv[j] / gm[k]);
                           }
                           return out;
                         });
  out.meta = make_model(p.codomain(), h.box(), h.exact(), [h, hpos](auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    const auto hv = h.template values<S>(theta);
    std::vector<S> out(hpos.size());
    for (std::size_t k = 0; k < hpos.size(); ++k) out[k] = hv[hpos[k]];
    return out;
  });
  return out;
}

// --- mixtures ----------------------------------------------------------------

namespace {

struct MixtureLayout {
  ParamBox box;
  std::vector<std::size_t> f_coords;
  std::vector<std::size_t> g_coords;
  std::size_t lambda = 0;
};

MixtureLayout mixture_layout(const ParametricModel& f, const ParametricModel& g, ParameterSharing sharing) {
  if (!(f.index() == g.index())) throw Error(ErrorCode::IndexMismatch, "mixture components need the same index");
  MixtureLayout l;
  if (sharing == ParameterSharing::Shared) {
    require_same_box(f, g);
    l.box = concat(f.box(), ParamBox::unit(1));
    l.f_coords = iota_vec(0, f.dimension());
    l.g_coords = l.f_coords;
    l.lambda = f.dimension();
  } else {
    l.box = concat(concat(f.box(), g.box()), ParamBox::unit(1));
    l.f_coords = iota_vec(0, f.dimension());
    l.g_coords = iota_vec(f.dimension(), g.dimension());
    l.lambda = f.dimension() + g.dimension();
  }
  return l;
}

std::string fresh_id(const CategorySet& taken, std::string base) {
  while (taken.contains(base)) base += '\'';
  return base;
}

}  // namespace

ParametricModel mixture(const ParametricModel& f, const ParametricModel& g, ParameterSharing sharing) {
  const auto l = mixture_layout(f, g, sharing);
  const auto fe = embed(f, l.box, l.f_coords);
  const auto ge = embed(g, l.box, l.g_coords);
  const std::size_t lam = l.lambda;
  return make_model(f.index(), l.box, f.exact() && g.exact(), [fe, ge, lam](auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    const auto fv = fe.template values<S>(theta);
    const auto gv = ge.template values<S>(theta);
    const S lambda = theta[lam];
    std::vector<S> out(fv.size());
    for (std::size_t i = 0; i < fv.size(); ++i) out[i] = lambda * fv[i] + (S(1) - lambda) * gv[i];
    return out;
  });
}

ParametricModel mixture_via_chain(const ParametricModel& f, const ParametricModel& g, ParameterSharing sharing) {
  const auto l = mixture_layout(f, g, sharing);
  const auto fe = embed(f, l.box, l.f_coords);
  const auto ge = embed(g, l.box, l.g_coords);
  const std::size_t lam = l.lambda;
  const CategorySet& I = f.index();
  const CategorySet two = CategorySet::range(2);

  // f x 2 and g x 2: independence products over a single metacategory.
  const auto prod2 = mapping_product(constant_mapping(I), constant_mapping(two));

  // M1 keeps every lambda f_i and lumps the (1 - lambda) f_i; M2 does the
  // opposite for g.
  const std::string rest = fresh_id(I, "rest");
  std::vector<std::pair<std::string, std::string>> a1, a2;
  for (const auto& t : prod2.triples()) {
    const auto& id = prod2.categories()[a1.size()];
    a1.emplace_back(id, t.j == 0 ? I[t.i] : rest);
    a2.emplace_back(id, t.j == 0 ? rest : I[t.i]);
  }
  const auto m1 = make_mapping(prod2.categories(), a1);
  const auto m2 = make_mapping(prod2.categories(), a2);

  // Both aggregates map onto M3 = {0, 1} with aggregate (lambda, 1 - lambda).
  std::vector<std::pair<std::string, std::string>> b1, b2;
  for (const auto& id : m1.codomain()) b1.emplace_back(id, id == rest ? "1" : "0");
  for (const auto& id : m2.codomain()) b2.emplace_back(id, id == rest ? "0" : "1");
  const auto m3a = make_mapping(m1.codomain(), b1, two);
  const auto m3b = make_mapping(m2.codomain(), b2, two);
  const auto prod3 = mapping_product(m3a, m3b);

  // Pairwise aggregate: (i, rest) and (rest, i) both go to i.
  std::vector<std::size_t> a4;
  for (const auto& t : prod3.triples()) {
    const auto& left = m3a.domain()[t.i];
    const auto& right = m3b.domain()[t.j];
    a4.push_back(I.position(left == rest ? right : left));
  }
  const auto m4 = mapping_from_positions(prod3.categories(), I, std::move(a4));
  const auto gpos = right_meta_positions(m3a, m3b);
  const bool exact = f.exact() && g.exact();

  return make_model(I, l.box, exact, [=](auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    const auto fv = fe.template values<S>(theta);
    const auto gv = ge.template values<S>(theta);
    const std::vector<S> two_v{theta[lam], S(1) - theta[lam]};
    const auto fx2 = detail::combine_values<S>(fv, two_v, prod2, detail::Denominator::Left, ZeroPolicy::Permissive);
    const auto gx2 = detail::combine_values<S>(gv, two_v, prod2, detail::Denominator::Left, ZeroPolicy::Permissive);
    const auto agg1 = detail::aggregate_values<S>(std::span<const S>(fx2), m1);
    const auto agg2 = detail::aggregate_values<S>(std::span<const S>(gx2), m2);
    if (!agree(detail::aggregate_values<S>(std::span<const S>(agg1), m3a),
               detail::aggregate_values<S>(std::span<const S>(agg2), m3b), gpos, tolerance::consistency, exact))
      throw Error(ErrorCode::NotMetaConsistent, "mixture chain components are not consistent");
    const auto combined =
        detail::combine_values<S>(agg1, agg2, prod3, detail::Denominator::Left, ZeroPolicy::Permissive);
    return detail::aggregate_values<S>(std::span<const S>(combined), m4);
  });
}

}  // namespace mcomb
