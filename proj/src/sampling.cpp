#include "markovcomb/sampling.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

namespace mcomb {

namespace {

std::uint64_t key(std::size_t i, std::size_t j) { return (static_cast<std::uint64_t>(i) << 32) | j; }

std::unordered_map<std::uint64_t, std::size_t> pair_positions(const ProductIndex& prod) {
  std::unordered_map<std::uint64_t, std::size_t> out;
  for (std::size_t n = 0; n < prod.size(); ++n) out.emplace(key(prod.triples()[n].i, prod.triples()[n].j), n);
  return out;
}

// Conditional sampler of v over the fiber of k, or none if the fiber has no
// mass.
std::optional<CategoricalSampler> conditional(const std::vector<Rational>& v, const std::vector<std::size_t>& fiber) {
  Rational mass;
  for (auto i : fiber) mass += v[i];
  if (mass.is_zero()) return std::nullopt;
  std::vector<Rational> probs;
  for (auto i : fiber) probs.push_back(v[i] / mass);
  return CategoricalSampler(std::move(probs));
}

std::size_t lookup(const std::unordered_map<std::uint64_t, std::size_t>& pos, const PairDraw& d) {
  auto it = pos.find(key(d.i, d.j));
  if (it == pos.end()) throw Error(ErrorCode::InvalidArgument, "draw is not in I x_M J");
  return it->second;
}

}  // namespace

CategoricalSampler::CategoricalSampler(std::vector<Rational> probabilities) : cumulative_(std::move(probabilities)) {
  if (cumulative_.empty()) throw Error(ErrorCode::EmptyInput, "nothing to sample from");
  for (std::size_t n = 0; n < cumulative_.size(); ++n) {
    if (cumulative_[n].sign() < 0) throw Error(ErrorCode::NegativeEntry, "negative probability");
    if (n) cumulative_[n] += cumulative_[n - 1];
  }
  if (cumulative_.back() != Rational(1)) throw Error(ErrorCode::NotADistribution, "probabilities must sum to 1");
}

std::size_t CategoricalSampler::draw(Rng& rng) const {
  const Rational u(static_cast<std::int64_t>(rng.next() >> 11), std::int64_t{1} << 53);
  // First position whose cumulative sum exceeds u.
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<std::size_t>(it - cumulative_.begin());
}

std::size_t sample_position(const Dist& d, Rng& rng) { return CategoricalSampler(d).draw(rng); }

const std::string& sample_dist(const Dist& d, Rng& rng) { return d.index()[sample_position(d, rng)]; }

// ---------------------------------------------------------------------------

MetaStarSampler::MetaStarSampler(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                                 const CategoryMapping& q, std::span<const Rational> theta)
    : prod_(mapping_product(p, q)),
      first_(eval_exact(f, theta)),
      law_(unit_dist()) {
  if (!(f.index() == p.domain()) || !(g.index() == q.domain()))
    throw Error(ErrorCode::IndexMismatch, "model indexes differ from the mapping domains");
  const Dist fd = eval_exact(f, theta);
  const Dist gd = eval_exact(g, theta);
  const auto fm = aggregate(fd.vector(), p);
  const auto gm = aggregate(gd.vector(), q);
  for (std::size_t k = 0; k < fm.size(); ++k)
    if (std::abs((fm[k] - gm.at(fm.index()[k])).to_double()) > tolerance::consistency)
      throw Error(ErrorCode::NotMetaConsistent, "aggregates differ at '" + fm.index()[k] + "'");
  for (std::size_t k = 0; k < prod_.meta().size(); ++k)
    second_.push_back(conditional(gd.entries(), q.fiber_positions(prod_.right_meta(k))));
  pos_ = pair_positions(prod_);
  law_ = Dist(prod_.categories(),
              detail::combine_values<Rational>(fd.entries(), gd.entries(), prod_, detail::Denominator::Left,
                                               ZeroPolicy::Permissive));
}

PairDraw MetaStarSampler::draw(Rng& rng) const {
  PairDraw d;
  d.i = first_.draw(rng);
  const std::size_t k = prod_.left().image(d.i);
  if (!second_[k]) throw Error(ErrorCode::ZeroAggregate, "aggregate of '" + prod_.meta()[k] + "' is zero");
  d.j = prod_.right().fiber_positions(prod_.right_meta(k))[second_[k]->draw(rng)];
  return d;
}

std::size_t MetaStarSampler::position(const PairDraw& d) const { return lookup(pos_, d); }

StructuredSuperSampler::StructuredSuperSampler(const ParametricModel& f, const ParametricModel& h,
                                               const ParametricModel& g, const CategoryMapping& p,
                                               const CategoryMapping& q, std::span<const Rational> theta1,
                                               std::span<const Rational> theta2, std::span<const Rational> theta3)
    : prod_(mapping_product(p, q)), meta_(std::vector<Rational>{Rational(1)}), law_(unit_dist()) {
  if (!(f.index() == p.domain()) || !(g.index() == q.domain()))
    throw Error(ErrorCode::IndexMismatch, "model indexes differ from the mapping domains");
  if (!h.index().same_elements(p.codomain()))
    throw Error(ErrorCode::IndexMismatch, "metacategory model index differs from M");
  const Dist fd = eval_exact(f, theta1);
  const Dist hd = eval_exact(h, theta2);
  const Dist gd = eval_exact(g, theta3);
  std::vector<Rational> hk;
  for (const auto& k : p.codomain()) hk.push_back(hd.at(k));
  meta_ = CategoricalSampler(hk);
  std::vector<Rational> law(prod_.size());
  for (std::size_t k = 0; k < prod_.meta().size(); ++k) {
    left_.push_back(conditional(fd.entries(), p.fiber_positions(k)));
    right_.push_back(conditional(gd.entries(), q.fiber_positions(prod_.right_meta(k))));
    if (hk[k].is_zero()) continue;
    if (!left_.back() || !right_.back())
      throw Error(ErrorCode::ZeroAggregate, "aggregate of '" + prod_.meta()[k] + "' is zero");
    Rational fm, gm;
    for (auto i : p.fiber_positions(k)) fm += fd[i];
    for (auto j : q.fiber_positions(prod_.right_meta(k))) gm += gd[j];
    const auto [first, last] = prod_.block(k);
    for (std::size_t n = first; n < last; ++n) {
      const auto& t = prod_.triples()[n];
      law[n] = fd[t.i] / fm * hk[k] * (gd[t.j] / gm);
    }
  }
  pos_ = pair_positions(prod_);
  law_ = Dist(prod_.categories(), std::move(law));
}

PairDraw StructuredSuperSampler::draw(Rng& rng) const {
  const std::size_t k = meta_.draw(rng);
  if (!left_[k] || !right_[k]) throw Error(ErrorCode::ZeroAggregate, "aggregate of '" + prod_.meta()[k] + "' is zero");
  PairDraw d;
  d.i = prod_.left().fiber_positions(k)[left_[k]->draw(rng)];
  d.j = prod_.right().fiber_positions(prod_.right_meta(k))[right_[k]->draw(rng)];
  return d;
}

std::size_t StructuredSuperSampler::position(const PairDraw& d) const { return lookup(pos_, d); }

PairDraw sample_meta_star(const ParametricModel& f, const ParametricModel& g, const CategoryMapping& p,
                          const CategoryMapping& q, std::span<const Rational> theta, Rng& rng) {
  return MetaStarSampler(f, g, p, q, theta).draw(rng);
}

PairDraw sample_structured_super(const ParametricModel& f, const ParametricModel& h, const ParametricModel& g,
                                 const CategoryMapping& p, const CategoryMapping& q,
                                 std::span<const Rational> theta1, std::span<const Rational> theta2,
                                 std::span<const Rational> theta3, Rng& rng) {
  return StructuredSuperSampler(f, h, g, p, q, theta1, theta2, theta3).draw(rng);
}

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> counts(std::span<const std::size_t> draws, std::size_t cells) {
  std::vector<std::uint64_t> out(cells, 0);
  for (auto d : draws) {
    if (d >= cells) throw Error(ErrorCode::InvalidArgument, "draw outside the index");
    ++out[d];
  }
  return out;
}

Dist empirical_dist(std::span<const std::size_t> draws, const CategorySet& index) {
  if (draws.empty()) throw Error(ErrorCode::EmptyInput, "no draws");
  const auto c = counts(draws, index.size());
  const auto total = static_cast<std::int64_t>(draws.size());
  std::vector<Rational> freq;
  freq.reserve(c.size());
  for (auto x : c) freq.emplace_back(static_cast<std::int64_t>(x), total);
  return Dist(index, std::move(freq));
}

GofResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const Rational> law, double min_expected) {
  if (observed.size() != law.size()) throw Error(ErrorCode::SizeMismatch, "observed counts and law differ in size");
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  if (total == 0.0) throw Error(ErrorCode::EmptyInput, "no observations");
  GofResult r;
  double pooled_o = 0.0, pooled_e = 0.0;
  std::size_t cells = 0;
  for (std::size_t n = 0; n < law.size(); ++n) {
    const double e = law[n].to_double() * total;
    const double o = static_cast<double>(observed[n]);
    if (law[n].is_zero()) {
      if (o > 0) {
        r.statistic = INFINITY;
        r.p_value = 0.0;
        return r;
      }
      continue;
    }
    if (e < min_expected) {
      pooled_o += o;
      pooled_e += e;
      continue;
    }
    r.statistic += (o - e) * (o - e) / e;
    ++cells;
  }
  if (pooled_e > 0.0) {
    r.statistic += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++cells;
  }
  if (cells < 2) return r;  // a single cell carries no information
  r.dof = cells - 1;
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(r.dof)), r.statistic));
  return r;
}

}  // namespace mcomb
