#include "markovcomb/combine.hpp"

namespace mcomb {

namespace detail {

void throw_zero_aggregate(const ProductIndex& prod, std::size_t k) {
  throw Error(ErrorCode::ZeroAggregate, "aggregate of metacategory '" + prod.meta()[k] + "' is zero");
}

}  // namespace detail

namespace {

void check_domains(const IndexedVector& f, const IndexedVector& g, const CategoryMapping& p,
                   const CategoryMapping& q) {
  if (!(f.index() == p.domain())) throw Error(ErrorCode::IndexMismatch, "first vector index differs from p's domain");
  if (!(g.index() == q.domain())) throw Error(ErrorCode::IndexMismatch, "second vector index differs from q's domain");
}

ProductVector combine(const IndexedVector& f, const IndexedVector& g, const CategoryMapping& p,
                      const CategoryMapping& q, detail::Denominator denom, CombineOptions opts) {
  check_domains(f, g, p, q);
  ProductVector out;
  out.index = mapping_product(p, q);
  auto values = detail::combine_values<Rational>(f.entries(), g.entries(), out.index, denom, opts.zero_policy,
                                                 &out.sub_normalized);
  out.values = IndexedVector(out.index.categories(), std::move(values));
  return out;
}

}  // namespace

ProductVector left_combine(const IndexedVector& f, const IndexedVector& g, const CategoryMapping& p,
                           const CategoryMapping& q, CombineOptions opts) {
  return combine(f, g, p, q, detail::Denominator::Left, opts);
}

ProductVector right_combine(const IndexedVector& f, const IndexedVector& g, const CategoryMapping& p,
                            const CategoryMapping& q, CombineOptions opts) {
  return combine(f, g, p, q, detail::Denominator::Right, opts);
}

bool is_consistent(const IndexedVector& f, const IndexedVector& g, const CategoryMapping& p,
                   const CategoryMapping& q) {
  check_domains(f, g, p, q);
  if (!p.codomain().same_elements(q.codomain()))
    throw Error(ErrorCode::CodomainMismatch, "category mappings have different metacategories");
  const auto fm = aggregate(f, p);
  const auto gm = aggregate(g, q);
  for (std::size_t k = 0; k < fm.size(); ++k)
    if (fm[k] != gm.at(fm.index()[k])) return false;
  return true;
}

ProductVector star(const IndexedVector& f, const IndexedVector& g, const CategoryMapping& p,
                   const CategoryMapping& q, CombineOptions opts) {
  if (!is_consistent(f, g, p, q))
    throw Error(ErrorCode::NotConsistent, "aggregates of the two vectors differ");
  return left_combine(f, g, p, q, opts);
}

IndexedVector project(const ProductVector& v, Axis axis) {
  return aggregate(v.values, projection_mapping(v.index, axis));
}

CategoryMapping induced_mapping(const ProductIndex& prod, Axis through, const CategoryMapping& next) {
  const auto& side = through == Axis::Left ? prod.left().domain() : prod.right().domain();
  if (!(next.domain() == side))
    throw Error(ErrorCode::IndexMismatch, "mapping domain differs from the chosen side of the product");
  std::vector<std::size_t> a;
  a.reserve(prod.size());
  for (const auto& t : prod.triples()) a.push_back(next.image(through == Axis::Left ? t.i : t.j));
  return mapping_from_positions(prod.categories(), next.codomain(), std::move(a));
}

ProductVector swap_sides(const ProductVector& v) {
  ProductVector out;
  out.index = mapping_product(v.index.right(), v.index.left());
  out.sub_normalized = v.sub_normalized;
  const auto& I = v.index.left().domain();
  const auto& J = v.index.right().domain();
  std::vector<Rational> values(out.index.size());
  for (std::size_t n = 0; n < out.index.size(); ++n) {
    const auto& t = out.index.triples()[n];  // t.i indexes J, t.j indexes I
    values[n] = v.values.at(pair_id(I[t.j], J[t.i]));
  }
  out.values = IndexedVector(out.index.categories(), std::move(values));
  return out;
}

ProductVector star_all(const std::vector<IndexedVector>& vectors, const std::vector<CategoryMapping>& mappings,
                       CombineOptions opts) {
  if (vectors.size() < 2 || vectors.size() != mappings.size())
    throw Error(ErrorCode::InvalidArgument, "need at least two vectors, each with a mapping");
  ProductVector acc = star(vectors[0], vectors[1], mappings[0], mappings[1], opts);
  CategoryMapping through = induced_mapping(acc.index, Axis::Left, mappings[0]);
  for (std::size_t l = 2; l < vectors.size(); ++l) {
    acc = star(acc.values, vectors[l], through, mappings[l], opts);
    through = induced_mapping(acc.index, Axis::Left, through);
  }
  return acc;
}

Dist unit_dist(const std::string& id) { return Dist(CategorySet({id}), {Rational(1)}); }

}  // namespace mcomb
