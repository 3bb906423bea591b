#include "markovcomb/core.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace mcomb {

CategorySet::CategorySet(std::vector<std::string> ids) : ids_(std::move(ids)) {
  pos_.reserve(ids_.size());
  for (std::size_t n = 0; n < ids_.size(); ++n) {
    if (ids_[n].empty()) throw Error(ErrorCode::InvalidCategorySet, "empty category identifier");
    if (!pos_.emplace(ids_[n], n).second)
      throw Error(ErrorCode::InvalidCategorySet, "duplicate category '" + ids_[n] + "'");
  }
}

CategorySet CategorySet::range(std::size_t n, std::size_t first) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(first + i));
  return CategorySet(std::move(ids));
}

bool CategorySet::contains(std::string_view id) const { return find(id).has_value(); }

std::optional<std::size_t> CategorySet::find(std::string_view id) const {
  auto it = pos_.find(std::string(id));
  if (it == pos_.end()) return std::nullopt;
  return it->second;
}

std::size_t CategorySet::position(std::string_view id) const {
  auto found = find(id);
  if (!found) throw Error(ErrorCode::InvalidArgument, "unknown category '" + std::string(id) + "'");
  return *found;
}

bool CategorySet::same_elements(const CategorySet& other) const {
  if (size() != other.size()) return false;
  return std::all_of(ids_.begin(), ids_.end(), [&](const auto& id) { return other.contains(id); });
}

// ---------------------------------------------------------------------------

CategoryMapping mapping_from_positions(CategorySet domain, CategorySet codomain,
                                       std::vector<std::size_t> assignment) {
  if (assignment.size() != domain.size())
    throw Error(ErrorCode::InvalidMapping, "assignment does not cover the domain");
  CategoryMapping p;
  p.fibers_.assign(codomain.size(), {});
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] >= codomain.size())
      throw Error(ErrorCode::InvalidMapping, "image of '" + domain[i] + "' outside the codomain");
    p.fibers_[assignment[i]].push_back(i);
  }
  for (std::size_t k = 0; k < codomain.size(); ++k)
    if (p.fibers_[k].empty())
      throw Error(ErrorCode::InvalidMapping, "metacategory '" + codomain[k] + "' has an empty fiber");
  p.domain_ = std::move(domain);
  p.codomain_ = std::move(codomain);
  p.assignment_ = std::move(assignment);
  return p;
}

CategoryMapping make_mapping(const CategorySet& domain,
                             const std::vector<std::pair<std::string, std::string>>& assignment,
                             const std::optional<CategorySet>& codomain_order) {
  std::vector<std::optional<std::string>> image(domain.size());
  for (const auto& [cat, meta] : assignment) {
    auto pos = domain.find(cat);
    if (!pos) throw Error(ErrorCode::InvalidMapping, "'" + cat + "' is not in the domain");
    if (image[*pos]) throw Error(ErrorCode::InvalidMapping, "'" + cat + "' is assigned twice");
    if (meta.empty()) throw Error(ErrorCode::InvalidMapping, "empty metacategory for '" + cat + "'");
    image[*pos] = meta;
  }
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (!image[i]) throw Error(ErrorCode::InvalidMapping, "'" + domain[i] + "' is not assigned");

  CategorySet codomain;
  if (codomain_order) {
    codomain = *codomain_order;
  } else {
    std::vector<std::string> order;
    std::unordered_set<std::string> seen;
    for (const auto& m : image)
      if (seen.insert(*m).second) order.push_back(*m);
    codomain = CategorySet(std::move(order));
  }

  std::vector<std::size_t> positions(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) {
    auto k = codomain.find(*image[i]);
    if (!k) throw Error(ErrorCode::InvalidMapping, "metacategory '" + *image[i] + "' missing from codomain order");
    positions[i] = *k;
  }
  return mapping_from_positions(domain, std::move(codomain), std::move(positions));
}

const std::string& CategoryMapping::image(std::string_view domain_id) const {
  return codomain_[assignment_[domain_.position(domain_id)]];
}

CategoryMapping identity_mapping(const CategorySet& set) {
  std::vector<std::size_t> a(set.size());
  std::iota(a.begin(), a.end(), std::size_t{0});
  return mapping_from_positions(set, set, std::move(a));
}

CategoryMapping constant_mapping(const CategorySet& set, const std::string& meta) {
  return mapping_from_positions(set, CategorySet({meta}), std::vector<std::size_t>(set.size(), 0));
}

CategorySet fiber(const CategoryMapping& p, std::string_view k) {
  auto pos = p.codomain().find(k);
  if (!pos) throw Error(ErrorCode::InvalidArgument, "'" + std::string(k) + "' is not a metacategory");
  std::vector<std::string> ids;
  for (auto i : p.fiber_positions(*pos)) ids.push_back(p.domain()[i]);
  return CategorySet(std::move(ids));
}

CategoryMapping compose_mappings(const CategoryMapping& p, const CategoryMapping& r) {
  if (!(p.codomain() == r.domain()))
    throw Error(ErrorCode::IndexMismatch, "codomain of the first mapping is not the domain of the second");
  std::vector<std::size_t> a(p.domain().size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = r.image(p.image(i));
  return mapping_from_positions(p.domain(), r.codomain(), std::move(a));
}

// ---------------------------------------------------------------------------

IndexedVector::IndexedVector(CategorySet index, std::vector<Rational> entries)
    : index_(std::move(index)), entries_(std::move(entries)) {
  if (index_.size() != entries_.size())
    throw Error(ErrorCode::IndexMismatch, "entry count differs from index size");
}

Rational IndexedVector::sum() const {
  Rational s;
  for (const auto& e : entries_) s += e;
  return s;
}

IndexedVector operator+(const IndexedVector& a, const IndexedVector& b) {
  if (!(a.index() == b.index())) throw Error(ErrorCode::IndexMismatch, "vectors on different indexes");
  std::vector<Rational> out(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = a[n] + b[n];
  return IndexedVector(a.index(), std::move(out));
}

IndexedVector operator*(const Rational& c, const IndexedVector& v) {
  std::vector<Rational> out(v.size());
  for (std::size_t n = 0; n < v.size(); ++n) out[n] = c * v[n];
  return IndexedVector(v.index(), std::move(out));
}

bool is_dist(const IndexedVector& v) {
  return std::all_of(v.entries().begin(), v.entries().end(), [](const Rational& e) { return e.sign() >= 0; }) &&
         v.sum() == Rational(1);
}

Dist::Dist(IndexedVector v) : v_(std::move(v)) {
  if (!is_dist(v_)) throw Error(ErrorCode::NotADistribution, "entries must be non-negative and sum to 1");
}

IndexedVector aggregate(const IndexedVector& v, const CategoryMapping& p) {
  if (!(v.index() == p.domain()))
    throw Error(ErrorCode::IndexMismatch, "vector index differs from the mapping domain");
  std::vector<Rational> out(p.codomain().size());
  for (std::size_t i = 0; i < v.size(); ++i) out[p.image(i)] += v[i];
  return IndexedVector(p.codomain(), std::move(out));
}

Dist aggregate(const Dist& d, const CategoryMapping& p) { return Dist(aggregate(d.vector(), p)); }

std::string pair_id(std::string_view i, std::string_view j) {
  std::string id;
  id.reserve(i.size() + j.size() + 3);
  id += '(';
  id += i;
  id += ',';
  id += j;
  id += ')';
  return id;
}

ProductIndex mapping_product(const CategoryMapping& p, const CategoryMapping& q) {
  if (!p.codomain().same_elements(q.codomain()))
    throw Error(ErrorCode::CodomainMismatch, "category mappings have different metacategories");
  ProductIndex prod;
  prod.p_ = p;
  prod.q_ = q;
  const auto& meta = p.codomain();
  prod.right_meta_.resize(meta.size());
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < meta.size(); ++k) {
    const std::size_t kq = q.codomain().position(meta[k]);
    prod.right_meta_[k] = kq;
    const std::size_t first = prod.triples_.size();
    for (auto i : p.fiber_positions(k))
      for (auto j : q.fiber_positions(kq)) {
        prod.triples_.push_back({k, i, j});
        ids.push_back(pair_id(p.domain()[i], q.domain()[j]));
      }
    prod.blocks_.emplace_back(first, prod.triples_.size());
  }
  prod.categories_ = CategorySet(std::move(ids));
  return prod;
}

CategoryMapping projection_mapping(const ProductIndex& prod, Axis axis) {
  std::vector<std::size_t> a;
  a.reserve(prod.size());
  for (const auto& t : prod.triples()) a.push_back(axis == Axis::Left ? t.i : t.j);
  const auto& target = axis == Axis::Left ? prod.left().domain() : prod.right().domain();
  return mapping_from_positions(prod.categories(), target, std::move(a));
}

}  // namespace mcomb
