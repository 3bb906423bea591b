#pragma once

// Category sets, category mappings, aggregates and mapping products.
//
// A category set is an ordered list of distinct text identifiers. The order is
// insertion order and is used wherever a deterministic enumeration is needed
// (product indexes, serialization, inverse-CDF sampling).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "markovcomb/errors.hpp"
#include "markovcomb/rational.hpp"

namespace mcomb {

class CategorySet {
 public:
  CategorySet() = default;
  explicit CategorySet(std::vector<std::string> ids);
  CategorySet(std::initializer_list<std::string> ids)
      : CategorySet(std::vector<std::string>(ids)) {}

  // Categories "0", "1", ..., "n-1".
  static CategorySet range(std::size_t n, std::size_t first = 0);

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const std::string& operator[](std::size_t pos) const { return ids_[pos]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }

  bool contains(std::string_view id) const;
  std::optional<std::size_t> find(std::string_view id) const;
  // Throws InvalidArgument when absent.
  std::size_t position(std::string_view id) const;

  // Same elements, order ignored.
  bool same_elements(const CategorySet& other) const;

  friend bool operator==(const CategorySet& a, const CategorySet& b) { return a.ids_ == b.ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> pos_;
};

// A surjective assignment p : I -> M. The codomain contains exactly the used
// metacategories.
class CategoryMapping {
 public:
  CategoryMapping() = default;

  const CategorySet& domain() const noexcept { return domain_; }
  const CategorySet& codomain() const noexcept { return codomain_; }

  // Codomain position of the domain element at `domain_pos`.
  std::size_t image(std::size_t domain_pos) const { return assignment_[domain_pos]; }
  const std::string& image(std::string_view domain_id) const;
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }

  // Domain positions mapped to codomain position k, in domain order.
  const std::vector<std::size_t>& fiber_positions(std::size_t k) const { return fibers_[k]; }

  friend bool operator==(const CategoryMapping& a, const CategoryMapping& b) {
    return a.domain_ == b.domain_ && a.codomain_ == b.codomain_ && a.assignment_ == b.assignment_;
  }

 private:
  friend CategoryMapping make_mapping(const CategorySet&,
                                      const std::vector<std::pair<std::string, std::string>>&,
                                      const std::optional<CategorySet>&);
  friend CategoryMapping mapping_from_positions(CategorySet, CategorySet, std::vector<std::size_t>);

  CategorySet domain_;
  CategorySet codomain_;
  std::vector<std::size_t> assignment_;
  std::vector<std::vector<std::size_t>> fibers_;
};

// Builds a mapping from (category, metacategory) pairs. Every domain element
// must appear exactly once. The codomain is ordered by first appearance in
// domain order unless `codomain_order` is given, in which case it must list
// exactly the used metacategories.
CategoryMapping make_mapping(const CategorySet& domain,
                             const std::vector<std::pair<std::string, std::string>>& assignment,
                             const std::optional<CategorySet>& codomain_order = std::nullopt);

// Low-level constructor; `assignment[i]` is a codomain position. Validates
// totality and surjectivity.
CategoryMapping mapping_from_positions(CategorySet domain, CategorySet codomain,
                                       std::vector<std::size_t> assignment);

CategoryMapping identity_mapping(const CategorySet& set);
CategoryMapping constant_mapping(const CategorySet& set, const std::string& meta = "*");

// Domain ids of the fiber over metacategory k. Throws InvalidArgument if k is
// not in the codomain.
CategorySet fiber(const CategoryMapping& p, std::string_view k);

// r after p : I -> M'.
CategoryMapping compose_mappings(const CategoryMapping& p, const CategoryMapping& r);

class IndexedVector {
 public:
  IndexedVector() = default;
  IndexedVector(CategorySet index, std::vector<Rational> entries);

  const CategorySet& index() const noexcept { return index_; }
  const std::vector<Rational>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const Rational& operator[](std::size_t pos) const { return entries_[pos]; }
  const Rational& at(std::string_view id) const { return entries_[index_.position(id)]; }

  Rational sum() const;

  friend bool operator==(const IndexedVector& a, const IndexedVector& b) {
    return a.index_ == b.index_ && a.entries_ == b.entries_;
  }

 private:
  CategorySet index_;
  std::vector<Rational> entries_;
};

IndexedVector operator+(const IndexedVector& a, const IndexedVector& b);
IndexedVector operator*(const Rational& c, const IndexedVector& v);

bool is_dist(const IndexedVector& v);

// A probability vector: non-negative entries summing to exactly one.
class Dist {
 public:
  explicit Dist(IndexedVector v);
  Dist(CategorySet index, std::vector<Rational> entries)
      : Dist(IndexedVector(std::move(index), std::move(entries))) {}

  const IndexedVector& vector() const noexcept { return v_; }
  const CategorySet& index() const noexcept { return v_.index(); }
  const std::vector<Rational>& entries() const noexcept { return v_.entries(); }
  std::size_t size() const noexcept { return v_.size(); }
  const Rational& operator[](std::size_t pos) const { return v_[pos]; }
  const Rational& at(std::string_view id) const { return v_.at(id); }

  operator const IndexedVector&() const noexcept { return v_; }  // NOLINT(implicit)

  friend bool operator==(const Dist& a, const Dist& b) { return a.v_ == b.v_; }

 private:
  IndexedVector v_;
};

// Entry k of the result is the sum of v over the fiber of k.
IndexedVector aggregate(const IndexedVector& v, const CategoryMapping& p);
Dist aggregate(const Dist& d, const CategoryMapping& p);

// Id of the pair (i, j) inside a mapping product.
std::string pair_id(std::string_view i, std::string_view j);

// The mapping product I x_M J, enumerated lexicographically in (k, i, j)
// using p's codomain order and the stored orders of I and J.
class ProductIndex {
 public:
  struct Triple {
    std::size_t k;  // position in p.codomain()
    std::size_t i;  // position in I
    std::size_t j;  // position in J

    friend bool operator==(const Triple&, const Triple&) = default;
  };

  ProductIndex() = default;

  const CategoryMapping& left() const noexcept { return p_; }
  const CategoryMapping& right() const noexcept { return q_; }
  const CategorySet& meta() const noexcept { return p_.codomain(); }
  const std::vector<Triple>& triples() const noexcept { return triples_; }
  std::size_t size() const noexcept { return triples_.size(); }

  // Categories named pair_id(i, j), in triple order.
  const CategorySet& categories() const noexcept { return categories_; }

  // Position in q.codomain() of p's metacategory k.
  std::size_t right_meta(std::size_t k) const { return right_meta_[k]; }

  // Positions of the triples with metacategory k, contiguous in triple order.
  std::pair<std::size_t, std::size_t> block(std::size_t k) const { return blocks_[k]; }

  friend bool operator==(const ProductIndex& a, const ProductIndex& b) {
    return a.p_ == b.p_ && a.q_ == b.q_;
  }

 private:
  friend ProductIndex mapping_product(const CategoryMapping&, const CategoryMapping&);

  CategoryMapping p_;
  CategoryMapping q_;
  std::vector<std::size_t> right_meta_;
  std::vector<Triple> triples_;
  std::vector<std::pair<std::size_t, std::size_t>> blocks_;
  CategorySet categories_;
};

// Throws CodomainMismatch unless p and q have the same set of metacategories.
ProductIndex mapping_product(const CategoryMapping& p, const CategoryMapping& q);

enum class Axis { Left, Right };

// The natural projection pi_I or pi_J of a mapping product.
CategoryMapping projection_mapping(const ProductIndex& prod, Axis axis);

// A vector on a mapping product, carrying its product structure.
struct ProductVector {
  ProductIndex index;
  IndexedVector values;
  // Set when a zero-aggregate block was filled with zeros in permissive mode.
  bool sub_normalized = false;
};

}  // namespace mcomb
