#pragma once

// JSON encodings of the library's values. Rationals are always "num/den"
// strings on output; integers and "n" / "n/d" strings are accepted on input.

#include <string>

#include <json.hpp>

#include "markovcomb/copula.hpp"
#include "markovcomb/invariance.hpp"
#include "markovcomb/mle.hpp"
#include "markovcomb/staged_tree.hpp"

namespace mcomb {

using Json = nlohmann::ordered_json;

// Thrown for unreadable files and structurally malformed JSON documents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json read_json_file(const std::string& path);

Json to_json(const Rational& r);
Rational rational_from_json(const Json& j);
std::vector<Rational> rationals_from_json(const Json& j);
Json to_json(std::span<const Rational> v);

Json to_json(const CategorySet& s);
CategorySet category_set_from_json(const Json& j);

// {"domain": [...], "map": {"i": "k", ...}} plus "codomain" when its order
// differs from first appearance. The map may also be a list of [i, k] pairs.
Json to_json(const CategoryMapping& p);
CategoryMapping mapping_from_json(const Json& j);

// {"index": [...], "entries": [...]}
Json to_json(const IndexedVector& v);
IndexedVector vector_from_json(const Json& j);
Dist dist_from_json(const Json& j);

// {"left": mapping, "right": mapping, "meta": [...], "triples": [[k, i, j], ...]}
Json to_json(const ProductIndex& prod);
ProductIndex product_index_from_json(const Json& j);

// A vector on I x_M J with its "product" attached, so it can be piped.
Json to_json(const ProductVector& v);
ProductVector product_vector_from_json(const Json& j);

// {"n": n, "m": m, "values": [[...], ...]} with (n+1) x (m+1) values.
Json to_json(const DiscreteCopula& c);
DiscreteCopula copula_from_json(const Json& j);
Json to_json(const RationalMatrix& a);
RationalMatrix matrix_from_json(const Json& j);

// {"vertices": [...], "edges": [{"from", "to", "label"}], "root": id}
Json to_json(const StagedTree& t);
StagedTree tree_from_json(const Json& j);

// {"elements": [...], "perms": {g: {x: y}}, "compose": {a: {b: c}}};
// missing perms entries act trivially.
FiniteAction action_from_json(const Json& j, const CategorySet& set);
Json to_json(const FiniteAction& a);

// {"elements": {g: {"matrix": [[...]], "offset": [...]}}}: theta -> A theta + b.
// Elements without an entry act as the identity.
ParamTransport affine_transport_from_json(const Json& j, const FiniteAction& action, std::size_t dimension);

Json to_json(const HornPair& hp);

Json to_json(const ParamBox& box);
ParamBox box_from_json(const Json& j);

}  // namespace mcomb
