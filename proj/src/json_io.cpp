#include "markovcomb/json_io.hpp"

#include <fstream>
#include <sstream>

namespace mcomb {

namespace {

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw FormatError(std::string("missing field '") + name + "'");
  return j.at(name);
}

std::vector<std::string> strings(const Json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + " must be an array");
  std::vector<std::string> out;
  for (const auto& x : j) {
    if (!x.is_string()) throw FormatError(std::string(what) + " must hold strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

Json to_json(const Rational& r) { return r.str(); }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  throw FormatError("rationals must be strings \"n/d\" or integers, got " + j.dump());
}

std::vector<Rational> rationals_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("expected an array of rationals");
  std::vector<Rational> out;
  for (const auto& x : j) out.push_back(rational_from_json(x));
  return out;
}

Json to_json(std::span<const Rational> v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(x.str());
  return out;
}

Json to_json(const CategorySet& s) {
  Json out = Json::array();
  for (const auto& id : s) out.push_back(id);
  return out;
}

CategorySet category_set_from_json(const Json& j) { return CategorySet(strings(j, "category set")); }

Json to_json(const CategoryMapping& p) {
  Json out;
  out["domain"] = to_json(p.domain());
  Json a = Json::object();
  for (std::size_t i = 0; i < p.domain().size(); ++i) a[p.domain()[i]] = p.codomain()[p.image(i)];
  out["map"] = std::move(a);
  // Codomain only when it is not the order of first appearance.
  std::vector<std::string> derived;
  for (std::size_t i = 0; i < p.domain().size(); ++i) {
    const auto& k = p.codomain()[p.image(i)];
    if (std::find(derived.begin(), derived.end(), k) == derived.end()) derived.push_back(k);
  }
  if (!(CategorySet(derived) == p.codomain())) out["codomain"] = to_json(p.codomain());
  return out;
}

CategoryMapping mapping_from_json(const Json& j) {
  const auto domain = category_set_from_json(field(j, "domain"));
  std::vector<std::pair<std::string, std::string>> pairs;
  const auto& a = field(j, "map");
  if (a.is_object()) {
    for (const auto& [k, v] : a.items()) {
      if (!v.is_string()) throw FormatError("map values must be strings");
      pairs.emplace_back(k, v.get<std::string>());
    }
  } else if (a.is_array()) {
    for (const auto& x : a) {
      if (!x.is_array() || x.size() != 2 || !x[0].is_string() || !x[1].is_string())
        throw FormatError("map pairs must be [category, metacategory]");
      pairs.emplace_back(x[0].get<std::string>(), x[1].get<std::string>());
    }
  } else {
    throw FormatError("map must be an object or a list of pairs");
  }
  std::optional<CategorySet> codomain;
  if (j.contains("codomain")) codomain = category_set_from_json(j.at("codomain"));
  return make_mapping(domain, pairs, codomain);
}

Json to_json(const IndexedVector& v) {
  Json out;
  out["index"] = to_json(v.index());
  out["entries"] = to_json(std::span<const Rational>(v.entries()));
  return out;
}

IndexedVector vector_from_json(const Json& j) {
  return IndexedVector(category_set_from_json(field(j, "index")), rationals_from_json(field(j, "entries")));
}

Dist dist_from_json(const Json& j) { return Dist(vector_from_json(j)); }

Json to_json(const ProductIndex& prod) {
  Json out;
  out["left"] = to_json(prod.left());
  out["right"] = to_json(prod.right());
  out["meta"] = to_json(prod.meta());
  Json triples = Json::array();
  for (const auto& t : prod.triples())
    triples.push_back(Json::array({prod.meta()[t.k], prod.left().domain()[t.i], prod.right().domain()[t.j]}));
  out["triples"] = std::move(triples);
  return out;
}

ProductIndex product_index_from_json(const Json& j) {
  return mapping_product(mapping_from_json(field(j, "left")), mapping_from_json(field(j, "right")));
}

Json to_json(const ProductVector& v) {
  Json out = to_json(v.values);
  out["sub_normalized"] = v.sub_normalized;
  out["product"] = to_json(v.index);
  return out;
}

ProductVector product_vector_from_json(const Json& j) {
  ProductVector v;
  v.index = product_index_from_json(field(j, "product"));
  v.values = vector_from_json(j);
  if (!(v.values.index() == v.index.categories()))
    throw Error(ErrorCode::IndexMismatch, "vector index differs from the attached product");
  if (j.contains("sub_normalized")) v.sub_normalized = j.at("sub_normalized").get<bool>();
  return v;
}

Json to_json(const RationalMatrix& a) {
  Json out = Json::array();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < a.cols(); ++c) row.push_back(a(r, c).str());
    out.push_back(std::move(row));
  }
  return out;
}

RationalMatrix matrix_from_json(const Json& j) {
  const Json& rows = j.is_object() ? field(j, "matrix") : j;
  if (!rows.is_array() || rows.empty()) throw FormatError("a matrix is a non-empty array of rows");
  const std::size_t cols = rows.front().size();
  std::vector<Rational> data;
  for (const auto& row : rows) {
    auto values = rationals_from_json(row);
    if (values.size() != cols) throw FormatError("matrix rows differ in length");
    data.insert(data.end(), values.begin(), values.end());
  }
  return RationalMatrix(rows.size(), cols, std::move(data));
}

Json to_json(const DiscreteCopula& c) {
  Json out;
  out["n"] = c.n;
  out["m"] = c.m;
  out["values"] = to_json(c.values);
  return out;
}

DiscreteCopula copula_from_json(const Json& j) {
  DiscreteCopula c;
  c.n = field(j, "n").get<std::size_t>();
  c.m = field(j, "m").get<std::size_t>();
  c.values = matrix_from_json(field(j, "values"));
  return c;
}

Json to_json(const StagedTree& t) {
  Json out;
  out["vertices"] = to_json(t.vertices());
  Json edges = Json::array();
  for (const auto& e : t.edges()) edges.push_back({{"from", e.from}, {"to", e.to}, {"label", e.label}});
  out["edges"] = std::move(edges);
  out["root"] = t.root();
  return out;
}

StagedTree tree_from_json(const Json& j) {
  std::vector<TreeEdge> edges;
  const auto& e = field(j, "edges");
  if (!e.is_array()) throw FormatError("edges must be an array");
  for (const auto& x : e)
    edges.push_back({field(x, "from").get<std::string>(), field(x, "to").get<std::string>(),
                     field(x, "label").get<std::string>()});
  return StagedTree(strings(field(j, "vertices"), "vertices"), std::move(edges), field(j, "root").get<std::string>());
}

FiniteAction action_from_json(const Json& j, const CategorySet& set) {
  const auto elements = strings(field(j, "elements"), "elements");
  const auto& perms_json = field(j, "perms");
  std::vector<std::vector<std::size_t>> perms;
  for (const auto& g : elements) {
    std::vector<std::size_t> perm(set.size());
    for (std::size_t x = 0; x < set.size(); ++x) perm[x] = x;
    if (perms_json.contains(g)) {
      for (const auto& [from, to] : perms_json.at(g).items()) {
        const auto a = set.find(from);
        const auto b = to.is_string() ? set.find(to.get<std::string>()) : std::nullopt;
        if (!a || !b) throw Error(ErrorCode::InvalidAction, "permutation of '" + g + "' names unknown categories");
        perm[*a] = *b;
      }
    }
    perms.push_back(std::move(perm));
  }
  std::optional<std::vector<std::vector<std::size_t>>> compose;
  if (j.contains("compose")) {
    auto position = [&](const std::string& name) {
      for (std::size_t g = 0; g < elements.size(); ++g)
        if (elements[g] == name) return g;
      throw Error(ErrorCode::InvalidAction, "unknown group element '" + name + "'");
    };
    compose.emplace(elements.size(), std::vector<std::size_t>(elements.size()));
    for (std::size_t a = 0; a < elements.size(); ++a)
      for (std::size_t b = 0; b < elements.size(); ++b)
        (*compose)[a][b] = position(j.at("compose").at(elements[a]).at(elements[b]).get<std::string>());
  }
  return FiniteAction(set, elements, std::move(perms), std::move(compose));
}

Json to_json(const FiniteAction& a) {
  Json out;
  out["elements"] = a.elements();
  Json perms = Json::object();
  Json compose = Json::object();
  for (std::size_t g = 0; g < a.order(); ++g) {
    Json perm = Json::object();
    for (std::size_t x = 0; x < a.set().size(); ++x) perm[a.set()[x]] = a.set()[a.act(g, x)];
    perms[a.elements()[g]] = std::move(perm);
    Json row = Json::object();
    for (std::size_t h = 0; h < a.order(); ++h) row[a.elements()[h]] = a.elements()[a.compose(g, h)];
    compose[a.elements()[g]] = std::move(row);
  }
  out["perms"] = std::move(perms);
  out["compose"] = std::move(compose);
  return out;
}

ParamTransport affine_transport_from_json(const Json& j, const FiniteAction& action, std::size_t dimension) {
  struct Affine {
    RationalMatrix a;
    std::vector<Rational> b;
  };
  std::vector<Affine> maps;
  const auto& elems = field(j, "elements");
  for (const auto& g : action.elements()) {
    Affine m{RationalMatrix::identity(dimension), std::vector<Rational>(dimension)};
    if (elems.contains(g)) {
      const auto& spec = elems.at(g);
      if (spec.contains("matrix")) m.a = matrix_from_json(spec.at("matrix"));
      if (spec.contains("offset")) m.b = rationals_from_json(spec.at("offset"));
      if (m.a.rows() != dimension || m.a.cols() != dimension || m.b.size() != dimension)
        throw Error(ErrorCode::SizeMismatch, "transport of '" + g + "' has the wrong shape");
    }
    maps.push_back(std::move(m));
  }
  return ParamTransport::generic(dimension, [maps, dimension](std::size_t g, auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    std::vector<S> out(dimension);
    for (std::size_t r = 0; r < dimension; ++r) {
      S acc;
      if constexpr (std::is_same_v<S, double>) {
        acc = maps[g].b[r].to_double();
        for (std::size_t c = 0; c < dimension; ++c) acc += maps[g].a(r, c).to_double() * theta[c];
      } else {
        acc = maps[g].b[r];
        for (std::size_t c = 0; c < dimension; ++c) acc += maps[g].a(r, c) * theta[c];
      }
      out[r] = acc;
    }
    return out;
  });
}

Json to_json(const HornPair& hp) {
  Json out;
  out["rows"] = hp.row_labels;
  out["columns"] = to_json(hp.index.categories());
  out["matrix"] = hp.h;
  out["lambda"] = hp.lambda;
  Json blocks = Json::array();
  for (std::size_t k = 0; k < hp.index.meta().size(); ++k)
    blocks.push_back({{"meta", hp.index.meta()[k]}, {"matrix", hp.block(k)}});
  out["blocks"] = std::move(blocks);
  return out;
}

Json to_json(const ParamBox& box) {
  Json out;
  Json intervals = Json::array();
  Json binary = Json::array();
  for (std::size_t c = 0; c < box.dimension(); ++c) {
    intervals.push_back(Json::array({box.coords()[c].lo.str(), box.coords()[c].hi.str()}));
    if (box.coords()[c].binary) binary.push_back(c);
  }
  out["intervals"] = std::move(intervals);
  out["simplex"] = box.simplex_groups();
  out["binary"] = std::move(binary);
  return out;
}

ParamBox box_from_json(const Json& j) {
  const Json& intervals = j.is_array() ? j : field(j, "intervals");
  std::vector<Interval> coords;
  for (const auto& iv : intervals) {
    if (!iv.is_array() || iv.size() != 2) throw FormatError("intervals are [lo, hi] pairs");
    coords.push_back({rational_from_json(iv[0]), rational_from_json(iv[1])});
  }
  std::vector<std::vector<std::size_t>> groups;
  if (j.is_object() && j.contains("binary"))
    for (const auto& c : j.at("binary")) coords.at(c.get<std::size_t>()).binary = true;
  if (j.is_object() && j.contains("simplex")) groups = j.at("simplex").get<std::vector<std::vector<std::size_t>>>();
  return ParamBox(std::move(coords), std::move(groups));
}

}  // namespace mcomb
