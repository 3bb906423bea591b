#include "markovcomb/registry.hpp"

#include <charconv>

namespace mcomb {

namespace {

struct Term {
  Rational coef;
  std::vector<int> exps;
};
using Poly = std::vector<Term>;

struct Piece {
  std::vector<Interval> region;  // empty: everywhere
  std::vector<Poly> entries;
};

std::vector<Poly> polys_from_json(const Json& j, std::size_t cells, std::size_t dim) {
  if (!j.is_array() || j.size() != cells) throw FormatError("polynomial model needs one polynomial per category");
  std::vector<Poly> out;
  for (const auto& poly : j) {
    if (!poly.is_array()) throw FormatError("a polynomial is a list of [coef, [exponents]] terms");
    Poly p;
    for (const auto& term : poly) {
      if (!term.is_array() || term.size() != 2 || !term[1].is_array())
        throw FormatError("a term is [coef, [exponents]]");
      Term t{rational_from_json(term[0]), term[1].get<std::vector<int>>()};
      if (t.exps.size() != dim) throw FormatError("term exponents must match the parameter dimension");
      for (int e : t.exps)
        if (e < 0) throw FormatError("negative exponent");
      p.push_back(std::move(t));
    }
    out.push_back(std::move(p));
  }
  return out;
}

template <class S>
bool in_region(const std::vector<Interval>& region, std::span<const S> theta) {
  for (std::size_t c = 0; c < region.size(); ++c) {
    if constexpr (std::is_same_v<S, double>) {
      if (theta[c] < region[c].lo.to_double() - tolerance::neg || theta[c] > region[c].hi.to_double() + tolerance::neg)
        return false;
    } else {
      if (theta[c] < region[c].lo || theta[c] > region[c].hi) return false;
    }
  }
  return true;
}

std::size_t parse_count(const std::string& s, const char* what) {
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError(std::string("bad ") + what + " '" + s + "'");
  return n;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto at = s.find(sep, start);
    out.push_back(s.substr(start, at - start));
    if (at == std::string::npos) return out;
    start = at + 1;
  }
}

bool is_count(const std::string& s) { return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos; }

}  // namespace

ParametricModel polynomial_model_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("polynomial model must be an object");
  const auto index = category_set_from_json(j.at("index"));
  ParamBox box = j.contains("box") ? box_from_json(j.at("box")) : ParamBox();
  const std::size_t dim = box.dimension();
  std::vector<Piece> pieces;
  if (j.contains("pieces")) {
    for (const auto& pj : j.at("pieces")) {
      Piece piece;
      if (pj.contains("region")) {
        piece.region = box_from_json(pj.at("region")).coords();
        if (piece.region.size() != dim) throw FormatError("piece region must match the parameter dimension");
      }
      piece.entries = polys_from_json(pj.at("entries"), index.size(), dim);
      pieces.push_back(std::move(piece));
    }
  } else if (j.contains("entries")) {
    pieces.push_back({{}, polys_from_json(j.at("entries"), index.size(), dim)});
  } else {
    throw FormatError("polynomial model needs \"entries\" or \"pieces\"");
  }
  if (pieces.empty()) throw FormatError("polynomial model has no pieces");
  return ParametricModel::generic(index, std::move(box), [pieces = std::move(pieces)](auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    const Piece* piece = nullptr;
    for (const auto& p : pieces)
      if (in_region<S>(p.region, theta)) {
        piece = &p;
        break;
      }
    if (!piece) throw Error(ErrorCode::OutOfBox, "no piece covers the parameter point");
    std::vector<S> out;
    out.reserve(piece->entries.size());
    for (const auto& poly : piece->entries) {
      S acc(0);
      for (const auto& t : poly) {
        S term;
        if constexpr (std::is_same_v<S, double>) {
          term = t.coef.to_double();
        } else {
          term = t.coef;
        }
        for (std::size_t c = 0; c < t.exps.size(); ++c) term *= detail::ipow(theta[c], t.exps[c]);
        acc += term;
      }
      out.push_back(acc);
    }
    return out;
  });
}

ParametricModel model_from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (colon == std::string::npos) {
    if (spec.size() > 5 && spec.ends_with(".json")) return polynomial_model_from_json(read_json_file(spec));
    throw FormatError("unknown model spec '" + spec + "'");
  }
  if (kind == "saturated") {
    if (is_count(rest)) {
      const auto n = parse_count(rest, "category count");
      if (n == 0) throw FormatError("saturated model needs at least one category");
      return saturated(CategorySet::range(n, 1));
    }
    return saturated(CategorySet(split(rest, ',')));
  }
  if (kind == "binomial") return binomial(static_cast<int>(parse_count(rest, "binomial size")));
  if (kind == "const") return constant_model(dist_from_json(read_json_file(rest)));
  if (kind == "poly") return polynomial_model_from_json(read_json_file(rest));
  if (kind == "lifted") {
    const auto sep = rest.find(':');
    if (sep == std::string::npos) throw FormatError("lifted spec is lifted:<mapping.json>:<model spec>");
    const auto p = mapping_from_json(read_json_file(rest.substr(0, sep)));
    return model_lift(p, model_from_spec(rest.substr(sep + 1)));
  }
  throw FormatError("unknown model kind '" + kind + "'");
}

}  // namespace mcomb
