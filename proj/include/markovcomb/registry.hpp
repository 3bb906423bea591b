#pragma once

// Models addressable by a short spec string:
//   saturated:<n>            categories "1".."n"
//   saturated:<a,b,c>        explicit categories
//   binomial:<n>
//   const:<dist.json>        fixed distribution
//   lifted:<mapping.json>:<spec>  model_lift(mapping, model of spec)
//   poly:<file.json>         tabulated (piecewise) polynomial model
// A bare path ending in ".json" is read as a polynomial model.

#include <string>

#include "markovcomb/json_io.hpp"
#include "markovcomb/parametric.hpp"

namespace mcomb {

// {"index": [...], "box": box, "entries": [[[coef, [exponents]], ...], ...]}
// or, piecewise, "pieces": [{"region": [[lo, hi], ...], "entries": ...}];
// the first piece whose region contains theta is used.
ParametricModel polynomial_model_from_json(const Json& j);

ParametricModel model_from_spec(const std::string& spec);

}  // namespace mcomb
