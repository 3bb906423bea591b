#include "markovcomb/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "markovcomb/json_io.hpp"
#include "markovcomb/registry.hpp"
#include "markovcomb/sampling.hpp"

namespace mcomb::cli {

namespace {

// Thrown for invalid flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

ExactPoint parse_point(const std::string& text) {
  ExactPoint out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(Rational::parse(item));
  return out;
}

std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

double rounded(double x, int digits) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return std::stod(os.str());
}

Json approx(const std::vector<Rational>& v, int digits) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(rounded(x.to_double(), digits));
  return out;
}

Json point_json(std::span<const Rational> theta) { return to_json(theta); }

// Reorders a vector given by ids onto `index`.
IndexedVector reorder(const IndexedVector& v, const CategorySet& index) {
  if (v.index() == index) return v;
  if (!v.index().same_elements(index))
    throw Error(ErrorCode::IndexMismatch, "vector index does not match the expected categories");
  std::vector<Rational> entries;
  for (const auto& id : index) entries.push_back(v.at(id));
  return IndexedVector(index, std::move(entries));
}

CategoryMapping read_mapping(const std::string& path) { return mapping_from_json(read_json_file(path)); }

IndexedVector read_vector(const std::string& path) { return vector_from_json(read_json_file(path)); }

// --- subcommands --------------------------------------------------------------

struct CombineArgs {
  std::string variant = "star";
  std::vector<std::string> files;
  std::string f, g, h, p, q, theta;
  int digits = 12;
  std::size_t grid_steps = 28;
  bool permissive = false;
};

Json evaluation_json(const CombinedModel& c, std::span<const Rational> theta, int digits) {
  const Dist d = eval_exact(c.model, theta);
  ProductVector v{c.index, d.vector(), false};
  Json out;
  out["variant"] = std::string(to_string(c.variant));
  out["theta"] = point_json(theta);
  const Json body = to_json(v);
  for (const auto& [k, val] : body.items()) out[k] = val;
  out["approx"] = approx(d.entries(), digits);
  return out;
}

int cmd_combine(const CombineArgs& a, std::ostream& out) {
  const CombineOptions opts{a.permissive ? ZeroPolicy::Permissive : ZeroPolicy::Strict};
  if (a.variant == "left" || a.variant == "right" || a.variant == "star") {
    if (a.files.size() != 4) throw UsageError("combine --variant " + a.variant + " takes f g p q");
    const auto f = read_vector(a.files[0]);
    const auto g = read_vector(a.files[1]);
    const auto p = read_mapping(a.files[2]);
    const auto q = read_mapping(a.files[3]);
    const ProductVector v = a.variant == "left"    ? left_combine(f, g, p, q, opts)
                            : a.variant == "right" ? right_combine(f, g, p, q, opts)
                                                   : star(f, g, p, q, opts);
    emit(out, to_json(v));
    return 0;
  }
  const Variant variant = variant_from_string(a.variant);
  if (a.f.empty() || a.g.empty() || a.p.empty() || a.q.empty())
    throw UsageError("parametric combinations need --f, --g, --p and --q");
  const auto f = model_from_spec(a.f);
  const auto g = model_from_spec(a.g);
  const auto p = read_mapping(a.p);
  const auto q = read_mapping(a.q);
  CombinedModel c;
  switch (variant) {
    case Variant::MetaStar: {
      MetaOptions mo;
      mo.zero_policy = opts.zero_policy;
      c = meta_star(f, g, p, q, mo);
      break;
    }
    case Variant::Lower: c = lower_combine(f, g, p, q); break;
    case Variant::RestrictedLower: c = restricted_lower(f, g, p, q, uniform_grid(f.box(), a.grid_steps)); break;
    case Variant::Upper: c = upper_combine(f, g, p, q, opts); break;
    case Variant::RestrictedUpper: c = restricted_upper(f, g, p, q, opts); break;
    case Variant::Super: c = super_combine(f, g, p, q, opts); break;
    case Variant::RestrictedSuper: c = restricted_super(f, g, p, q, opts); break;
    case Variant::StructuredSuper:
      if (a.h.empty()) throw UsageError("structured-super needs --h");
      c = structured_super(f, model_from_spec(a.h), g, p, q, opts);
      break;
  }
  if (a.theta.empty()) {
    Json j;
    j["variant"] = std::string(to_string(c.variant));
    j["dimension"] = c.model.dimension();
    j["box"] = to_json(c.model.box());
    j["product"] = to_json(c.index);
    if (variant == Variant::RestrictedLower) {
      Json pts = Json::array();
      for (const auto& pt : c.admissible) pts.push_back(point_json(pt));
      j["admissible"] = std::move(pts);
    }
    emit(out, j);
    return 0;
  }
  emit(out, evaluation_json(c, parse_point(a.theta), a.digits));
  return 0;
}

int cmd_check(const std::vector<std::string>& files, std::ostream& out) {
  const auto f = read_vector(files[0]);
  const auto g = read_vector(files[1]);
  const auto p = read_mapping(files[2]);
  const auto q = read_mapping(files[3]);
  Json j;
  j["consistent"] = is_consistent(f, g, p, q);
  j["left_aggregate"] = to_json(aggregate(f, p));
  j["right_aggregate"] = to_json(aggregate(g, q));
  emit(out, j);
  return 0;
}

int cmd_project(const std::string& file, const std::string& axis, std::ostream& out) {
  const auto v = product_vector_from_json(read_json_file(file));
  Axis ax;
  if (axis == "I" || axis == "left") {
    ax = Axis::Left;
  } else if (axis == "J" || axis == "right") {
    ax = Axis::Right;
  } else {
    throw UsageError("--axis must be I, J, left or right");
  }
  emit(out, to_json(project(v, ax)));
  return 0;
}

struct MixtureArgs {
  std::string f, g, theta;
  bool separate = false, via_chain = false;
  int digits = 12;
};

int cmd_mixture(const MixtureArgs& a, std::ostream& out) {
  const auto f = model_from_spec(a.f);
  const auto g = model_from_spec(a.g);
  const auto sharing = a.separate ? ParameterSharing::Separate : ParameterSharing::Shared;
  const auto m = a.via_chain ? mixture_via_chain(f, g, sharing) : mixture(f, g, sharing);
  Json j;
  if (a.theta.empty()) {
    j["dimension"] = m.dimension();
    j["box"] = to_json(m.box());
    j["index"] = to_json(m.index());
  } else {
    const auto theta = parse_point(a.theta);
    const Dist d = eval_exact(m, theta);
    j = to_json(d.vector());
    j["theta"] = point_json(theta);
    j["approx"] = approx(d.entries(), a.digits);
  }
  emit(out, j);
  return 0;
}

Json check_json(const CopulaCheck& c) {
  Json j;
  j["valid"] = c.valid;
  if (!c.valid) {
    j["condition"] = std::string(to_string(c.failed));
    j["at"] = Json::array({c.i, c.j});
    j["detail"] = c.detail;
  }
  return j;
}

int cmd_copula(const std::string& action, const std::vector<std::string>& files, bool check_markov, std::ostream& out) {
  auto need = [&](std::size_t n) {
    if (files.size() != n) throw UsageError("copula " + action + " takes " + std::to_string(n) + " file(s)");
  };
  if (action == "validate") {
    need(1);
    emit(out, check_json(validate_copula(copula_from_json(read_json_file(files[0])))));
  } else if (action == "density") {
    need(1);
    const auto c = copula_from_json(read_json_file(files[0]));
    Json j;
    j["density"] = to_json(density_matrix(c));
    j["bistochastic"] = c.n == c.m ? to_json(bistochastic_from_copula(c)) : Json();
    emit(out, j);
  } else if (action == "product") {
    need(2);
    const auto a = copula_from_json(read_json_file(files[0]));
    const auto b = copula_from_json(read_json_file(files[1]));
    const auto prod = product_copula(a, b);
    Json j = to_json(prod);
    if (check_markov) {
      const auto gamma = product_via_markov(density_from_copula(a), density_from_copula(b), a.n);
      j["markov_identity"] = gamma == density_from_copula(prod);
    }
    emit(out, j);
  } else if (action == "from-matrix") {
    need(1);
    emit(out, to_json(copula_from_bistochastic(matrix_from_json(read_json_file(files[0])))));
  } else {
    throw UsageError("copula actions: validate, product, density, from-matrix");
  }
  return 0;
}

CutBijection parse_phi(const std::string& text) {
  CutBijection phi;
  for (const auto& item : parse_list(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--phi entries are a=b");
    phi[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return phi;
}

struct TreeArgs {
  std::string action;
  std::vector<std::string> files;
  std::string theta, cut1, cut2, phi, mode = "numeric";
  int digits = 12;
};

int cmd_tree(const TreeArgs& a, std::ostream& out) {
  if (a.files.empty()) throw UsageError("stagedtree needs a tree file");
  const auto t = tree_from_json(read_json_file(a.files[0]));
  if (a.action == "validate") {
    const auto check = validate_staged(t);
    Json j;
    j["valid"] = check.valid;
    if (!check.valid) {
      j["florets"] = Json::array({check.first, check.second});
      j["detail"] = check.detail;
    }
    emit(out, j);
    return 0;
  }
  if (a.action == "model") {
    const auto layout = stage_layout(t);
    Json j;
    if (a.theta.empty()) {
      j["paths"] = to_json(t.paths());
      j["stages"] = layout.stages();
      j["coordinates"] = layout.coordinates();
      j["box"] = to_json(layout.box());
    } else {
      const auto theta = parse_point(a.theta);
      const Dist d = eval_exact(tree_model(t, layout), theta);
      j = to_json(d.vector());
      j["approx"] = approx(d.entries(), a.digits);
    }
    emit(out, j);
    return 0;
  }
  if (a.action == "combine") {
    if (a.files.size() != 2) throw UsageError("stagedtree combine takes two tree files");
    const auto t2 = tree_from_json(read_json_file(a.files[1]));
    const auto d1 = decompose(t, parse_list(a.cut1));
    const auto d2 = decompose(t2, parse_list(a.cut2));
    StagedMetaOptions opts;
    if (a.mode == "symbolic") {
      opts.mode = MetaMode::Symbolic;
    } else if (a.mode != "numeric") {
      throw UsageError("--mode is symbolic or numeric");
    }
    const auto c = staged_combine(t, d1, t2, d2, parse_phi(a.phi), opts);
    Json j = to_json(c.tree);
    j["cut"] = c.decomposition.cut;
    Json pairs = Json::array();
    for (const auto& [x, y] : c.path_pairs) pairs.push_back(Json::array({t.paths()[x], t2.paths()[y]}));
    j["path_pairs"] = std::move(pairs);
    emit(out, j);
    return 0;
  }
  throw UsageError("stagedtree actions: validate, model, combine");
}

struct MleArgs {
  std::string data, mapping_i, mapping_j;
  bool emit_horn = false;
};

int cmd_mle(const MleArgs& a, std::ostream& out) {
  const Json data = read_json_file(a.data);
  ProductIndex prod;
  if (data.contains("product") && a.mapping_i.empty() && a.mapping_j.empty()) {
    prod = product_index_from_json(data.at("product"));
  } else {
    if (a.mapping_i.empty() || a.mapping_j.empty())
      throw UsageError("mle needs --mapping-i and --mapping-j unless the data carries its product");
    prod = mapping_product(read_mapping(a.mapping_i), read_mapping(a.mapping_j));
  }
  const auto x = reorder(vector_from_json(data), prod.categories());
  const Dist m = mle(x, prod.left(), prod.right());
  ProductVector v{prod, m.vector(), false};
  Json j = to_json(v);
  j["log_likelihood"] = log_likelihood(x, m);
  if (a.emit_horn) {
    const auto hp = build_horn_pair(prod.left(), prod.right());
    j["horn"] = to_json(hp);
    j["horn"]["reproduces_mle"] = verify_horn_identity(hp, x);
  }
  emit(out, j);
  return 0;
}

struct InvarianceArgs {
  std::string model, action, transport;
  double tol = 1e-12;
  std::size_t points = 64;
};

int cmd_invariance(const InvarianceArgs& a, std::ostream& out) {
  const auto f = model_from_spec(a.model);
  const auto action = action_from_json(read_json_file(a.action), f.index());
  const auto transport = a.transport.empty() ? ParamTransport::identity(f.dimension())
                                             : affine_transport_from_json(read_json_file(a.transport), action,
                                                                          f.dimension());
  const auto pts = halton_points(f.box(), a.points);
  const auto r = check_invariance(f, action, transport, pts, a.tol);
  Json j;
  j["invariant"] = r.invariant;
  j["injective"] = r.injective;
  j["worst_gap"] = r.worst_gap;
  if (!r.invariant) {
    j["element"] = r.element;
    j["point"] = point_json(r.point);
  }
  emit(out, j);
  return 0;
}

struct SampleArgs {
  std::string dist, model, variant, f, g, h, p, q, theta, out;
  std::uint64_t seed = 0;
  std::size_t n = 1;
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  Rng rng(a.seed);
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::binary);
    if (!file) throw FormatError("cannot write '" + a.out + "'");
  }
  std::ostream& sink = a.out.empty() ? out : file;
  auto pair_line = [&](const ProductIndex& prod, const PairDraw& d) {
    Json line;
    line["i"] = prod.left().domain()[d.i];
    line["j"] = prod.right().domain()[d.j];
    sink << line.dump() << '\n';
  };
  const auto theta = parse_point(a.theta);
  if (!a.variant.empty()) {
    if (a.f.empty() || a.g.empty() || a.p.empty() || a.q.empty())
      throw UsageError("sampling a combination needs --f, --g, --p and --q");
    const auto f = model_from_spec(a.f);
    const auto g = model_from_spec(a.g);
    const auto p = read_mapping(a.p);
    const auto q = read_mapping(a.q);
    const auto variant = variant_from_string(a.variant);
    if (variant == Variant::MetaStar) {
      const MetaStarSampler s(f, g, p, q, theta);
      for (std::size_t n = 0; n < a.n; ++n) pair_line(s.index(), s.draw(rng));
    } else if (variant == Variant::StructuredSuper) {
      if (a.h.empty()) throw UsageError("structured-super needs --h");
      const auto h = model_from_spec(a.h);
      const std::size_t d1 = f.dimension(), d2 = h.dimension();
      if (theta.size() != d1 + d2 + g.dimension())
        throw Error(ErrorCode::SizeMismatch, "theta must concatenate the parameters of f, h and g");
      const std::span<const Rational> all(theta);
      const StructuredSuperSampler s(f, h, g, p, q, all.subspan(0, d1), all.subspan(d1, d2), all.subspan(d1 + d2));
      for (std::size_t n = 0; n < a.n; ++n) pair_line(s.index(), s.draw(rng));
    } else {
      throw UsageError("samplers exist for meta-star and structured-super");
    }
  } else if (!a.dist.empty()) {
    const Json j = read_json_file(a.dist);
    if (j.contains("product")) {
      const auto v = product_vector_from_json(j);
      const CategoricalSampler s{Dist(v.values)};
      for (std::size_t n = 0; n < a.n; ++n) {
        const auto& t = v.index.triples()[s.draw(rng)];
        pair_line(v.index, PairDraw{t.i, t.j});
      }
    } else {
      const Dist d = dist_from_json(j);
      const CategoricalSampler s(d);
      for (std::size_t n = 0; n < a.n; ++n) sink << Json{{"category", d.index()[s.draw(rng)]}}.dump() << '\n';
    }
  } else if (!a.model.empty()) {
    const Dist d = eval_exact(model_from_spec(a.model), theta);
    const CategoricalSampler s(d);
    for (std::size_t n = 0; n < a.n; ++n) sink << Json{{"category", d.index()[s.draw(rng)]}}.dump() << '\n';
  } else {
    throw UsageError("sample needs --dist, --model or --variant");
  }
  if (!a.out.empty()) {
    file.close();
    emit(out, Json{{"draws", a.n}, {"seed", a.seed}, {"out", a.out}});
  }
  return 0;
}

int cmd_dim(const std::string& pfile, const std::string& qfile, bool jacobian, double rank_tol, std::ostream& out) {
  const auto p = read_mapping(pfile);
  const auto q = read_mapping(qfile);
  const auto d = expfam_combination_dim(p, q);
  Json j;
  j["model"] = d.model;
  j["ambient"] = d.ambient;
  if (jacobian) {
    const auto pair = consistent_saturated_pair(p, q);
    const auto c = meta_star(pair.f, pair.g, p, q);
    const auto point = halton_points(c.model.box(), 1, 7).front();
    const auto r = jacobian_rank(c.model, to_real(point), rank_tol);
    j["jacobian_rank"] = r.rank;
    j["singular_values"] = r.singular_values;
  }
  emit(out, j);
  return 0;
}

Json error_json(const Error& e) { return Json{{"error", std::string(to_string(e.code()))}, {"detail", e.detail()}}; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Markov combinations of categorical models", "markovcomb"};
  app.set_help_flag("--help", "Print help");
  app.require_subcommand(1);

  std::vector<std::string> agg_files;
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Aggregate a vector along a mapping");
  aggregate_cmd->add_option("files", agg_files, "vector.json mapping.json")->required()->expected(2);

  std::vector<std::string> prod_files;
  auto* product_cmd = app.add_subcommand("product-index", "Enumerate I x_M J");
  product_cmd->add_option("files", prod_files, "p.json q.json")->required()->expected(2);

  std::vector<std::string> check_files;
  auto* check_cmd = app.add_subcommand("check-consistency", "Compare the aggregates of f and g");
  check_cmd->add_option("files", check_files, "f.json g.json p.json q.json")->required()->expected(4);

  CombineArgs ca;
  auto* combine_cmd = app.add_subcommand("combine", "Combine two vectors or two parametric models");
  combine_cmd->add_option("--variant", ca.variant, "left, right, star or a parametric variant");
  combine_cmd->add_option("files", ca.files, "f.json g.json p.json q.json");
  combine_cmd->add_option("--f", ca.f, "model spec over I");
  combine_cmd->add_option("--g", ca.g, "model spec over J");
  combine_cmd->add_option("--h", ca.h, "model spec over M (structured-super)");
  combine_cmd->add_option("--p", ca.p, "mapping I -> M");
  combine_cmd->add_option("--q", ca.q, "mapping J -> M");
  combine_cmd->add_option("--theta", ca.theta, "comma separated rationals");
  combine_cmd->add_option("--digits", ca.digits, "significant digits of approximate output")->check(CLI::Range(1, 17));
  combine_cmd->add_option("--grid-steps", ca.grid_steps, "grid resolution for restricted-lower");
  combine_cmd->add_flag("--permissive", ca.permissive, "zero-fill blocks with a zero aggregate");

  std::string project_file, project_axis;
  auto* project_cmd = app.add_subcommand("project", "Marginal of a vector on I x_M J");
  project_cmd->add_option("file", project_file, "output of combine")->required();
  project_cmd->add_option("--axis", project_axis, "I or J")->required();

  MixtureArgs ma;
  auto* mixture_cmd = app.add_subcommand("mixture", "Mixture of two models");
  mixture_cmd->add_option("--f", ma.f)->required();
  mixture_cmd->add_option("--g", ma.g)->required();
  mixture_cmd->add_option("--theta", ma.theta, "parameters followed by lambda");
  mixture_cmd->add_flag("--separate", ma.separate, "f and g take separate parameters");
  mixture_cmd->add_flag("--via-chain", ma.via_chain, "build the mixture from Markov combinations");
  mixture_cmd->add_option("--digits", ma.digits)->check(CLI::Range(1, 17));

  std::string copula_action;
  std::vector<std::string> copula_files;
  bool check_markov = false;
  auto* copula_cmd = app.add_subcommand("copula", "Discrete copulas");
  copula_cmd->add_option("action", copula_action, "validate, product, density or from-matrix")->required();
  copula_cmd->add_option("files", copula_files)->required();
  copula_cmd->add_flag("--check-markov", check_markov, "compare the product with the Markov combination");

  TreeArgs ta;
  auto* tree_cmd = app.add_subcommand("stagedtree", "Staged trees");
  tree_cmd->add_option("action", ta.action, "validate, model or combine")->required();
  tree_cmd->add_option("files", ta.files)->required();
  tree_cmd->add_option("--theta", ta.theta);
  tree_cmd->add_option("--cut1", ta.cut1, "cut vertices of the first tree");
  tree_cmd->add_option("--cut2", ta.cut2, "cut vertices of the second tree");
  tree_cmd->add_option("--phi", ta.phi, "cut bijection a=b,...");
  tree_cmd->add_option("--mode", ta.mode, "symbolic or numeric meta-consistency");
  tree_cmd->add_option("--digits", ta.digits)->check(CLI::Range(1, 17));

  MleArgs la;
  auto* mle_cmd = app.add_subcommand("mle", "Closed-form maximum likelihood estimate");
  mle_cmd->add_option("--data", la.data, "counts on I x_M J")->required();
  mle_cmd->add_option("--mapping-i", la.mapping_i);
  mle_cmd->add_option("--mapping-j", la.mapping_j);
  mle_cmd->add_flag("--emit-horn", la.emit_horn);

  InvarianceArgs ia;
  auto* inv_cmd = app.add_subcommand("invariance", "Check invariance of a model under a group action");
  inv_cmd->add_option("--model", ia.model)->required();
  inv_cmd->add_option("--action", ia.action)->required();
  inv_cmd->add_option("--transport", ia.transport, "affine parameter transports");
  inv_cmd->add_option("--tol", ia.tol);
  inv_cmd->add_option("--points", ia.points);

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "Seeded draws");
  sample_cmd->add_option("--seed", sa.seed)->required();
  sample_cmd->add_option("--n", sa.n);
  sample_cmd->add_option("--out", sa.out, "JSONL output file; stdout when absent");
  sample_cmd->add_option("--dist", sa.dist, "distribution or combine output");
  sample_cmd->add_option("--model", sa.model, "model spec, evaluated at --theta");
  sample_cmd->add_option("--variant", sa.variant, "meta-star or structured-super");
  sample_cmd->add_option("--f", sa.f);
  sample_cmd->add_option("--g", sa.g);
  sample_cmd->add_option("--h", sa.h);
  sample_cmd->add_option("--p", sa.p);
  sample_cmd->add_option("--q", sa.q);
  sample_cmd->add_option("--theta", sa.theta);

  std::vector<std::string> dim_files;
  bool jacobian = false;
  double rank_tol = 1e-8;
  auto* dim_cmd = app.add_subcommand("dim", "Dimension of the exponential-family combination");
  dim_cmd->add_option("files", dim_files, "p.json q.json")->required()->expected(2);
  dim_cmd->add_flag("--jacobian", jacobian, "also compute the numeric Jacobian rank");
  dim_cmd->add_option("--rank-tol", rank_tol);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*aggregate_cmd) {
      emit(out, to_json(aggregate(read_vector(agg_files[0]), read_mapping(agg_files[1]))));
      return 0;
    }
    if (*product_cmd) {
      emit(out, to_json(mapping_product(read_mapping(prod_files[0]), read_mapping(prod_files[1]))));
      return 0;
    }
    if (*check_cmd) return cmd_check(check_files, out);
    if (*combine_cmd) return cmd_combine(ca, out);
    if (*project_cmd) return cmd_project(project_file, project_axis, out);
    if (*mixture_cmd) return cmd_mixture(ma, out);
    if (*copula_cmd) return cmd_copula(copula_action, copula_files, check_markov, out);
    if (*tree_cmd) return cmd_tree(ta, out);
    if (*mle_cmd) return cmd_mle(la, out);
    if (*inv_cmd) return cmd_invariance(ia, out);
    if (*sample_cmd) return cmd_sample(sa, out);
    if (*dim_cmd) return cmd_dim(dim_files[0], dim_files[1], jacobian, rank_tol, out);
  } catch (const Error& e) {
    err << "markovcomb: " << e.what() << '\n';
    if (e.code() == ErrorCode::ParseError) return 2;
    emit(out, error_json(e));
    return 1;
  } catch (const UsageError& e) {
    err << "markovcomb: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    err << "markovcomb: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "markovcomb: malformed input: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace mcomb::cli
