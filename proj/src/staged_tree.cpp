#include "markovcomb/staged_tree.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

#include "markovcomb/random.hpp"

namespace mcomb {

StagedTree::StagedTree(std::vector<std::string> vertices, std::vector<TreeEdge> edges, std::string root)
    : edges_(std::move(edges)), root_(std::move(root)) {
  try {
    vertices_ = CategorySet(std::move(vertices));
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidTree, e.detail());
  }
  const auto r = vertices_.find(root_);
  if (!r) throw Error(ErrorCode::InvalidTree, "root '" + root_ + "' is not a vertex");
  children_.assign(vertices_.size(), {});
  parent_.assign(vertices_.size(), std::nullopt);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto from = vertices_.find(edges_[e].from);
    const auto to = vertices_.find(edges_[e].to);
    if (!from || !to) throw Error(ErrorCode::InvalidTree, "edge between unknown vertices");
    if (edges_[e].label.empty()) throw Error(ErrorCode::InvalidTree, "edge without a label");
    if (*to == *r) throw Error(ErrorCode::InvalidTree, "the root has an incoming edge");
    if (parent_[*to]) throw Error(ErrorCode::InvalidTree, "vertex '" + edges_[e].to + "' has two parents");
    parent_[*to] = e;
    children_[*from].push_back(e);
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (v != *r && !parent_[v]) throw Error(ErrorCode::InvalidTree, "vertex '" + vertices_[v] + "' is a second root");

  std::vector<std::size_t> stack{*r};
  std::vector<bool> seen(vertices_.size(), false);
  std::vector<std::string> leaves;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (seen[v]) throw Error(ErrorCode::InvalidTree, "cycle through '" + vertices_[v] + "'");
    seen[v] = true;
    preorder_.push_back(v);
    if (children_[v].empty()) leaves.push_back(vertices_[v]);
    for (auto it = children_[v].rbegin(); it != children_[v].rend(); ++it)
      stack.push_back(vertices_.position(edges_[*it].to));
  }
  if (preorder_.size() != vertices_.size()) throw Error(ErrorCode::InvalidTree, "some vertices are unreachable");
  paths_ = CategorySet(std::move(leaves));
}

std::vector<std::size_t> StagedTree::path_edges(std::size_t v) const {
  std::vector<std::size_t> out;
  while (parent_[v]) {
    out.push_back(*parent_[v]);
    v = vertices_.position(edges_[*parent_[v]].from);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> StagedTree::subtree(std::size_t v) const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{v};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (auto it = children_[u].rbegin(); it != children_[u].rend(); ++it)
      stack.push_back(vertices_.position(edges_[*it].to));
  }
  return out;
}

StageCheck validate_staged(const StagedTree& t) {
  std::vector<std::pair<std::size_t, std::set<std::string>>> florets;
  for (auto v : t.preorder()) {
    if (t.is_leaf(v)) continue;
    std::set<std::string> labels;
    for (auto e : t.floret(v))
      if (!labels.insert(t.edges()[e].label).second)
        return {false, t.vertices()[v], t.vertices()[v], "label '" + t.edges()[e].label + "' repeats in one floret"};
    florets.emplace_back(v, std::move(labels));
  }
  for (std::size_t a = 0; a < florets.size(); ++a)
    for (std::size_t b = a + 1; b < florets.size(); ++b) {
      const auto& x = florets[a].second;
      const auto& y = florets[b].second;
      if (x == y) continue;
      for (const auto& l : x)
        if (y.count(l))
          return {false, t.vertices()[florets[a].first], t.vertices()[florets[b].first],
                  "florets share label '" + l + "' without being equal"};
    }
  return {};
}

// ---------------------------------------------------------------------------

StageLayout::StageLayout(std::vector<std::vector<std::string>> stages) : stages_(std::move(stages)) {
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    if (stages_[s].empty()) throw Error(ErrorCode::InvalidTree, "empty stage");
    for (const auto& l : stages_[s])
      if (!where_.emplace(l, s).second) throw Error(ErrorCode::InvalidTree, "label '" + l + "' in two stages");
    dimension_ += stages_[s].size() - 1;
  }
}

ParamBox StageLayout::box() const {
  std::vector<std::vector<std::size_t>> groups;
  std::size_t c = 0;
  for (const auto& stage : stages_) {
    if (stage.size() > 1) {
      std::vector<std::size_t> g(stage.size() - 1);
      std::iota(g.begin(), g.end(), c);
      groups.push_back(std::move(g));
    }
    c += stage.size() - 1;
  }
  return ParamBox(std::vector<Interval>(dimension_, Interval{Rational(0), Rational(1)}), std::move(groups));
}

std::vector<std::string> StageLayout::coordinates() const {
  std::vector<std::string> out;
  for (const auto& stage : stages_) out.insert(out.end(), stage.begin(), stage.end() - 1);
  return out;
}

ExactPoint StageLayout::coordinates_of(const std::map<std::string, Rational>& labels) const {
  ExactPoint out;
  for (const auto& name : coordinates()) {
    auto it = labels.find(name);
    if (it == labels.end()) throw Error(ErrorCode::InvalidArgument, "no value for label '" + name + "'");
    out.push_back(it->second);
  }
  return out;
}

StageLayout stage_layout(const StagedTree& t) {
  const auto check = validate_staged(t);
  if (!check) throw Error(ErrorCode::InvalidTree, check.detail);
  std::vector<std::vector<std::string>> stages;
  std::unordered_set<std::string> seen;
  for (auto v : t.preorder()) {
    if (t.is_leaf(v)) continue;
    const auto& first = t.edges()[t.floret(v).front()].label;
    if (seen.count(first)) continue;
    std::vector<std::string> stage;
    for (auto e : t.floret(v)) {
      stage.push_back(t.edges()[e].label);
      seen.insert(t.edges()[e].label);
    }
    stages.push_back(std::move(stage));
  }
  return StageLayout(std::move(stages));
}

StageLayout joint_layout(const std::vector<const StagedTree*>& trees) {
  std::vector<std::vector<std::string>> stages;
  std::unordered_map<std::string, std::size_t> where;
  for (const auto* t : trees) {
    const auto layout = stage_layout(*t);
    for (const auto& stage : layout.stages()) {
      auto it = where.find(stage.front());
      if (it != where.end()) {
        const std::set<std::string> a(stage.begin(), stage.end());
        const std::set<std::string> b(stages[it->second].begin(), stages[it->second].end());
        if (a != b) throw Error(ErrorCode::InvalidTree, "label '" + stage.front() + "' belongs to different stages");
        continue;
      }
      for (const auto& l : stage)
        if (where.count(l)) throw Error(ErrorCode::InvalidTree, "label '" + l + "' belongs to different stages");
      for (const auto& l : stage) where.emplace(l, stages.size());
      stages.push_back(stage);
    }
  }
  return StageLayout(std::move(stages));
}

namespace {

std::vector<std::vector<std::string>> path_labels(const StagedTree& t) {
  std::vector<std::vector<std::string>> out;
  for (const auto& leaf : t.paths()) {
    std::vector<std::string> labels;
    for (auto e : t.path_edges(t.vertices().position(leaf))) labels.push_back(t.edges()[e].label);
    out.push_back(std::move(labels));
  }
  return out;
}

template <class S>
S label_product(const std::vector<std::string>& labels, const std::unordered_map<std::string, S>& values) {
  S out(1);
  for (const auto& l : labels) {
    auto it = values.find(l);
    if (it == values.end()) throw Error(ErrorCode::InvalidArgument, "no value for label '" + l + "'");
    out *= it->second;
  }
  return out;
}

std::vector<Rational> path_probabilities(const std::vector<std::vector<std::string>>& labels,
                                         const std::unordered_map<std::string, Rational>& values) {
  std::vector<Rational> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(label_product(l, values));
  return out;
}

}  // namespace

ParametricModel tree_model(const StagedTree& t) { return tree_model(t, stage_layout(t)); }

ParametricModel tree_model(const StagedTree& t, const StageLayout& layout) {
  const auto check = validate_staged(t);
  if (!check) throw Error(ErrorCode::InvalidTree, check.detail);
  auto labels = path_labels(t);
  for (const auto& path : labels)
    for (const auto& l : path)
      if (!layout.contains(l)) throw Error(ErrorCode::InvalidArgument, "label '" + l + "' missing from the layout");
  return ParametricModel::generic(t.paths(), layout.box(), [layout, labels](auto theta) {
    using S = std::remove_const_t<typename decltype(theta)::value_type>;
    const auto values = layout.label_values<S>(theta);
    std::vector<S> out;
    out.reserve(labels.size());
    for (const auto& path : labels) out.push_back(label_product(path, values));
    return out;
  });
}

// ---------------------------------------------------------------------------

TreeDecomposition decompose(const StagedTree& t, const std::vector<std::string>& cut) {
  std::vector<bool> in_cut(t.vertices().size(), false);
  for (const auto& c : cut) {
    const auto v = t.vertices().find(c);
    if (!v) throw Error(ErrorCode::InvalidCut, "'" + c + "' is not a vertex");
    if (in_cut[*v]) throw Error(ErrorCode::InvalidCut, "'" + c + "' listed twice");
    in_cut[*v] = true;
  }
  std::vector<std::size_t> assignment;
  std::vector<std::size_t> order;  // cut vertices in preorder
  for (auto v : t.preorder())
    if (in_cut[v]) order.push_back(v);
  std::vector<std::string> ordered;
  for (auto v : order) ordered.push_back(t.vertices()[v]);
  const CategorySet meta(ordered);

  for (const auto& leaf : t.paths()) {
    const std::size_t lv = t.vertices().position(leaf);
    std::vector<std::size_t> hits;
    if (in_cut[t.vertices().position(t.root())]) hits.push_back(t.vertices().position(t.root()));
    for (auto e : t.path_edges(lv)) {
      const std::size_t to = t.vertices().position(t.edges()[e].to);
      if (in_cut[to]) hits.push_back(to);
    }
    if (hits.size() != 1)
      throw Error(ErrorCode::InvalidCut, "path to '" + leaf + "' meets the cut " + std::to_string(hits.size()) + " times");
    assignment.push_back(meta.position(t.vertices()[hits.front()]));
  }
  TreeDecomposition d;
  d.cut = std::move(ordered);
  d.p = mapping_from_positions(t.paths(), meta, std::move(assignment));
  for (auto v : order) {
    std::vector<std::string> ids;
    for (auto u : t.subtree(v)) ids.push_back(t.vertices()[u]);
    d.subtrees.push_back(std::move(ids));
  }
  return d;
}

namespace {

// Number of edges of path i lying in S (edges down to the cut vertex).
std::size_t s_depth(const StagedTree& t, const TreeDecomposition& dec, std::size_t path) {
  const auto& cut_vertex = dec.p.codomain()[dec.p.image(path)];
  return t.path_edges(t.vertices().position(cut_vertex)).size();
}

}  // namespace

PathFactorization factorize(const StagedTree& t, const TreeDecomposition& dec) {
  if (!(dec.p.domain() == t.paths())) throw Error(ErrorCode::InvalidCut, "decomposition belongs to another tree");
  PathFactorization f;
  for (std::size_t i = 0; i < t.paths().size(); ++i) {
    const auto edges = t.path_edges(t.vertices().position(t.paths()[i]));
    const std::size_t depth = s_depth(t, dec, i);
    std::vector<std::string> s, rest;
    for (std::size_t n = 0; n < edges.size(); ++n) (n < depth ? s : rest).push_back(t.edges()[edges[n]].label);
    f.s_labels.push_back(std::move(s));
    f.t_labels.push_back(std::move(rest));
  }
  return f;
}

FactorValues factor_values(const StagedTree& t, const TreeDecomposition& dec, const StageLayout& layout,
                           std::span<const Rational> theta) {
  const auto f = factorize(t, dec);
  const auto values = layout.label_values<Rational>(theta);
  FactorValues out;
  out.s.assign(dec.cut.size(), Rational(0));
  for (std::size_t i = 0; i < f.t_labels.size(); ++i) {
    out.t.push_back(label_product(f.t_labels[i], values));
    out.s[dec.p.image(i)] = label_product(f.s_labels[i], values);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_bijection(const TreeDecomposition& d1, const TreeDecomposition& d2, const CutBijection& phi) {
  if (d1.cut.size() != d2.cut.size() || phi.size() != d1.cut.size())
    throw Error(ErrorCode::NotBijection, "decompositions need the same number of subtrees");
  std::set<std::string> image;
  for (const auto& k : d1.cut) {
    auto it = phi.find(k);
    if (it == phi.end()) throw Error(ErrorCode::NotBijection, "no image for '" + k + "'");
    if (std::find(d2.cut.begin(), d2.cut.end(), it->second) == d2.cut.end())
      throw Error(ErrorCode::NotBijection, "'" + it->second + "' is not a cut vertex of the second tree");
    if (!image.insert(it->second).second) throw Error(ErrorCode::NotBijection, "'" + it->second + "' is hit twice");
  }
}

std::vector<std::string> root_labels(const StagedTree& t, const std::string& v) {
  std::vector<std::string> out;
  for (auto e : t.path_edges(t.vertices().position(v))) out.push_back(t.edges()[e].label);
  return out;
}

}  // namespace

bool staged_meta_consistent(const StagedTree& t1, const TreeDecomposition& d1, const StagedTree& t2,
                            const TreeDecomposition& d2, const CutBijection& phi, const StagedMetaOptions& opts) {
  check_bijection(d1, d2, phi);
  std::vector<std::vector<std::string>> s1, s2;
  for (const auto& k : d1.cut) {
    s1.push_back(root_labels(t1, k));
    s2.push_back(root_labels(t2, phi.at(k)));
  }
  if (opts.mode == MetaMode::Symbolic) {
    for (std::size_t k = 0; k < s1.size(); ++k) {
      auto a = s1[k], b = s2[k];
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) return false;
    }
    return true;
  }
  if (opts.transport) {
    const auto layout = stage_layout(t1);
    for (const auto& point : random_stage_points(layout, opts.samples, opts.seed)) {
      const auto exact = layout.label_values<Rational>(point);
      std::unordered_map<std::string, double> v1;
      for (const auto& [l, x] : exact) v1.emplace(l, x.to_double());
      const auto v2 = opts.transport(v1);
      for (std::size_t k = 0; k < s1.size(); ++k)
        if (!(std::abs(label_product(s1[k], v1) - label_product(s2[k], v2)) <= opts.tol)) return false;
    }
    return true;
  }
  const auto layout = joint_layout({&t1, &t2});
  for (const auto& point : random_stage_points(layout, opts.samples, opts.seed)) {
    const auto v = layout.label_values<Rational>(point);
    for (std::size_t k = 0; k < s1.size(); ++k) {
      const Rational gap = label_product(s1[k], v) - label_product(s2[k], v);
      if (!(std::abs(gap.to_double()) <= opts.tol) || (opts.tol == 0.0 && !gap.is_zero())) return false;
    }
  }
  return true;
}

StagedCombination staged_combine(const StagedTree& t1, const TreeDecomposition& d1, const StagedTree& t2,
                                 const TreeDecomposition& d2, const CutBijection& phi, const StagedMetaOptions& opts) {
  if (!staged_meta_consistent(t1, d1, t2, d2, phi, opts))
    throw Error(ErrorCode::NotMetaConsistent, "root-tree path probabilities differ");
  std::vector<std::string> vertices(t1.vertices().begin(), t1.vertices().end());
  std::vector<TreeEdge> edges = t1.edges();
  // leaf id of the combined tree -> (path of t1, path of t2)
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> pairs;

  for (std::size_t i = 0; i < t1.paths().size(); ++i) {
    const std::string& leaf = t1.paths()[i];
    const std::string& k2 = phi.at(d1.p.codomain()[d1.p.image(i)]);
    const std::size_t root2 = t2.vertices().position(k2);
    auto rename = [&](std::size_t v) { return v == root2 ? leaf : leaf + "/" + t2.vertices()[v]; };
    for (auto v : t2.subtree(root2)) {
      if (v != root2) {
        const auto& e = t2.edges()[*t2.parent_edge(v)];
        vertices.push_back(rename(v));
        edges.push_back({rename(t2.vertices().position(e.from)), rename(v), e.label});
      }
      if (t2.is_leaf(v)) pairs.emplace(rename(v), std::make_pair(i, t2.paths().position(t2.vertices()[v])));
    }
  }

  StagedTree tree(std::move(vertices), std::move(edges), t1.root());
  const auto check = validate_staged(tree);
  if (!check) throw Error(ErrorCode::InvalidTree, "combined tree breaks the stage condition: " + check.detail);
  std::vector<std::pair<std::size_t, std::size_t>> path_pairs;
  for (const auto& leaf : tree.paths()) path_pairs.push_back(pairs.at(leaf));
  auto dec = decompose(tree, d1.cut);
  return StagedCombination{std::move(tree), std::move(dec), std::move(path_pairs)};
}

CategoryMapping pulled_back_mapping(const TreeDecomposition& d1, const TreeDecomposition& d2,
                                    const CutBijection& phi) {
  check_bijection(d1, d2, phi);
  std::unordered_map<std::string, std::string> inverse;
  for (const auto& [a, b] : phi) inverse.emplace(b, a);
  const CategorySet meta(d1.cut);
  std::vector<std::size_t> a;
  for (std::size_t j = 0; j < d2.p.domain().size(); ++j)
    a.push_back(meta.position(inverse.at(d2.p.codomain()[d2.p.image(j)])));
  return mapping_from_positions(d2.p.domain(), meta, std::move(a));
}

// ---------------------------------------------------------------------------

std::vector<ExactPoint> random_stage_points(const StageLayout& layout, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ExactPoint> out;
  for (std::size_t n = 0; n < count; ++n) {
    ExactPoint point;
    for (const auto& stage : layout.stages()) {
      std::vector<std::int64_t> w(stage.size());
      std::int64_t total = 0;
      for (auto& x : w) total += (x = rng.between(1, 1000));
      for (std::size_t s = 0; s + 1 < stage.size(); ++s) point.push_back(Rational(w[s], total));
    }
    out.push_back(std::move(point));
  }
  return out;
}

namespace {

bool same_values(std::vector<Rational> a, std::vector<Rational> b, const std::optional<std::vector<std::size_t>>& bij,
                 double tol) {
  if (a.size() != b.size()) return false;
  if (bij) {
    std::vector<Rational> permuted(a.size());
    for (std::size_t n = 0; n < a.size(); ++n) permuted[n] = b[(*bij)[n]];
    b = std::move(permuted);
  } else {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
  }
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (tol == 0.0) {
      if (a[n] != b[n]) return false;
    } else if (!(std::abs((a[n] - b[n]).to_double()) <= tol)) {
      return false;
    }
  }
  return true;
}

// Enumerates stage-respecting renamings of the second layout's labels onto
// the first layout's labels.
class RenamingSearch {
 public:
  RenamingSearch(const StageLayout& l1, const StageLayout& l2, std::size_t cap) : l1_(l1), l2_(l2), cap_(cap) {}

  template <class Accept>
  bool run(Accept accept) {
    if (l1_.stages().size() != l2_.stages().size()) return false;
    used_.assign(l1_.stages().size(), false);
    return assign(0, accept);
  }

 private:
  template <class Accept>
  bool assign(std::size_t s2, Accept& accept) {
    if (tried_ >= cap_) return false;
    if (s2 == l2_.stages().size()) {
      ++tried_;
      return accept(renaming_);
    }
    const auto& stage2 = l2_.stages()[s2];
    for (std::size_t s1 = 0; s1 < l1_.stages().size(); ++s1) {
      if (used_[s1] || l1_.stages()[s1].size() != stage2.size()) continue;
      used_[s1] = true;
      auto target = l1_.stages()[s1];
      std::sort(target.begin(), target.end());
      do {
        for (std::size_t n = 0; n < stage2.size(); ++n) renaming_[stage2[n]] = target[n];
        if (assign(s2 + 1, accept)) return true;
        if (tried_ >= cap_) return false;
      } while (std::next_permutation(target.begin(), target.end()));
      used_[s1] = false;
    }
    return false;
  }

  const StageLayout& l1_;
  const StageLayout& l2_;
  std::size_t cap_;
  std::size_t tried_ = 0;
  std::vector<bool> used_;
  std::unordered_map<std::string, std::string> renaming_;
};

}  // namespace

bool models_equal(const StagedTree& t1, const StagedTree& t2, const ModelsEqualOptions& opts) {
  if (t1.paths().size() != t2.paths().size()) return false;
  if (opts.path_bijection && opts.path_bijection->size() != t1.paths().size())
    throw Error(ErrorCode::InvalidArgument, "path bijection has the wrong length");
  const auto l1 = stage_layout(t1);
  const auto l2 = stage_layout(t2);
  const auto labels1 = path_labels(t1);
  const auto labels2 = path_labels(t2);
  const auto points = random_stage_points(l1, opts.samples, opts.seed);
  std::vector<std::unordered_map<std::string, Rational>> values;
  std::vector<std::vector<Rational>> probs1;
  for (const auto& point : points) {
    values.push_back(l1.label_values<Rational>(point));
    probs1.push_back(path_probabilities(labels1, values.back()));
  }

  auto accept = [&](const std::unordered_map<std::string, std::string>& renaming) {
    for (std::size_t n = 0; n < points.size(); ++n) {
      std::unordered_map<std::string, Rational> v2;
      for (const auto& [from, to] : renaming) v2.emplace(from, values[n].at(to));
      if (!same_values(probs1[n], path_probabilities(labels2, v2), opts.path_bijection, opts.tol)) return false;
    }
    return true;
  };

  // Same label names first.
  bool names_match = l1.stages().size() == l2.stages().size();
  std::unordered_map<std::string, std::string> identity;
  for (const auto& stage : l2.stages())
    for (const auto& l : stage) {
      identity.emplace(l, l);
      if (!l1.contains(l)) names_match = false;
    }
  if (names_match && accept(identity)) return true;
  return RenamingSearch(l1, l2, opts.max_renamings).run(accept);
}

}  // namespace mcomb
