#pragma once

// Staged trees: labeled rooted trees whose florets carry equal or disjoint
// label sets, their path models, decompositions (S, T_1, ..., T_m) and the
// Markov combination of two trees.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "markovcomb/parametric.hpp"

namespace mcomb {

struct TreeEdge {
  std::string from, to, label;
};

class StagedTree {
 public:
  // Checks the rooted-tree shape only; the stage condition is checked by
  // validate_staged. Throws InvalidTree.
  StagedTree(std::vector<std::string> vertices, std::vector<TreeEdge> edges, std::string root);

  const CategorySet& vertices() const { return vertices_; }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  const std::string& root() const { return root_; }

  // Outgoing edge positions of a vertex, in input order.
  const std::vector<std::size_t>& floret(std::size_t v) const { return children_[v]; }
  const std::vector<std::size_t>& floret(std::string_view v) const { return floret(vertices_.position(v)); }
  bool is_leaf(std::size_t v) const { return children_[v].empty(); }
  // Position of the incoming edge, none for the root.
  std::optional<std::size_t> parent_edge(std::size_t v) const { return parent_[v]; }

  // Vertices in preorder, children visited in edge order.
  const std::vector<std::size_t>& preorder() const { return preorder_; }
  // Root-to-leaf paths, each identified by its leaf, in preorder.
  const CategorySet& paths() const { return paths_; }
  // Edge positions from the root down to v.
  std::vector<std::size_t> path_edges(std::size_t v) const;
  // Descendants of v including v, in preorder.
  std::vector<std::size_t> subtree(std::size_t v) const;

 private:
  CategorySet vertices_;
  std::vector<TreeEdge> edges_;
  std::string root_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::size_t> preorder_;
  CategorySet paths_;
};

struct StageCheck {
  bool valid = true;
  std::string first, second;  // offending florets (vertex ids)
  std::string detail;
  explicit operator bool() const { return valid; }
};

StageCheck validate_staged(const StagedTree& t);

// Distinct floret label sets and the resulting parameter layout: every label
// of a stage except the last is a free coordinate; the last one is
// 1 minus the others.
class StageLayout {
 public:
  StageLayout() = default;
  explicit StageLayout(std::vector<std::vector<std::string>> stages);

  const std::vector<std::vector<std::string>>& stages() const { return stages_; }
  std::size_t dimension() const { return dimension_; }
  ParamBox box() const;
  bool contains(std::string_view label) const { return where_.count(std::string(label)) > 0; }
  // Free coordinate names in order.
  std::vector<std::string> coordinates() const;

  template <class S>
  std::unordered_map<std::string, S> label_values(std::span<const S> theta) const {
    std::unordered_map<std::string, S> out;
    std::size_t c = 0;
    for (const auto& stage : stages_) {
      S rest(1);
      for (std::size_t n = 0; n + 1 < stage.size(); ++n) {
        out.emplace(stage[n], theta[c]);
        rest -= theta[c++];
      }
      out.emplace(stage.back(), rest);
    }
    return out;
  }

  // Inverse of label_values for a full assignment.
  ExactPoint coordinates_of(const std::map<std::string, Rational>& labels) const;

 private:
  std::vector<std::vector<std::string>> stages_;
  std::unordered_map<std::string, std::size_t> where_;
  std::size_t dimension_ = 0;
};

// Stages of one tree in order of first appearance.
StageLayout stage_layout(const StagedTree& t);
// Union of the stages of several trees; a label shared by two trees must
// belong to the same stage in both. Throws InvalidTree otherwise.
StageLayout joint_layout(const std::vector<const StagedTree*>& trees);

// f_i = product of the labels on path i. Throws InvalidTree unless staged.
ParametricModel tree_model(const StagedTree& t);
ParametricModel tree_model(const StagedTree& t, const StageLayout& layout);

struct TreeDecomposition {
  std::vector<std::string> cut;  // leaves of S, in preorder of T
  CategoryMapping p;             // paths(T) -> cut
  std::vector<std::vector<std::string>> subtrees;  // vertex ids of T_k, per cut vertex
};

// Throws InvalidCut unless every root-to-leaf path meets the cut exactly once.
TreeDecomposition decompose(const StagedTree& t, const std::vector<std::string>& cut);

struct PathFactorization {
  std::vector<std::vector<std::string>> s_labels;  // per path, labels in E(S)
  std::vector<std::vector<std::string>> t_labels;  // per path, labels in E(T_p(i))
};

PathFactorization factorize(const StagedTree& t, const TreeDecomposition& dec);

struct FactorValues {
  std::vector<Rational> s;  // per cut vertex
  std::vector<Rational> t;  // per path
};
FactorValues factor_values(const StagedTree& t, const TreeDecomposition& dec, const StageLayout& layout,
                           std::span<const Rational> theta);

// phi maps cut vertices of the first decomposition to cut vertices of the
// second.
using CutBijection = std::map<std::string, std::string>;

// Maps label values of the first tree to label values of the second.
using LabelTransport =
    std::function<std::unordered_map<std::string, double>(const std::unordered_map<std::string, double>&)>;

enum class MetaMode { Symbolic, Numeric };

struct StagedMetaOptions {
  MetaMode mode = MetaMode::Numeric;
  std::size_t samples = 32;
  std::uint64_t seed = 1;
  double tol = tolerance::consistency;
  LabelTransport transport;  // numeric mode only; labels shared by name when empty
};

bool staged_meta_consistent(const StagedTree& t1, const TreeDecomposition& d1, const StagedTree& t2,
                            const TreeDecomposition& d2, const CutBijection& phi, const StagedMetaOptions& opts = {});

struct StagedCombination {
  StagedTree tree;
  TreeDecomposition decomposition;  // (S, T''_1, ..., T''_m)
  // For each path of the combined tree, positions of the matching paths in
  // the first and second tree.
  std::vector<std::pair<std::size_t, std::size_t>> path_pairs;
};

// Attaches a copy of T'_phi(k) at every leaf of T_k. Copied vertices are
// named "leaf/vertex"; labels are kept. Throws NotMetaConsistent.
StagedCombination staged_combine(const StagedTree& t1, const TreeDecomposition& d1, const StagedTree& t2,
                                 const TreeDecomposition& d2, const CutBijection& phi,
                                 const StagedMetaOptions& opts = {});

// The mapping of the second tree's paths onto the first tree's cut, i.e.
// phi^{-1} composed with the second decomposition.
CategoryMapping pulled_back_mapping(const TreeDecomposition& d1, const TreeDecomposition& d2, const CutBijection& phi);

struct ModelsEqualOptions {
  std::size_t samples = 50;
  std::uint64_t seed = 7;
  double tol = 0.0;  // 0 compares exactly
  // paths(t1)[n] corresponds to paths(t2)[bijection[n]]; when absent the
  // path probabilities are compared as multisets.
  std::optional<std::vector<std::size_t>> path_bijection;
  std::size_t max_renamings = 100000;
};

// True when some label renaming (stage to stage) makes the path
// probabilities agree at every sampled rational parameter.
bool models_equal(const StagedTree& t1, const StagedTree& t2, const ModelsEqualOptions& opts = {});

// Seeded rational points of a layout: each stage gets positive integer
// weights in [1, 1000] normalised to sum 1.
std::vector<ExactPoint> random_stage_points(const StageLayout& layout, std::size_t count, std::uint64_t seed);

}  // namespace mcomb
