#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ratt {

enum class TaskKind { freeform, game24, codegen, qa };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

/// The input x of a reasoning run.
struct TaskPrompt {
  std::string text;
  TaskKind task_kind = TaskKind::freeform;

  /// Throws invalid_input when the text is empty.
  void validate() const;
};

using NodeId = std::uint64_t;

enum class NodeRole { root, strategy, integrated, final };

std::string_view to_string(NodeRole role);
NodeRole node_role_from_string(std::string_view name);

struct ThoughtNode {
  NodeId id = 0;
  std::size_t layer = 0;
  std::size_t strategy_index = 0;
  std::string raw_text;
  std::optional<std::string> refined_text;
  NodeRole role = NodeRole::strategy;
  // Index into the owning trace's retrieval records.
  std::optional<std::size_t> retrieval_ref;
  std::optional<double> lookahead_score;
  // Free-form annotations such as "lookahead_parse_warning".
  std::vector<std::string> flags;

  const std::string& text() const { return refined_text ? *refined_text : raw_text; }
  bool has_flag(std::string_view flag) const;

  friend bool operator==(const ThoughtNode&, const ThoughtNode&) = default;
};

struct Edge {
  NodeId parent = 0;
  NodeId child = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Root-to-leaf node sequence.
struct Branch {
  std::vector<NodeId> node_sequence;
};

/// A node identity that is unique across trees in one process.
struct QualifiedNodeId {
  std::uint64_t tree_instance = 0;
  NodeId node = 0;

  friend bool operator==(const QualifiedNodeId&, const QualifiedNodeId&) = default;
};

/// Rooted thought tree. Node ids are dense integers assigned in insertion
/// order starting at 0 for the root, so the same sequence of calls always
/// yields the same ids. Each tree additionally carries a process-unique
/// instance number that is not part of its value (equality, persistence).
class ThoughtTree {
 public:
  static ThoughtTree create(const TaskPrompt& prompt);

  /// Rebuilds a tree from persisted nodes and edges, validating every
  /// structural invariant. Throws schema on any violation.
  static ThoughtTree restore(NodeId root_id, std::vector<ThoughtNode> nodes,
                             std::vector<Edge> edges);

  NodeId add_node(NodeId parent_id, std::string text, std::size_t strategy_index,
                  NodeRole role);

  /// Explicit edge insertion; only used to surface structure errors, since
  /// every node already has its parent fixed by add_node.
  void add_edge(NodeId parent_id, NodeId child_id);

  NodeId root_id() const { return root_id_; }
  std::uint64_t instance_id() const { return instance_; }
  QualifiedNodeId qualified(NodeId id) const { return {instance_, id}; }
  const ThoughtNode& node(NodeId id) const;
  ThoughtNode& node(NodeId id);
  bool contains(NodeId id) const;

  std::optional<NodeId> parent_of(NodeId id) const;
  std::vector<NodeId> children_of(NodeId id) const;

  Branch branch_of(NodeId leaf_id) const;
  std::vector<ThoughtNode> layer_nodes(std::size_t layer) const;
  std::vector<NodeId> leaves() const;

  std::size_t size() const { return nodes_.size(); }
  const std::vector<ThoughtNode>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t depth() const;

  friend bool operator==(const ThoughtTree& a, const ThoughtTree& b) {
    return a.root_id_ == b.root_id_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  ThoughtTree();
  std::size_t slot(NodeId id) const;

  std::uint64_t instance_ = 0;
  NodeId root_id_ = 0;
  std::vector<ThoughtNode> nodes_;
  std::vector<Edge> edges_;
  // parents_[slot] is the parent id of nodes_[slot]; root maps to itself.
  std::vector<NodeId> parents_;
};

/// Free-function forms mirroring the tree's member operations.
inline ThoughtTree new_tree(const TaskPrompt& prompt) { return ThoughtTree::create(prompt); }
inline NodeId add_node(ThoughtTree& tree, NodeId parent_id, std::string text,
                       std::size_t strategy_index, NodeRole role) {
  return tree.add_node(parent_id, std::move(text), strategy_index, role);
}
inline Branch branch_of(const ThoughtTree& tree, NodeId leaf_id) {
  return tree.branch_of(leaf_id);
}
inline std::vector<ThoughtNode> layer_nodes(const ThoughtTree& tree, std::size_t layer) {
  return tree.layer_nodes(layer);
}

}  // namespace ratt
