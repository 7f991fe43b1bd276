#include "ratt/core/thought_tree.hpp"

#include <algorithm>
#include <atomic>
#include <string>
#include <tuple>

#include "ratt/core/error.hpp"

namespace ratt {

namespace {

std::atomic<std::uint64_t> next_instance{1};

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::invalid_state: return "invalid-state";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::structure: return "structure";
    case ErrorKind::degenerate_vector: return "degenerate-vector";
    case ErrorKind::index_corruption: return "index-corruption";
    case ErrorKind::provider_unavailable: return "provider-unavailable";
    case ErrorKind::provider_protocol: return "provider-protocol";
    case ErrorKind::script_mismatch: return "script-mismatch";
    case ErrorKind::schema: return "schema";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::freeform: return "freeform";
    case TaskKind::game24: return "game24";
    case TaskKind::codegen: return "codegen";
    case TaskKind::qa: return "qa";
  }
  return "freeform";
}

TaskKind task_kind_from_string(std::string_view name) {
  if (name == "freeform") return TaskKind::freeform;
  if (name == "game24") return TaskKind::game24;
  if (name == "codegen") return TaskKind::codegen;
  if (name == "qa") return TaskKind::qa;
  throw Error(ErrorKind::invalid_input, "unknown task kind '" + std::string(name) + "'");
}

void TaskPrompt::validate() const {
  if (text.empty()) throw Error(ErrorKind::invalid_input, "task prompt text is empty");
}

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::root: return "root";
    case NodeRole::strategy: return "strategy";
    case NodeRole::integrated: return "integrated";
    case NodeRole::final: return "final";
  }
  return "strategy";
}

NodeRole node_role_from_string(std::string_view name) {
  if (name == "root") return NodeRole::root;
  if (name == "strategy") return NodeRole::strategy;
  if (name == "integrated") return NodeRole::integrated;
  if (name == "final") return NodeRole::final;
  throw Error(ErrorKind::schema, "unknown node role '" + std::string(name) + "'");
}

bool ThoughtNode::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

ThoughtTree::ThoughtTree() : instance_(next_instance.fetch_add(1)) {}

ThoughtTree ThoughtTree::create(const TaskPrompt& prompt) {
  prompt.validate();
  ThoughtTree tree;
  ThoughtNode root;
  root.id = 0;
  root.layer = 0;
  root.role = NodeRole::root;
  root.raw_text = prompt.text;
  tree.root_id_ = root.id;
  tree.nodes_.push_back(std::move(root));
  tree.parents_.push_back(0);
  return tree;
}

ThoughtTree ThoughtTree::restore(NodeId root_id, std::vector<ThoughtNode> nodes,
                                 std::vector<Edge> edges) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::schema, what); };
  if (nodes.empty()) fail("tree has no nodes");
  std::sort(nodes.begin(), nodes.end(),
            [](const ThoughtNode& a, const ThoughtNode& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != i) fail("node ids are not dense from 0");
  }
  if (root_id != 0) fail("root id must be 0");
  if (nodes[0].role != NodeRole::root || nodes[0].layer != 0) fail("root node malformed");
  if (edges.size() + 1 != nodes.size()) fail("edge count must equal node count - 1");

  ThoughtTree tree;
  tree.root_id_ = root_id;
  tree.parents_.assign(nodes.size(), 0);
  std::vector<bool> has_parent(nodes.size(), false);
  for (const auto& e : edges) {
    if (e.parent >= nodes.size() || e.child >= nodes.size()) fail("edge references a missing node");
    if (e.child == root_id) fail("root cannot have a parent");
    if (has_parent[e.child]) fail("node has more than one parent");
    // Parents are inserted before their children, which rules out cycles.
    if (e.parent >= e.child) fail("edge does not follow insertion order");
    if (nodes[e.child].layer != nodes[e.parent].layer + 1) fail("layer rule violated on edge");
    has_parent[e.child] = true;
    tree.parents_[e.child] = e.parent;
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].role == NodeRole::root) fail("more than one root");
  }
  tree.nodes_ = std::move(nodes);
  tree.edges_ = std::move(edges);
  return tree;
}

std::size_t ThoughtTree::slot(NodeId id) const {
  if (id >= nodes_.size()) {
    throw Error(ErrorKind::not_found, "node " + std::to_string(id) + " is not in the tree");
  }
  return static_cast<std::size_t>(id);
}

bool ThoughtTree::contains(NodeId id) const { return id < nodes_.size(); }

const ThoughtNode& ThoughtTree::node(NodeId id) const { return nodes_[slot(id)]; }
ThoughtNode& ThoughtTree::node(NodeId id) { return nodes_[slot(id)]; }

NodeId ThoughtTree::add_node(NodeId parent_id, std::string text, std::size_t strategy_index,
                             NodeRole role) {
  const std::size_t parent_slot = slot(parent_id);
  if (role == NodeRole::root) throw Error(ErrorKind::structure, "a tree has exactly one root");
  ThoughtNode n;
  n.id = nodes_.size();
  n.layer = nodes_[parent_slot].layer + 1;
  n.strategy_index = strategy_index;
  n.raw_text = std::move(text);
  n.role = role;
  if (role == NodeRole::integrated) {
    for (const auto& other : nodes_) {
      if (other.layer == n.layer && other.role == NodeRole::integrated) {
        throw Error(ErrorKind::structure,
                    "layer " + std::to_string(n.layer) + " already has an integrated node");
      }
    }
  }
  edges_.push_back({parent_id, n.id});
  parents_.push_back(parent_id);
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

void ThoughtTree::add_edge(NodeId parent_id, NodeId child_id) {
  slot(parent_id);
  slot(child_id);
  for (NodeId cur = parent_id;; cur = parents_[cur]) {
    if (cur == child_id) {
      throw Error(ErrorKind::structure, "edge " + std::to_string(parent_id) + "->" +
                                            std::to_string(child_id) + " would create a cycle");
    }
    if (cur == root_id_) break;
  }
  throw Error(ErrorKind::structure,
              "node " + std::to_string(child_id) + " already has a parent; re-parenting is not supported");
}

std::optional<NodeId> ThoughtTree::parent_of(NodeId id) const {
  const auto s = slot(id);
  if (id == root_id_) return std::nullopt;
  return parents_[s];
}

std::vector<NodeId> ThoughtTree::children_of(NodeId id) const {
  slot(id);
  std::vector<NodeId> out;
  for (const auto& e : edges_) {
    if (e.parent == id) out.push_back(e.child);
  }
  return out;
}

Branch ThoughtTree::branch_of(NodeId leaf_id) const {
  slot(leaf_id);
  for (const auto& e : edges_) {
    if (e.parent == leaf_id) {
      throw Error(ErrorKind::invalid_argument,
                  "node " + std::to_string(leaf_id) + " has children and is not a leaf");
    }
  }
  Branch b;
  for (NodeId cur = leaf_id;; cur = parents_[cur]) {
    b.node_sequence.push_back(cur);
    if (cur == root_id_) break;
  }
  std::reverse(b.node_sequence.begin(), b.node_sequence.end());
  return b;
}

std::vector<ThoughtNode> ThoughtTree::layer_nodes(std::size_t layer) const {
  std::vector<ThoughtNode> out;
  for (const auto& n : nodes_) {
    if (n.layer == layer) out.push_back(n);
  }
  std::sort(out.begin(), out.end(), [](const ThoughtNode& a, const ThoughtNode& b) {
    return std::tie(a.strategy_index, a.id) < std::tie(b.strategy_index, b.id);
  });
  return out;
}

std::vector<NodeId> ThoughtTree::leaves() const {
  std::vector<bool> internal(nodes_.size(), false);
  for (const auto& e : edges_) internal[e.parent] = true;
  std::vector<NodeId> out;
  for (const auto& n : nodes_) {
    if (!internal[n.id]) out.push_back(n.id);
  }
  return out;
}

std::size_t ThoughtTree::depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.layer);
  return d;
}

}  // namespace ratt
