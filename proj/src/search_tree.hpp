#pragma once

#include <optional>
#include <string>
#include <vector>

#include "action_kind.hpp"
#include "embedding.hpp"
#include "keypoints.hpp"

namespace autocap {

struct VideoAsset {
    std::string video_id;
    std::vector<std::string> frame_paths;
    double duration_s = 0.0;
    std::string category;  // one of the ten video categories; may be empty
};

// One state in the tree. The root carries no action and no description;
// every other node carries both.
struct SearchNode {
    int node_id = 0;
    std::optional<int> parent_id;
    std::optional<ActionCode> action;
    std::string action_prompt;
    std::string description;
    std::string focus_label;  // A2 focus detail; doubles as the distill observation label
    std::vector<KeyPoint> key_points;
    int visit_count = 0;
    double mc_value = 0.0;
    double sm_value = 0.0;
    // Optimistic initialization: fresh leaves score 1 until evaluated so
    // they stay selectable.
    double q_value = 1.0;
    bool evaluated = false;
    bool degenerate = false;  // produced nothing verifiable; pinned to MC = 0
    std::optional<EmbeddingVector> embedding;
};

// The mutable search tree. Single-writer: one mining worker owns a tree.
class Tree {
public:
    explicit Tree(VideoAsset video);

    const VideoAsset& video() const { return video_; }

    int add_child(int parent_id, ActionCode action, std::string action_prompt,
                  std::string description);

    const SearchNode& node(int node_id) const;
    SearchNode& node_mut(int node_id);
    bool has_node(int node_id) const;
    int size() const { return static_cast<int>(nodes_.size()); }

    const std::vector<int>& children(int node_id) const;
    bool is_leaf(int node_id) const { return children(node_id).empty(); }

    // Child-less nodes in ascending id order. The root counts only before
    // any expansion.
    std::vector<int> leaves() const;

    // Root-to-node path.
    std::vector<int> trajectory(int node_id) const;

    bool a1_executed() const;

    int iterations_done() const { return iterations_done_; }
    void set_iterations_done(int n) { iterations_done_ = n; }

    std::string serialize() const;
    static Tree deserialize(const std::string& bytes);

private:
    Tree() = default;

    VideoAsset video_;
    std::vector<SearchNode> nodes_;
    std::vector<std::vector<int>> children_;
    int iterations_done_ = 0;
};

bool trees_equal(const Tree& a, const Tree& b);

}  // namespace autocap
