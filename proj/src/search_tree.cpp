#include "search_tree.hpp"

#include <json.hpp>

#include "errors.hpp"

namespace autocap {

namespace {

using nlohmann::json;

constexpr int kTreeFormatVersion = 1;

json key_point_to_json(const KeyPoint& kp) {
    json q_list = json::array();
    for (const auto& q : kp.questions) {
        q_list.push_back({
            {"question", q.question_text},
            {"verdict_a", verdict_name(q.verdict_a)},
            {"verdict_b", verdict_name(q.verdict_b)},
            {"rationale_a", q.rationale_a},
            {"rationale_b", q.rationale_b},
        });
    }
    json doc = {
        {"kp_id", kp.kp_id},
        {"text", kp.text},
        {"category", kp_category_key(kp.category)},
        {"status", kp_status_name(kp.status)},
        {"questions", std::move(q_list)},
    };
    if (!kp.original_text.empty()) doc["original_text"] = kp.original_text;
    if (kp.category_defaulted) doc["category_defaulted"] = true;
    if (!kp.drop_reason.empty()) doc["drop_reason"] = kp.drop_reason;
    return doc;
}

Verdict verdict_from_name(const std::string& name) {
    if (name == "yes") return Verdict::yes;
    if (name == "no") return Verdict::no;
    return Verdict::error;
}

KeyPoint key_point_from_json(const json& doc) {
    KeyPoint kp;
    kp.kp_id = doc.at("kp_id").get<std::string>();
    kp.text = doc.at("text").get<std::string>();
    kp.original_text = doc.value("original_text", std::string{});
    if (auto cat = kp_category_from_key(doc.at("category").get<std::string>())) {
        kp.category = *cat;
    }
    kp.category_defaulted = doc.value("category_defaulted", false);
    kp.drop_reason = doc.value("drop_reason", std::string{});
    if (auto status = kp_status_from_name(doc.at("status").get<std::string>())) {
        kp.status = *status;
    }
    for (const auto& q_doc : doc.at("questions")) {
        VerificationQuestion q;
        q.question_text = q_doc.at("question").get<std::string>();
        q.verdict_a = verdict_from_name(q_doc.at("verdict_a").get<std::string>());
        q.verdict_b = verdict_from_name(q_doc.at("verdict_b").get<std::string>());
        q.rationale_a = q_doc.value("rationale_a", std::string{});
        q.rationale_b = q_doc.value("rationale_b", std::string{});
        kp.questions.push_back(std::move(q));
    }
    return kp;
}

}  // namespace

Tree::Tree(VideoAsset video) : video_(std::move(video)) {
    SearchNode root;
    root.node_id = 0;
    nodes_.push_back(std::move(root));
    children_.emplace_back();
}

int Tree::add_child(int parent_id, ActionCode action, std::string action_prompt,
                    std::string description) {
    if (!has_node(parent_id)) {
        throw Error(ErrorCode::unknown_parent, "no node " + std::to_string(parent_id));
    }
    SearchNode node;
    node.node_id = static_cast<int>(nodes_.size());
    node.parent_id = parent_id;
    node.action = action;
    node.action_prompt = std::move(action_prompt);
    node.description = std::move(description);
    const int id = node.node_id;
    nodes_.push_back(std::move(node));
    children_.emplace_back();
    children_[static_cast<std::size_t>(parent_id)].push_back(id);
    return id;
}

const SearchNode& Tree::node(int node_id) const {
    if (!has_node(node_id)) {
        throw Error(ErrorCode::unknown_node, "no node " + std::to_string(node_id));
    }
    return nodes_[static_cast<std::size_t>(node_id)];
}

SearchNode& Tree::node_mut(int node_id) {
    if (!has_node(node_id)) {
        throw Error(ErrorCode::unknown_node, "no node " + std::to_string(node_id));
    }
    return nodes_[static_cast<std::size_t>(node_id)];
}

bool Tree::has_node(int node_id) const {
    return node_id >= 0 && node_id < static_cast<int>(nodes_.size());
}

const std::vector<int>& Tree::children(int node_id) const {
    if (!has_node(node_id)) {
        throw Error(ErrorCode::unknown_node, "no node " + std::to_string(node_id));
    }
    return children_[static_cast<std::size_t>(node_id)];
}

std::vector<int> Tree::leaves() const {
    std::vector<int> out;
    for (int id = 0; id < size(); ++id) {
        if (children_[static_cast<std::size_t>(id)].empty()) out.push_back(id);
    }
    return out;
}

std::vector<int> Tree::trajectory(int node_id) const {
    if (!has_node(node_id)) {
        throw Error(ErrorCode::unknown_node, "no node " + std::to_string(node_id));
    }
    std::vector<int> path;
    int current = node_id;
    while (true) {
        path.push_back(current);
        const auto& n = nodes_[static_cast<std::size_t>(current)];
        if (!n.parent_id) break;
        current = *n.parent_id;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

bool Tree::a1_executed() const {
    for (const auto& n : nodes_) {
        if (n.action == ActionCode::a1_overall) return true;
    }
    return false;
}

std::string Tree::serialize() const {
    json nodes = json::array();
    for (const auto& n : nodes_) {
        json doc;
        doc["node_id"] = n.node_id;
        if (n.parent_id) doc["parent_id"] = *n.parent_id;
        if (n.action) doc["action"] = action_name(*n.action);
        doc["action_prompt"] = n.action_prompt;
        doc["description"] = n.description;
        if (!n.focus_label.empty()) doc["focus_label"] = n.focus_label;
        doc["visit_count"] = n.visit_count;
        doc["mc_value"] = n.mc_value;
        doc["sm_value"] = n.sm_value;
        doc["q_value"] = n.q_value;
        doc["evaluated"] = n.evaluated;
        if (n.degenerate) doc["degenerate"] = true;
        json kps = json::array();
        for (const auto& kp : n.key_points) kps.push_back(key_point_to_json(kp));
        doc["key_points"] = std::move(kps);
        if (n.embedding) doc["embedding"] = n.embedding->values;
        nodes.push_back(std::move(doc));
    }
    json doc;
    doc["format_version"] = kTreeFormatVersion;
    doc["iterations_done"] = iterations_done_;
    doc["video"] = {
        {"video_id", video_.video_id},
        {"frame_paths", video_.frame_paths},
        {"duration_s", video_.duration_s},
        {"category", video_.category},
    };
    doc["nodes"] = std::move(nodes);
    return doc.dump(2);
}

Tree Tree::deserialize(const std::string& bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::corrupt_tree, e.what());
    }
    try {
        const int version = doc.at("format_version").get<int>();
        if (version != kTreeFormatVersion) {
            throw Error(ErrorCode::format_version_mismatch,
                        "tree format " + std::to_string(version) + ", reader expects " +
                            std::to_string(kTreeFormatVersion));
        }
        Tree tree;
        const auto& video = doc.at("video");
        tree.video_.video_id = video.at("video_id").get<std::string>();
        tree.video_.frame_paths = video.at("frame_paths").get<std::vector<std::string>>();
        tree.video_.duration_s = video.at("duration_s").get<double>();
        tree.video_.category = video.value("category", std::string{});
        tree.iterations_done_ = doc.value("iterations_done", 0);

        const auto& nodes = doc.at("nodes");
        tree.nodes_.reserve(nodes.size());
        tree.children_.resize(nodes.size());
        int expected_id = 0;
        for (const auto& n_doc : nodes) {
            SearchNode n;
            n.node_id = n_doc.at("node_id").get<int>();
            if (n.node_id != expected_id++) {
                throw Error(ErrorCode::corrupt_tree, "node ids are not dense creation order");
            }
            if (n_doc.contains("parent_id")) {
                n.parent_id = n_doc["parent_id"].get<int>();
                if (*n.parent_id >= n.node_id || *n.parent_id < 0) {
                    throw Error(ErrorCode::corrupt_tree, "parent_id must precede node_id");
                }
                tree.children_[static_cast<std::size_t>(*n.parent_id)].push_back(n.node_id);
            } else if (n.node_id != 0) {
                throw Error(ErrorCode::corrupt_tree, "non-root node without parent");
            }
            if (n_doc.contains("action")) {
                n.action = action_from_name(n_doc["action"].get<std::string>());
                if (!n.action) throw Error(ErrorCode::corrupt_tree, "unknown action code");
            }
            n.action_prompt = n_doc.value("action_prompt", std::string{});
            n.description = n_doc.value("description", std::string{});
            n.focus_label = n_doc.value("focus_label", std::string{});
            n.visit_count = n_doc.value("visit_count", 0);
            n.mc_value = n_doc.value("mc_value", 0.0);
            n.sm_value = n_doc.value("sm_value", 0.0);
            n.q_value = n_doc.value("q_value", 1.0);
            n.evaluated = n_doc.value("evaluated", false);
            n.degenerate = n_doc.value("degenerate", false);
            for (const auto& kp_doc : n_doc.at("key_points")) {
                n.key_points.push_back(key_point_from_json(kp_doc));
            }
            if (n_doc.contains("embedding")) {
                EmbeddingVector vec;
                vec.values = n_doc["embedding"].get<std::vector<double>>();
                n.embedding = std::move(vec);
            }
            tree.nodes_.push_back(std::move(n));
        }
        if (tree.nodes_.empty()) {
            throw Error(ErrorCode::corrupt_tree, "tree has no nodes");
        }
        return tree;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::corrupt_tree, e.what());
    }
}

bool trees_equal(const Tree& a, const Tree& b) {
    return a.serialize() == b.serialize();
}

}  // namespace autocap
