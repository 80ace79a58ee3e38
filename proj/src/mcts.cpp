#include "mcts.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "errors.hpp"
#include "sim_oracle.hpp"
#include "verification.hpp"

namespace autocap {

double puct_score(double q_value, int visit_count, int parent_visits, double c) {
    return q_value + c * std::sqrt(static_cast<double>(parent_visits)) /
                         (1.0 + static_cast<double>(visit_count));
}

double puct_score(const Tree& tree, int node_id, double c) {
    const SearchNode& node = tree.node(node_id);
    const int parent_visits = node.parent_id ? tree.node(*node.parent_id).visit_count : 0;
    return puct_score(node.q_value, node.visit_count, parent_visits, c);
}

int select_leaf(const Tree& tree, const SearchConfig& config) {
    int best = -1;
    double best_score = 0.0;
    for (int id : tree.leaves()) {
        const double score = puct_score(tree, id, config.c_explore);
        if (best < 0 || score > best_score) {
            best = id;
            best_score = score;
        }
    }
    return best;
}

int select_leaf_greedy(const Tree& tree) {
    int best = -1;
    double best_q = 0.0;
    for (int id : tree.leaves()) {
        const double q = tree.node(id).q_value;
        if (best < 0 || q > best_q) {
            best = id;
            best_q = q;
        }
    }
    return best;
}

double q_from_mc_sm(double mc, double sm, const SearchConfig& config) {
    return std::pow(config.alpha, 1.0 - mc) * std::pow(config.beta, sm);
}

// Similarities are clamped to [0,1] so SM (and with it Q) stays inside the
// documented bounds whatever the embedder returns.
double trajectory_similarity(const Tree& tree, const std::vector<int>& path,
                             const EmbeddingVector& own) {
    double sum = 0.0;
    int count = 0;
    for (int id : path) {
        const SearchNode& node = tree.node(id);
        if (!node.parent_id) continue;  // root carries no description
        if (!node.embedding) continue;
        sum += std::clamp(cosine_similarity(*node.embedding, own), 0.0, 1.0);
        ++count;
    }
    return count == 0 ? 0.0 : sum / count;
}

namespace {

// Everything a new child needs, computed before the tree is touched so a
// provider failure mid-iteration cannot leave a half-expanded node behind.
struct PreparedChild {
    ActionCode action = ActionCode::a2_detail;
    std::string prompt;
    std::string description;
    std::string focus_label;
    bool degenerate = false;
    std::vector<KeyPoint> key_points;
    double mc = 0.0;
    double sm = 0.0;
    double q = 0.0;
    EmbeddingVector embedding;
};

void analyze_child(PreparedChild& child, const Tree& tree, int parent_id, int expected_node_id,
                   ProviderGateway& gateway, const SearchConfig& config, const RolePolicy& roles,
                   const PromptLibrary& prompts) {
    // Key points. An unparseable extraction means nothing verifiable: the
    // node is degenerate with MC pinned to 0.
    if (!child.degenerate) {
        try {
            child.key_points = extract_key_points(
                child.description, tree.video().video_id, expected_node_id, gateway, prompts,
                roles.frames_for(Role::kp_extractor, tree.video().frame_paths));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::unparseable_extraction) throw;
            child.degenerate = true;
        }
    }

    if (!child.degenerate) {
        for (auto& kp : child.key_points) {
            categorize_key_point(kp, gateway, prompts);
            try {
                kp.questions = generate_questions(kp, gateway, prompts);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::no_questions_generated) throw;
                // Unverifiable points fail adjudication below.
            }
        }
        verify_node_key_points(child.key_points,
                               roles.frames_for(Role::verifier_a, tree.video().frame_paths),
                               gateway, prompts);
    }

    child.mc = child.degenerate ? 0.0 : mc_from_keypoints(child.key_points);
    child.embedding = gateway.embed_texts({child.description}).front();
    child.sm = trajectory_similarity(tree, tree.trajectory(parent_id), child.embedding);
    child.q = q_from_mc_sm(child.mc, child.sm, config);
}

PreparedChild prepare_child(ActionCode action, const Tree& tree, int parent_id,
                            int expected_node_id, ProviderGateway& gateway,
                            const SearchConfig& config, const RolePolicy& roles,
                            const PromptLibrary& prompts) {
    PreparedChild child;
    child.action = action;

    const ActionContext ctx = gather_context(tree, parent_id, action);
    const auto generator_frames = roles.frames_for(Role::generator, tree.video().frame_paths);
    const double temperature = roles.temperature(Role::generator);

    if (action == ActionCode::a2_detail) {
        DetailOutcome outcome = run_detail_action(gateway, prompts, ctx, generator_frames,
                                                  temperature);
        child.prompt = outcome.prompt;
        child.description = outcome.description;
        child.focus_label = outcome.focus_label;
        child.degenerate = outcome.extraction_failed;
    } else {
        child.prompt = build_prompt(action, ctx, prompts);
        ChatRequest req;
        req.role = Role::generator;
        req.user_text = child.prompt;
        req.images = generator_frames;
        req.temperature = temperature;
        req.request_key = make_request_key(req);
        child.description = gateway.complete_chat(req).text;
    }

    analyze_child(child, tree, parent_id, expected_node_id, gateway, config, roles, prompts);
    return child;
}

int insert_child(Tree& tree, int parent_id, PreparedChild&& child) {
    const int id = tree.add_child(parent_id, child.action, std::move(child.prompt),
                                  std::move(child.description));
    SearchNode& node = tree.node_mut(id);
    node.focus_label = std::move(child.focus_label);
    node.degenerate = child.degenerate;
    node.key_points = std::move(child.key_points);
    node.mc_value = child.mc;
    node.sm_value = child.sm;
    node.q_value = child.q;
    node.evaluated = true;
    node.embedding = std::move(child.embedding);
    return id;
}

void bootstrap_overall(Tree& tree, ProviderGateway& gateway, const SearchConfig& config,
                       const RolePolicy& roles, const PromptLibrary& prompts) {
    if (tree.a1_executed()) return;
    const auto frames = roles.frames_for(Role::overall_describer, tree.video().frame_paths);
    const auto results =
        run_overall_action(gateway, prompts, frames, roles.temperature(Role::overall_describer));
    std::vector<PreparedChild> prepared;
    for (std::size_t i = 0; i < results.size(); ++i) {
        PreparedChild child;
        child.action = ActionCode::a1_overall;
        child.prompt = results[i].prompt;
        child.description = results[i].description;
        analyze_child(child, tree, 0, tree.size() + static_cast<int>(i), gateway, config, roles,
                      prompts);
        prepared.push_back(std::move(child));
    }
    for (auto& child : prepared) {
        insert_child(tree, 0, std::move(child));
    }
}

bool is_transient_provider_failure(ErrorCode code) {
    return code == ErrorCode::endpoint_unreachable || code == ErrorCode::provider_refusal;
}

void run_one_round(Tree& tree, int selected, const std::vector<ActionCode>& actions,
                   ProviderGateway& gateway, const SearchConfig& config, const RolePolicy& roles,
                   const PromptLibrary& prompts) {
    std::vector<PreparedChild> prepared;
    prepared.reserve(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
        prepared.push_back(prepare_child(actions[i], tree, selected,
                                         tree.size() + static_cast<int>(i), gateway, config,
                                         roles, prompts));
    }
    for (auto& child : prepared) {
        insert_child(tree, selected, std::move(child));
    }
    backpropagate(tree, selected, config);
}

std::vector<ActionCode> sample_actions(const std::vector<ActionCode>& eligible, int k,
                                       DetRng& rng) {
    if (k == 2) {
        auto [a, b] = sample_two_actions(eligible, rng);
        return {a, b};
    }
    std::vector<ActionCode> remaining = eligible;
    std::vector<ActionCode> out;
    while (static_cast<int>(out.size()) < k && !remaining.empty()) {
        int total = 0;
        for (ActionCode a : remaining) total += action_weight(a);
        auto ticket = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(total)));
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            ticket -= action_weight(remaining[i]);
            if (ticket < 0) {
                out.push_back(remaining[i]);
                remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
                break;
            }
        }
    }
    return out;
}

void search_loop(Tree& tree, ProviderGateway& gateway, const SearchConfig& config,
                 const RolePolicy& roles, const PromptLibrary& prompts, bool greedy,
                 int children_per_round, int target_rounds) {
    int consecutive_failures = 0;
    auto attempt = [&](const char* phase, auto&& body) {
        while (true) {
            try {
                body();
                consecutive_failures = 0;
                return;
            } catch (const Error& e) {
                if (!is_transient_provider_failure(e.code())) throw;
                if (++consecutive_failures >= std::max(1, config.consecutive_failure_limit)) {
                    throw Error(ErrorCode::search_aborted,
                                std::to_string(consecutive_failures) +
                                    " consecutive provider failures during " + phase + ": " +
                                    e.what());
                }
            }
        }
    };

    attempt("bootstrap", [&]() { bootstrap_overall(tree, gateway, config, roles, prompts); });

    while (tree.iterations_done() < target_rounds) {
        const int iteration = tree.iterations_done() + 1;
        attempt("iteration", [&]() {
            const int selected = greedy ? select_leaf_greedy(tree) : select_leaf(tree, config);
            DetRng rng(derive_seed(config.rng_seed, "expand:" + tree.video().video_id,
                                   static_cast<std::uint64_t>(iteration)));
            const auto actions =
                sample_actions(eligible_actions(tree, selected), children_per_round, rng);
            run_one_round(tree, selected, actions, gateway, config, roles, prompts);
            tree.set_iterations_done(iteration);
        });
    }
}

}  // namespace

void evaluate_node(Tree& tree, int node_id, ProviderGateway& gateway, const SearchConfig& config,
                   const RolePolicy& roles, const PromptLibrary& prompts) {
    SearchNode& node = tree.node_mut(node_id);
    if (!node.parent_id) {
        throw Error(ErrorCode::invalid_argument, "the root has no description to evaluate");
    }
    PreparedChild scratch;
    scratch.action = node.action.value_or(ActionCode::a2_detail);
    scratch.description = node.description;
    scratch.degenerate = node.degenerate;
    analyze_child(scratch, tree, *node.parent_id, node_id, gateway, config, roles, prompts);
    node.key_points = std::move(scratch.key_points);
    node.degenerate = scratch.degenerate;
    node.mc_value = scratch.mc;
    node.sm_value = scratch.sm;
    node.q_value = scratch.q;
    node.evaluated = true;
    node.embedding = std::move(scratch.embedding);
}

void backpropagate(Tree& tree, int selected_id, const SearchConfig& config) {
    const auto path = tree.trajectory(selected_id);
    // Deepest ancestor first; the selected node itself is excluded.
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        if (*it == selected_id) continue;
        SearchNode& node = tree.node_mut(*it);
        node.visit_count += 1;
        const auto& kids = tree.children(*it);
        double sum = 0.0;
        for (int child : kids) sum += tree.node(child).q_value;
        const double divisor = config.mean_children_update
                                   ? static_cast<double>(kids.size())
                                   : static_cast<double>(node.visit_count);
        if (divisor > 0.0) node.q_value = sum / divisor;
    }
}

Tree run_search(const VideoAsset& video, ProviderGateway& gateway, const SearchConfig& config,
                const RolePolicy& roles, const PromptLibrary& prompts) {
    Tree tree(video);
    search_loop(tree, gateway, config, roles, prompts, /*greedy=*/false,
                /*children_per_round=*/2, config.iterations);
    return tree;
}

void continue_search(Tree& tree, ProviderGateway& gateway, const SearchConfig& config,
                     const RolePolicy& roles, const PromptLibrary& prompts) {
    search_loop(tree, gateway, config, roles, prompts, /*greedy=*/false,
                /*children_per_round=*/2, config.iterations);
}

Tree run_beam_search(const VideoAsset& video, ProviderGateway& gateway,
                     const SearchConfig& config, const RolePolicy& roles,
                     const PromptLibrary& prompts, int beam_size, int rounds) {
    Tree tree(video);
    continue_beam_search(tree, gateway, config, roles, prompts, beam_size, rounds);
    return tree;
}

void continue_beam_search(Tree& tree, ProviderGateway& gateway, const SearchConfig& config,
                          const RolePolicy& roles, const PromptLibrary& prompts, int beam_size,
                          int rounds) {
    search_loop(tree, gateway, config, roles, prompts, /*greedy=*/true,
                /*children_per_round=*/std::max(1, beam_size), rounds);
}

std::vector<std::string> sample_frames(const std::string& source, int n) {
    namespace fs = std::filesystem;
    if (n <= 0) {
        throw Error(ErrorCode::invalid_argument, "frame count must be positive");
    }

    std::vector<std::string> all;
    std::error_code ec;
    if (fs::is_directory(source, ec)) {
        static const std::set<std::string> kImageExts = {".jpg", ".jpeg", ".png",
                                                         ".bmp", ".gif",  ".webp"};
        for (const auto& entry : fs::directory_iterator(source)) {
            if (!entry.is_regular_file()) continue;
            if (kImageExts.count(lowercase(entry.path().extension().string()))) {
                all.push_back(entry.path().string());
            }
        }
        std::sort(all.begin(), all.end());
        if (all.empty()) {
            throw Error(ErrorCode::unreadable_video, "no image frames under " + source);
        }
    } else if (fs::is_regular_file(source, ec) && fs::path(source).extension() == ".json") {
        // Synthetic-oracle source: frames are ids only.
        const SimOracle oracle = SimOracle::load(source);
        for (int i = 0; i < std::max(1, oracle.frame_count); ++i) {
            all.push_back(source + "#frame-" + std::to_string(i));
        }
    } else {
        throw Error(ErrorCode::unreadable_video,
                    "cannot read video source " + source +
                        " (expected a directory of frames or a synthetic oracle)");
    }

    const auto total = static_cast<int>(all.size());
    if (total <= n) return all;
    std::vector<std::string> out;
    if (n == 1) {
        out.push_back(all[static_cast<std::size_t>((total - 1) / 2)]);
        return out;
    }
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(
            static_cast<long long>(k) * (total - 1) / (n - 1));
        out.push_back(all[idx]);
    }
    return out;
}

}  // namespace autocap
