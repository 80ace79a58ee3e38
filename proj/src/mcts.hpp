#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actions.hpp"
#include "prompts.hpp"
#include "provider.hpp"
#include "search_tree.hpp"

namespace autocap {

struct SearchConfig {
    double c_explore = 0.125;
    double alpha = 0.5;
    double beta = 0.5;
    int iterations = 25;
    int frames_per_video = 64;
    std::uint64_t rng_seed = 0;
    // The backpropagation update divides the children sum by the visit
    // count, as written; this switches to a plain mean over children.
    bool mean_children_update = false;
    int consecutive_failure_limit = 5;
};

// Q + c * sqrt(N_parent) / (1 + N).
double puct_score(double q_value, int visit_count, int parent_visits, double c);
double puct_score(const Tree& tree, int node_id, double c);

// Argmax of puct_score over the leaves; ties break to the smallest id.
int select_leaf(const Tree& tree, const SearchConfig& config);

// Highest evaluated Q over the leaves, ignoring exploration; ties break to
// the smallest id. The beam-search selection rule.
int select_leaf_greedy(const Tree& tree);

// alpha^(1-MC) * beta^SM.
double q_from_mc_sm(double mc, double sm, const SearchConfig& config);

// Mean clamped cosine similarity between `own` and the described (non-root)
// nodes along `path`; 0 when there are none.
double trajectory_similarity(const Tree& tree, const std::vector<int>& path,
                             const EmbeddingVector& own);

// Extracts, categorizes, questions and verifies the node's key points,
// then stores MC, SM and Q on the node. MC is 0 and the node degenerate
// when nothing verifiable was extracted; SM is 0 when the trajectory has
// no other described node.
void evaluate_node(Tree& tree, int node_id, ProviderGateway& gateway, const SearchConfig& config,
                   const RolePolicy& roles, const PromptLibrary& prompts);

// For every ancestor of the selected node (the node itself excluded),
// deepest first: N += 1 and Q <- children-sum / N.
void backpropagate(Tree& tree, int selected_id, const SearchConfig& config);

// The full loop: A1 bootstrap, then `iterations` rounds of
// select / expand two children / evaluate both / backpropagate.
Tree run_search(const VideoAsset& video, ProviderGateway& gateway, const SearchConfig& config,
                const RolePolicy& roles, const PromptLibrary& prompts);

// Resumes a loaded tree up to config.iterations.
void continue_search(Tree& tree, ProviderGateway& gateway, const SearchConfig& config,
                     const RolePolicy& roles, const PromptLibrary& prompts);

// Greedy baseline: each round expands only the single highest-Q leaf.
Tree run_beam_search(const VideoAsset& video, ProviderGateway& gateway,
                     const SearchConfig& config, const RolePolicy& roles,
                     const PromptLibrary& prompts, int beam_size, int rounds);

void continue_beam_search(Tree& tree, ProviderGateway& gateway, const SearchConfig& config,
                          const RolePolicy& roles, const PromptLibrary& prompts, int beam_size,
                          int rounds);

// Uniform sampling: indices floor(k*(T-1)/(n-1)); all frames when T < n;
// the middle frame when n = 1. Sources: a directory of images or a
// synthetic-oracle file.
std::vector<std::string> sample_frames(const std::string& source, int n);

}  // namespace autocap
