#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "action_kind.hpp"
#include "prompts.hpp"
#include "provider.hpp"
#include "util.hpp"

namespace autocap {

class Tree;
struct VideoAsset;

// History carried into an action prompt: verified key points and raw
// descriptions from same-action ancestors on the trajectory.
struct ActionContext {
    std::vector<std::string> verified_history_kps;
    std::vector<std::string> previous_perspectives;

    struct DetailFocus {
        std::string detail;
        std::string category;
        std::string aspects;
    };
    std::optional<DetailFocus> detail_focus;
};

// A1 only at the root and only while never executed; A2..A6 always.
std::vector<ActionCode> eligible_actions(const Tree& tree, int node_id);

// Two distinct actions, weighted without replacement (A2 counts double).
std::pair<ActionCode, ActionCode> sample_two_actions(const std::vector<ActionCode>& eligible,
                                                     DetRng& rng);

// Pure prompt assembly; empty history yields the bare template.
std::string build_prompt(ActionCode action, const ActionContext& ctx, const PromptLibrary& prompts);

// Collects same-action history from the trajectory of node_id. Perspectives
// keep only the five most recent so prompts stay bounded.
ActionContext gather_context(const Tree& tree, int node_id, ActionCode action);

struct OverallResult {
    std::string prompt;
    std::string description;
};

// Executes the overall description with every configured endpoint; each
// description becomes one child of the root.
std::vector<OverallResult> run_overall_action(ProviderGateway& gateway,
                                              const PromptLibrary& prompts,
                                              const std::vector<std::string>& frames,
                                              double temperature);

struct DetailOutcome {
    bool extraction_failed = false;  // stage-2 fields unparseable
    std::string stage1_text;
    std::string focus_label;
    std::string prompt;       // final generator prompt
    std::string description;  // stage-2 generator output (stage-1 text on failure)
};

// Parses the three labeled lines of a stage-2 extraction response,
// case-insensitively and tolerating surrounding whitespace.
std::optional<ActionContext::DetailFocus> parse_detail_extraction(const std::string& text);

// Two-stage detail description: propose a detail, extract the focus,
// re-prompt the generator with it.
DetailOutcome run_detail_action(ProviderGateway& gateway, const PromptLibrary& prompts,
                                const ActionContext& ctx, const std::vector<std::string>& frames,
                                double temperature);

}  // namespace autocap
