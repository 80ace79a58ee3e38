#include "actions.hpp"

#include <algorithm>

#include "errors.hpp"
#include "search_tree.hpp"

namespace autocap {

std::vector<ActionCode> eligible_actions(const Tree& tree, int node_id) {
    const SearchNode& node = tree.node(node_id);
    std::vector<ActionCode> out;
    if (node_id == 0 && !node.parent_id && !tree.a1_executed()) {
        out.push_back(ActionCode::a1_overall);
    }
    out.insert(out.end(), {ActionCode::a2_detail, ActionCode::a3_temporal, ActionCode::a4_spatial,
                           ActionCode::a5_background, ActionCode::a6_camera});
    return out;
}

std::pair<ActionCode, ActionCode> sample_two_actions(const std::vector<ActionCode>& eligible,
                                                     DetRng& rng) {
    if (eligible.size() < 2) {
        throw Error(ErrorCode::too_few_actions,
                    "need at least 2 eligible actions, have " + std::to_string(eligible.size()));
    }
    std::vector<ActionCode> remaining = eligible;
    auto draw = [&rng, &remaining]() {
        int total = 0;
        for (ActionCode a : remaining) total += action_weight(a);
        auto ticket = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(total)));
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            ticket -= action_weight(remaining[i]);
            if (ticket < 0) {
                ActionCode chosen = remaining[i];
                remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
                return chosen;
            }
        }
        ActionCode last = remaining.back();
        remaining.pop_back();
        return last;
    };
    ActionCode first = draw();
    ActionCode second = draw();
    return {first, second};
}

namespace {

const char* base_template_name(ActionCode action) {
    switch (action) {
        case ActionCode::a1_overall: return prompt_names::a1_overall;
        case ActionCode::a2_detail: return prompt_names::a2_stage1;
        case ActionCode::a3_temporal: return prompt_names::a3_temporal;
        case ActionCode::a4_spatial: return prompt_names::a4_spatial;
        case ActionCode::a5_background: return prompt_names::a5_background;
        case ActionCode::a6_camera: return prompt_names::a6_camera;
    }
    return prompt_names::a1_overall;
}

}  // namespace

std::string build_prompt(ActionCode action, const ActionContext& ctx,
                         const PromptLibrary& prompts) {
    std::string out = prompts.get(base_template_name(action));

    if (action == ActionCode::a2_detail && ctx.detail_focus) {
        out += PromptLibrary::fill(prompts.get(prompt_names::a2_focus_clause),
                                   {{"detail", ctx.detail_focus->detail},
                                    {"relevant_detail_attributes", ctx.detail_focus->aspects}});
    }

    const bool takes_perspectives = action != ActionCode::a1_overall && action != ActionCode::a2_detail;
    if (takes_perspectives && !ctx.previous_perspectives.empty()) {
        out += PromptLibrary::fill(
            prompts.get(prompt_names::reference_block),
            {{"previous_perspectives", join(ctx.previous_perspectives, "\n")}});
    }

    if (action != ActionCode::a1_overall && !ctx.verified_history_kps.empty()) {
        out += PromptLibrary::fill(prompts.get(prompt_names::history_kps_block),
                                   {{"history_key_points", join(ctx.verified_history_kps, "\n")}});
    }
    return out;
}

ActionContext gather_context(const Tree& tree, int node_id, ActionCode action) {
    ActionContext ctx;
    for (int id : tree.trajectory(node_id)) {
        const SearchNode& node = tree.node(id);
        if (!node.action || *node.action != action) continue;
        if (!node.description.empty()) ctx.previous_perspectives.push_back(node.description);
        for (const auto& kp : node.key_points) {
            if (kp.status == KpStatus::verified) ctx.verified_history_kps.push_back(kp.text);
        }
    }
    constexpr std::size_t kMaxPerspectives = 5;
    if (ctx.previous_perspectives.size() > kMaxPerspectives) {
        ctx.previous_perspectives.erase(
            ctx.previous_perspectives.begin(),
            ctx.previous_perspectives.end() - static_cast<std::ptrdiff_t>(kMaxPerspectives));
    }
    return ctx;
}

std::vector<OverallResult> run_overall_action(ProviderGateway& gateway,
                                              const PromptLibrary& prompts,
                                              const std::vector<std::string>& frames,
                                              double temperature) {
    std::vector<OverallResult> out;
    const std::string prompt = build_prompt(ActionCode::a1_overall, ActionContext{}, prompts);
    for (int instance = 0; instance < gateway.overall_instances(); ++instance) {
        ChatRequest req;
        req.role = Role::overall_describer;
        req.role_instance = instance;
        req.user_text = prompt;
        req.images = frames;
        req.temperature = temperature;
        req.request_key = make_request_key(req);
        ChatResponse resp = gateway.complete_chat(req);
        out.push_back({prompt, resp.text});
    }
    return out;
}

std::optional<ActionContext::DetailFocus> parse_detail_extraction(const std::string& text) {
    ActionContext::DetailFocus focus;
    bool have_detail = false;
    for (const auto& line : split_lines(text)) {
        const std::string t = trim(line);
        if (starts_with_ci(t, "Detail:")) {
            focus.detail = trim(std::string_view(t).substr(7));
            have_detail = !focus.detail.empty();
        } else if (starts_with_ci(t, "Category:")) {
            focus.category = trim(std::string_view(t).substr(9));
        } else if (starts_with_ci(t, "Relevant Describe Aspects:")) {
            focus.aspects = trim(std::string_view(t).substr(26));
        }
    }
    if (!have_detail) return std::nullopt;
    return focus;
}

DetailOutcome run_detail_action(ProviderGateway& gateway, const PromptLibrary& prompts,
                                const ActionContext& ctx, const std::vector<std::string>& frames,
                                double temperature) {
    DetailOutcome outcome;

    ActionContext stage1_ctx = ctx;
    stage1_ctx.detail_focus.reset();
    const std::string stage1_prompt = build_prompt(ActionCode::a2_detail, stage1_ctx, prompts);
    ChatRequest stage1;
    stage1.role = Role::generator;
    stage1.user_text = stage1_prompt;
    stage1.images = frames;
    stage1.temperature = temperature;
    stage1.request_key = make_request_key(stage1);
    outcome.stage1_text = gateway.complete_chat(stage1).text;

    ChatRequest extract;
    extract.role = Role::kp_extractor;
    extract.user_text = PromptLibrary::fill(prompts.get(prompt_names::a2_stage2_extract),
                                            {{"model_answer", outcome.stage1_text}});
    extract.request_key = make_request_key(extract);
    const std::string extraction = gateway.complete_chat(extract).text;

    auto focus = parse_detail_extraction(extraction);
    if (!focus) {
        // A wrong focus would silently corrupt the search; fail the action
        // and let the caller mark the node degenerate.
        outcome.extraction_failed = true;
        outcome.prompt = stage1_prompt;
        outcome.description = outcome.stage1_text;
        return outcome;
    }
    outcome.focus_label = focus->detail;

    ActionContext stage2_ctx = ctx;
    stage2_ctx.detail_focus = *focus;
    outcome.prompt = build_prompt(ActionCode::a2_detail, stage2_ctx, prompts);
    ChatRequest stage2;
    stage2.role = Role::generator;
    stage2.user_text = outcome.prompt;
    stage2.images = frames;
    stage2.temperature = temperature;
    stage2.request_key = make_request_key(stage2);
    outcome.description = gateway.complete_chat(stage2).text;
    return outcome;
}

}  // namespace autocap
