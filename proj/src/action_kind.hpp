#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace autocap {

// The six description actions. A2 samples with twice the weight of the
// others; A1 runs once, directly under the root.
enum class ActionCode { a1_overall, a2_detail, a3_temporal, a4_spatial, a5_background, a6_camera };

constexpr std::array<ActionCode, 6> kAllActions = {
    ActionCode::a1_overall, ActionCode::a2_detail,   ActionCode::a3_temporal,
    ActionCode::a4_spatial, ActionCode::a5_background, ActionCode::a6_camera,
};

constexpr int action_weight(ActionCode code) {
    return code == ActionCode::a2_detail ? 2 : 1;
}

constexpr const char* action_name(ActionCode code) {
    switch (code) {
        case ActionCode::a1_overall: return "A1";
        case ActionCode::a2_detail: return "A2";
        case ActionCode::a3_temporal: return "A3";
        case ActionCode::a4_spatial: return "A4";
        case ActionCode::a5_background: return "A5";
        case ActionCode::a6_camera: return "A6";
    }
    return "A?";
}

constexpr const char* action_label(ActionCode code) {
    switch (code) {
        case ActionCode::a1_overall: return "Overall Description";
        case ActionCode::a2_detail: return "Detail Description";
        case ActionCode::a3_temporal: return "Temporal Perspective Description";
        case ActionCode::a4_spatial: return "Spatial Perspective Description";
        case ActionCode::a5_background: return "Background Description";
        case ActionCode::a6_camera: return "Camera Movement Description";
    }
    return "Unknown";
}

inline std::optional<ActionCode> action_from_name(std::string_view name) {
    for (ActionCode code : kAllActions) {
        if (name == action_name(code)) return code;
    }
    return std::nullopt;
}

}  // namespace autocap
