#include "keypoints.hpp"

#include "util.hpp"

namespace autocap {

const char* kp_category_name(KpCategory c) {
    switch (c) {
        case KpCategory::appearance: return "Appearance Description";
        case KpCategory::action: return "Action Description";
        case KpCategory::environment: return "Environment Description";
        case KpCategory::object: return "Object Description";
        case KpCategory::camera_movement_composition: return "Camera Movement and Composition";
    }
    return "Object Description";
}

const char* kp_category_key(KpCategory c) {
    switch (c) {
        case KpCategory::appearance: return "appearance";
        case KpCategory::action: return "action";
        case KpCategory::environment: return "environment";
        case KpCategory::object: return "object";
        case KpCategory::camera_movement_composition: return "camera_movement_composition";
    }
    return "object";
}

std::optional<KpCategory> kp_category_from_key(std::string_view key) {
    for (KpCategory c : {KpCategory::appearance, KpCategory::action, KpCategory::environment,
                         KpCategory::object, KpCategory::camera_movement_composition}) {
        if (key == kp_category_key(c)) return c;
    }
    return std::nullopt;
}

std::optional<KpCategory> kp_category_from_text(std::string_view text) {
    const std::string t = lowercase(trim(text));
    if (t.find("appearance") != std::string::npos) return KpCategory::appearance;
    if (t.find("camera") != std::string::npos || t.find("composition") != std::string::npos) {
        return KpCategory::camera_movement_composition;
    }
    if (t.find("action") != std::string::npos) return KpCategory::action;
    if (t.find("environment") != std::string::npos) return KpCategory::environment;
    if (t.find("object") != std::string::npos) return KpCategory::object;
    return std::nullopt;
}

const char* kp_status_name(KpStatus s) {
    switch (s) {
        case KpStatus::unverified: return "unverified";
        case KpStatus::verified: return "verified";
        case KpStatus::failed: return "failed";
        case KpStatus::filtered_out: return "filtered_out";
        case KpStatus::deduplicated: return "deduplicated";
        case KpStatus::exported_for_review: return "exported_for_review";
    }
    return "unverified";
}

std::optional<KpStatus> kp_status_from_name(std::string_view name) {
    for (KpStatus s : {KpStatus::unverified, KpStatus::verified, KpStatus::failed,
                       KpStatus::filtered_out, KpStatus::deduplicated,
                       KpStatus::exported_for_review}) {
        if (name == kp_status_name(s)) return s;
    }
    return std::nullopt;
}

bool kp_status_transition_allowed(KpStatus from, KpStatus to) {
    if (from == to) return true;
    switch (from) {
        case KpStatus::unverified:
            return to == KpStatus::verified || to == KpStatus::failed;
        case KpStatus::verified:
            return to == KpStatus::filtered_out || to == KpStatus::deduplicated ||
                   to == KpStatus::exported_for_review;
        case KpStatus::failed:
        case KpStatus::filtered_out:
        case KpStatus::deduplicated:
        case KpStatus::exported_for_review:
            return false;
    }
    return false;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::yes: return "yes";
        case Verdict::no: return "no";
        case Verdict::error: return "error";
    }
    return "error";
}

KpStatus adjudicate(const std::vector<VerificationQuestion>& questions) {
    if (questions.empty()) return KpStatus::failed;
    for (const auto& q : questions) {
        if (q.verdict_a != Verdict::yes || q.verdict_b != Verdict::yes) {
            return KpStatus::failed;
        }
    }
    return KpStatus::verified;
}

double mc_from_keypoints(const std::vector<KeyPoint>& kps) {
    if (kps.empty()) return 0.0;
    std::size_t verified = 0;
    for (const auto& kp : kps) {
        if (kp.status == KpStatus::verified) ++verified;
    }
    return static_cast<double>(verified) / static_cast<double>(kps.size());
}

}  // namespace autocap
