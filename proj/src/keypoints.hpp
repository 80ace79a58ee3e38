#pragma once

#include <optional>
#include <string>
#include <vector>

namespace autocap {

enum class KpCategory {
    appearance,
    action,
    environment,
    object,
    camera_movement_composition,
};

const char* kp_category_name(KpCategory c);         // canonical benchmark label
const char* kp_category_key(KpCategory c);          // stable serialization key
std::optional<KpCategory> kp_category_from_key(std::string_view key);
std::optional<KpCategory> kp_category_from_text(std::string_view text);  // lenient label match

enum class KpStatus {
    unverified,
    verified,
    failed,
    filtered_out,
    deduplicated,
    exported_for_review,
};

const char* kp_status_name(KpStatus s);
std::optional<KpStatus> kp_status_from_name(std::string_view name);

// A status may only move forward along the lifecycle; nothing resurrects
// a dropped point.
bool kp_status_transition_allowed(KpStatus from, KpStatus to);

enum class Verdict { yes, no, error };

const char* verdict_name(Verdict v);

struct VerificationQuestion {
    std::string question_text;  // yes/no form
    Verdict verdict_a = Verdict::error;
    Verdict verdict_b = Verdict::error;
    std::string rationale_a;
    std::string rationale_b;
};

// An atomic descriptive sentence with its verification trail.
struct KeyPoint {
    std::string kp_id;  // video_id/node_id/index
    std::string text;
    std::string original_text;  // pre-paraphrase wording; empty if unchanged
    KpCategory category = KpCategory::object;
    bool category_defaulted = false;  // classifier output was unusable
    std::vector<VerificationQuestion> questions;
    KpStatus status = KpStatus::unverified;
    std::string drop_reason;  // set by filtering
};

// Status from the verdict matrix: verified iff every question is yes/yes.
KpStatus adjudicate(const std::vector<VerificationQuestion>& questions);

// Verified-count / total; empty input counts as 0 (nothing verifiable).
double mc_from_keypoints(const std::vector<KeyPoint>& kps);

}  // namespace autocap
