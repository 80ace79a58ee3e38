#pragma once

#include <map>
#include <string>
#include <vector>

#include "postprocess.hpp"
#include "prompts.hpp"
#include "provider.hpp"

namespace autocap {

enum class EntailmentLabel { entailment, contradiction, neutral };

const char* entailment_label_name(EntailmentLabel label);

// One (model, video) evaluation.
struct EvalRecord {
    std::string model_name;
    std::string video_id;
    std::string video_category;
    std::string caption;  // D_model
    int n_frames = 16;
    double pool_threshold = 0.8;

    std::vector<KeyPoint> candidate_kps;             // extracted from the caption
    std::vector<EntailmentLabel> precision_labels;   // per candidate key point
    std::vector<EntailmentLabel> recall_labels;      // per reference key point
    std::vector<KpCategory> reference_categories;    // parallel to recall_labels

    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int judge_warnings = 0;

    std::string to_json() const;
    static EvalRecord from_json(const std::string& text);
};

// 2PR/(P+R); 0 when P+R is 0.
double f1_from_pr(double precision, double recall);

// Fills precision/recall/f1 from the stored label vectors. Zero candidates
// or references pin the corresponding ratio to 0.
void score(EvalRecord& record);

// Captions a video with the candidate model using the named prompt profile
// (default, vila, pllava).
std::string caption_video(ProviderGateway& gateway, const PromptLibrary& prompts,
                          const std::vector<std::string>& frames, const std::string& profile,
                          double temperature);

// One label per item, judged against the reference block (a numbered
// key-point list or a raw caption). Parse failures retry once, then the
// missing items become neutral with a warning.
std::vector<EntailmentLabel> judge_entailment(const std::vector<std::string>& items,
                                              const std::string& reference,
                                              ProviderGateway& gateway,
                                              const PromptLibrary& prompts,
                                              int* warnings = nullptr);

// Full record for one (model, video) pair against a reference pool view.
EvalRecord evaluate_candidate(const std::string& model_name, const VideoAsset& video,
                              const std::vector<const PoolEntry*>& reference,
                              double pool_threshold, ProviderGateway& gateway,
                              const PromptLibrary& prompts, const RolePolicy& roles,
                              int n_frames, const std::string& prompt_profile);

// Pooled entailment counts; ratios derive from them.
struct PRCounts {
    std::size_t entailed_p = 0;
    std::size_t total_p = 0;
    std::size_t entailed_r = 0;
    std::size_t total_r = 0;

    double precision() const;
    double recall() const;
    double f1() const;
    void add(const PRCounts& other);
};

struct MacroAverages {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    double pool_threshold = 0.8;
    std::size_t record_count = 0;
    std::map<std::string, PRCounts> overall;  // per model, micro-averaged
    std::map<std::string, MacroAverages> macro;
    std::map<std::string, std::map<std::string, PRCounts>> by_kp_category;
    std::map<std::string, std::map<std::string, PRCounts>> by_video_category;
    std::map<std::string, std::map<int, PRCounts>> by_frame_count;

    std::string to_json() const;
    std::string render_table() const;
};

// Micro-averaged cuts plus macro rows. Records must share one threshold.
EvalReport aggregate(const std::vector<EvalRecord>& records);

struct ScreenResult {
    bool keep = false;
    std::string reason;
    bool parse_warning = false;
};

// Parses "Judgment: [yes/no] Reason: [...]"; malformed output drops the
// video (conservative).
ScreenResult screen_video(const VideoAsset& video, const std::string& caption,
                          ProviderGateway& gateway, const PromptLibrary& prompts,
                          const RolePolicy& roles);

// Entailment-based containment ratios in both directions.
std::pair<double, double> mutual_inclusion(const std::vector<std::string>& set_a,
                                           const std::vector<std::string>& set_b,
                                           ProviderGateway& gateway,
                                           const PromptLibrary& prompts);

// Kendall rank correlation between two score vectors over the same models.
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace autocap
