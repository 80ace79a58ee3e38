#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace autocap {

// Template names understood by the pipeline. Each resolves to a built-in
// default; a template directory may override any of them with a file of
// the same name plus ".txt".
namespace prompt_names {
inline constexpr const char* a1_overall = "a1_overall";
inline constexpr const char* a2_stage1 = "a2_stage1";
inline constexpr const char* a2_focus_clause = "a2_focus_clause";
inline constexpr const char* a2_stage2_extract = "a2_stage2_extract";
inline constexpr const char* a3_temporal = "a3_temporal";
inline constexpr const char* a4_spatial = "a4_spatial";
inline constexpr const char* a5_background = "a5_background";
inline constexpr const char* a6_camera = "a6_camera";
inline constexpr const char* reference_block = "reference_block";
inline constexpr const char* history_kps_block = "history_kps_block";
inline constexpr const char* extract_kp = "extract_kp";
inline constexpr const char* categorize_kp = "categorize_kp";
inline constexpr const char* generate_questions = "generate_questions";
inline constexpr const char* answer_questions = "answer_questions";
inline constexpr const char* judge_entailment = "judge_entailment";
inline constexpr const char* filter_kp = "filter_kp";
inline constexpr const char* paraphrase_kp = "paraphrase_kp";
inline constexpr const char* screen_video = "screen_video";
inline constexpr const char* thought_process = "thought_process";
inline constexpr const char* caption_from_thought = "caption_from_thought";
inline constexpr const char* eval_caption_default = "eval_caption_default";
inline constexpr const char* eval_caption_vila = "eval_caption_vila";
inline constexpr const char* eval_caption_pllava = "eval_caption_pllava";
}  // namespace prompt_names

class PromptLibrary {
public:
    PromptLibrary();

    // Overrides defaults with <name>.txt files found in dir.
    void load_overrides(const std::filesystem::path& dir);

    const std::string& get(std::string_view name) const;

    // Replaces each "{slot}" occurrence; unknown slots in the template stay
    // untouched so JSON braces in the templates survive.
    static std::string fill(std::string templ,
                            const std::vector<std::pair<std::string, std::string>>& slots);

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

}  // namespace autocap
