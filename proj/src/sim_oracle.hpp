#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "provider.hpp"

namespace autocap {

// A synthetic "video": a finite ground-truth fact set plus per-role response
// behavior. Facts are tagged with the action that can surface them; A2 facts
// additionally carry the detail label that groups them for the two-stage flow.
struct SimFact {
    std::string text;      // single sentence ending with '.'
    std::string category;  // key-point category key
    std::string action;    // "A1".."A6"
    std::string detail;    // A2 group label
    std::string aspects;   // A2 describe aspects
};

struct SimOracle {
    std::string video_id;
    int frame_count = 64;
    double duration_s = 12.0;
    std::string category;
    double noise_rate = 0.0;
    int reveal_per_call = 4;
    std::vector<SimFact> facts;
    bool screen_keep = true;
    std::string screen_reason;
    std::string candidate_caption;
    std::map<std::string, std::vector<std::string>> question_scripts;   // normalized kp -> questions
    std::map<std::string, std::vector<std::string>> extraction_scripts; // normalized sentence -> points
    std::map<std::string, bool> question_answers;                        // normalized stem -> verdict
    std::vector<std::pair<std::string, std::string>> contradictions;     // normalized pairs
    std::vector<std::string> filter_drop_texts;                          // normalized

    static SimOracle from_json(const std::string& text);
    static SimOracle load(const std::filesystem::path& path);
    std::string to_json() const;
};

// Deterministic backend: every response is a pure function of
// (seed, role, request content). Generators surface oracle facts that the
// prompt has not mentioned yet; verifiers answer yes exactly when the
// questioned fact is in the oracle set (modulo the configured noise).
class SimulatedGateway : public ProviderGateway {
public:
    struct Options {
        std::uint64_t seed = 0;
        bool dual_overall = true;           // two overall-describer endpoints
        bool paraphrase_miscount = false;   // test hook: drop one rewrite
        bool thought_missing_delimiters = false;
        bool stage2_malformed = false;      // test hook: break detail extraction
    };

    explicit SimulatedGateway(Options options);

    void set_frame_budget(Role role, int budget);

    // Preloads an oracle so text-only roles can consult it.
    void load_oracle(const std::filesystem::path& path);

    bool has_role(Role) const override { return true; }
    int overall_instances() const override { return options_.dual_overall ? 2 : 1; }

    ChatResponse complete_chat(const ChatRequest& req) override;
    ChatResponse complete_with_seed(const ChatRequest& req, std::uint64_t seed);

    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) override;

private:
    const SimOracle* oracle_for_request(const ChatRequest& req);
    const SimOracle* find_loaded(const std::string& key) const;

    std::string handle_generator(const ChatRequest& req, std::uint64_t seed);
    std::string handle_extractor(const ChatRequest& req);
    std::string handle_question_writer(const ChatRequest& req);
    std::string handle_verifier(const ChatRequest& req, std::uint64_t seed);
    std::string handle_judge(const ChatRequest& req);
    std::string handle_paraphraser(const ChatRequest& req);
    std::string handle_filter_judge(const ChatRequest& req);
    std::string handle_screener(const ChatRequest& req);
    std::string handle_distiller(const ChatRequest& req);
    std::string handle_candidate(const ChatRequest& req);

    Options options_;
    FallbackEmbedder fallback_;
    mutable std::mutex mu_;
    std::map<std::string, SimOracle> oracles_;  // keyed by source path
    std::map<Role, int> frame_budgets_;
};

}  // namespace autocap
