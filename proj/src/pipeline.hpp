#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcts.hpp"
#include "prompts.hpp"
#include "provider.hpp"

namespace autocap {

// Everything a run needs. Defaults reproduce the published parameters:
// c = 0.125, alpha = beta = 0.5, 25 iterations, 64 mining frames,
// 16 evaluation frames, pool dedup 0.9, evaluation threshold 0.8.
struct PipelineConfig {
    RolePolicy roles;
    std::optional<RoleBinding> overall_describer_2;
    SearchConfig search;
    double pool_dedup_threshold = 0.9;
    double eval_threshold = 0.8;
    bool paraphrase_on = true;
    int eval_frames = 16;
    std::string prompt_profile = "default";
    std::string cache_dir;
    std::string template_dir;
    bool simulated = false;
    bool sim_dual_overall = true;
    int workers = 1;
    bool beam = false;
    int beam_size = 2;
    bool resume = false;
    std::string candidate_endpoint;
    std::string candidate_model_name;
    int http_backoff_base_ms = 250;

    static PipelineConfig load(const std::filesystem::path& path);

    // Stringly-typed knob shared by the CLI and the C API.
    void set_option(const std::string& key, const std::string& value);
};

struct ManifestRecord {
    std::string video_id;
    std::string source;  // frame directory or synthetic oracle file
    std::string category;
    double duration_s = 0.0;
};

struct Manifest {
    std::vector<ManifestRecord> records;

    static Manifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

// Outcome of one batch command: 0 = all videos succeeded, 1 = some failed.
struct BatchOutcome {
    int failed = 0;
    int succeeded = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // (video_id, error)

    int exit_code() const { return failed == 0 ? 0 : 1; }
};

class Pipeline {
public:
    explicit Pipeline(PipelineConfig config);
    ~Pipeline();

    const PipelineConfig& config() const { return config_; }
    ProviderGateway& gateway() { return *gateway_; }
    const PromptLibrary& prompts() const { return prompts_; }

    BatchOutcome cmd_screen(const std::filesystem::path& manifest_path,
                            const std::filesystem::path& out_manifest_path);

    BatchOutcome cmd_mine(const std::filesystem::path& manifest_path,
                          const std::filesystem::path& out_dir);

    BatchOutcome cmd_evaluate(const std::filesystem::path& manifest_path,
                              const std::filesystem::path& pools_dir,
                              const std::string& model_name,
                              const std::filesystem::path& out_dir);

    void cmd_report(const std::filesystem::path& results_dir,
                    const std::filesystem::path& out_dir);

    BatchOutcome cmd_distill(const std::filesystem::path& manifest_path,
                             const std::filesystem::path& pools_dir,
                             const std::filesystem::path& out_dir);

private:
    void mine_one(const ManifestRecord& record, const std::filesystem::path& out_dir);

    PipelineConfig config_;
    PromptLibrary prompts_;
    std::unique_ptr<ProviderGateway> gateway_;
};

}  // namespace autocap
