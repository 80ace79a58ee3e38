#include "pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "errors.hpp"
#include "eval.hpp"
#include "postprocess.hpp"
#include "provider_http.hpp"
#include "sim_oracle.hpp"
#include "util.hpp"

namespace autocap {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

RoleBinding binding_from_json(const json& doc) {
    RoleBinding binding;
    binding.endpoint = doc.value("endpoint", std::string{});
    binding.model_name = doc.value("model_name", std::string{});
    binding.frame_budget = doc.value("frame_budget", 64);
    binding.temperature = doc.value("temperature", 0.0);
    binding.max_retries = doc.value("max_retries", 3);
    binding.api_key_env = doc.value("api_key_env", std::string{});
    binding.min_interval_ms = doc.value("min_interval_ms", 0);
    return binding;
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        throw Error(ErrorCode::config_error, "bad numeric value for " + key + ": " + value);
    }
}

long long parse_int(const std::string& value, const std::string& key) {
    try {
        return std::stoll(value);
    } catch (const std::exception&) {
        throw Error(ErrorCode::config_error, "bad integer value for " + key + ": " + value);
    }
}

bool parse_bool(const std::string& value) {
    const std::string v = lowercase(value);
    return v == "1" || v == "true" || v == "yes" || v == "on";
}

}  // namespace

PipelineConfig PipelineConfig::load(const fs::path& path) {
    PipelineConfig config;
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const std::exception& e) {
        throw Error(ErrorCode::config_error, std::string("cannot load config: ") + e.what());
    }
    try {
        if (doc.contains("roles")) {
            for (const auto& [name, binding_doc] : doc["roles"].items()) {
                if (name == "overall_describer_2") {
                    config.overall_describer_2 = binding_from_json(binding_doc);
                    continue;
                }
                auto role = role_from_name(name);
                if (!role) {
                    throw Error(ErrorCode::config_error, "unknown role in config: " + name);
                }
                config.roles.bindings[*role] = binding_from_json(binding_doc);
            }
        }
        if (doc.contains("search")) {
            const auto& s = doc["search"];
            config.search.c_explore = s.value("c_explore", config.search.c_explore);
            config.search.alpha = s.value("alpha", config.search.alpha);
            config.search.beta = s.value("beta", config.search.beta);
            config.search.iterations = s.value("iterations", config.search.iterations);
            config.search.frames_per_video =
                s.value("frames_per_video", config.search.frames_per_video);
            config.search.rng_seed = s.value("rng_seed", config.search.rng_seed);
            config.search.mean_children_update =
                s.value("mean_children_update", config.search.mean_children_update);
            config.search.consecutive_failure_limit =
                s.value("consecutive_failure_limit", config.search.consecutive_failure_limit);
        }
        config.pool_dedup_threshold = doc.value("dedup_threshold", config.pool_dedup_threshold);
        config.eval_threshold = doc.value("eval_threshold", config.eval_threshold);
        config.paraphrase_on = doc.value("paraphrase", config.paraphrase_on);
        config.eval_frames = doc.value("eval_frames", config.eval_frames);
        config.prompt_profile = doc.value("prompt_profile", config.prompt_profile);
        config.cache_dir = doc.value("cache_dir", config.cache_dir);
        config.template_dir = doc.value("template_dir", config.template_dir);
        config.simulated = doc.value("simulated", config.simulated);
        config.sim_dual_overall = doc.value("sim_dual_overall", config.sim_dual_overall);
        config.workers = doc.value("workers", config.workers);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("bad config: ") + e.what());
    }
    return config;
}

void PipelineConfig::set_option(const std::string& key, const std::string& value) {
    if (key == "seed") {
        search.rng_seed = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (key == "iterations") {
        search.iterations = static_cast<int>(parse_int(value, key));
    } else if (key == "c_explore") {
        search.c_explore = parse_double(value, key);
    } else if (key == "alpha") {
        search.alpha = parse_double(value, key);
    } else if (key == "beta") {
        search.beta = parse_double(value, key);
    } else if (key == "frames") {
        search.frames_per_video = static_cast<int>(parse_int(value, key));
    } else if (key == "mean_children_update") {
        search.mean_children_update = parse_bool(value);
    } else if (key == "failure_limit") {
        search.consecutive_failure_limit = static_cast<int>(parse_int(value, key));
    } else if (key == "dedup_threshold") {
        pool_dedup_threshold = parse_double(value, key);
    } else if (key == "pool_threshold" || key == "eval_threshold") {
        eval_threshold = parse_double(value, key);
    } else if (key == "paraphrase") {
        paraphrase_on = parse_bool(value);
    } else if (key == "eval_frames") {
        eval_frames = static_cast<int>(parse_int(value, key));
    } else if (key == "prompt_profile") {
        prompt_profile = value;
    } else if (key == "cache_dir") {
        cache_dir = value;
    } else if (key == "template_dir") {
        template_dir = value;
    } else if (key == "simulated") {
        simulated = parse_bool(value);
    } else if (key == "sim_dual_overall") {
        sim_dual_overall = parse_bool(value);
    } else if (key == "workers") {
        workers = std::max(1, static_cast<int>(parse_int(value, key)));
    } else if (key == "beam") {
        beam = parse_bool(value);
    } else if (key == "beam_size") {
        beam_size = static_cast<int>(parse_int(value, key));
    } else if (key == "resume") {
        resume = parse_bool(value);
    } else if (key == "model_endpoint") {
        candidate_endpoint = value;
    } else if (key == "model_name") {
        candidate_model_name = value;
    } else if (key == "http_backoff_base_ms") {
        http_backoff_base_ms = static_cast<int>(parse_int(value, key));
    } else {
        throw Error(ErrorCode::invalid_argument, "unknown option: " + key);
    }
}

Manifest Manifest::load(const fs::path& path) {
    Manifest manifest;
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const std::exception& e) {
        throw Error(ErrorCode::manifest_error, std::string("cannot load manifest: ") + e.what());
    }
    try {
        const json& records = doc.is_array() ? doc : doc.at("videos");
        std::set<std::string> seen;
        for (const auto& r : records) {
            ManifestRecord record;
            record.video_id = r.at("video_id").get<std::string>();
            record.source = r.at("source").get<std::string>();
            record.category = r.value("category", std::string{});
            record.duration_s = r.value("duration_s", 0.0);
            if (!seen.insert(record.video_id).second) {
                throw Error(ErrorCode::manifest_error,
                            "duplicate video_id: " + record.video_id);
            }
            manifest.records.push_back(std::move(record));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::manifest_error, std::string("bad manifest: ") + e.what());
    }
    return manifest;
}

void Manifest::save(const fs::path& path) const {
    json records = json::array();
    for (const auto& r : this->records) {
        records.push_back({{"video_id", r.video_id},
                           {"source", r.source},
                           {"category", r.category},
                           {"duration_s", r.duration_s}});
    }
    atomic_write_file(path, records.dump(2));
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
    if (!config_.template_dir.empty()) {
        prompts_.load_overrides(config_.template_dir);
    }
    if (config_.simulated) {
        SimulatedGateway::Options options;
        options.seed = config_.search.rng_seed;
        options.dual_overall = config_.sim_dual_overall;
        auto sim = std::make_unique<SimulatedGateway>(options);
        for (const auto& [role, binding] : config_.roles.bindings) {
            sim->set_frame_budget(role, binding.frame_budget);
        }
        gateway_ = std::move(sim);
    } else {
        HttpGateway::Options options;
        options.roles = config_.roles.bindings;
        options.overall_describer_2 = config_.overall_describer_2;
        options.cache_dir = config_.cache_dir;
        options.backoff_base_ms = config_.http_backoff_base_ms;
        if (!config_.candidate_endpoint.empty()) {
            RoleBinding candidate;
            candidate.endpoint = config_.candidate_endpoint;
            candidate.model_name = config_.candidate_model_name;
            candidate.frame_budget = std::max(config_.eval_frames, 1);
            options.roles[Role::candidate_model] = candidate;
            config_.roles.bindings[Role::candidate_model] = candidate;
        }
        gateway_ = std::make_unique<HttpGateway>(std::move(options));
    }
}

Pipeline::~Pipeline() = default;

namespace {

// Runs one manifest per videorecord across the worker pool. A failing video
// never aborts the batch; its error is recorded instead.
template <typename Fn>
BatchOutcome run_batch(const Manifest& manifest, int workers, Fn&& per_record) {
    BatchOutcome outcome;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    const int thread_count =
        std::max(1, std::min(workers, static_cast<int>(manifest.records.size())));

    auto worker = [&]() {
        while (true) {
            const std::size_t index = next.fetch_add(1);
            if (index >= manifest.records.size()) break;
            const ManifestRecord& record = manifest.records[index];
            try {
                per_record(record);
                std::lock_guard<std::mutex> lock(mu);
                ++outcome.succeeded;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                ++outcome.failed;
                outcome.failures.emplace_back(record.video_id, e.what());
            }
        }
    };

    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(thread_count));
        for (int i = 0; i < thread_count; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    std::sort(outcome.failures.begin(), outcome.failures.end());
    return outcome;
}

void write_failure_ledger(const fs::path& out_dir, const std::string& stage,
                          const BatchOutcome& outcome) {
    json doc;
    doc["stage"] = stage;
    doc["succeeded"] = outcome.succeeded;
    doc["failed"] = outcome.failed;
    json failures = json::array();
    for (const auto& [video_id, error] : outcome.failures) {
        failures.push_back({{"video_id", video_id}, {"error", error}});
    }
    doc["failures"] = std::move(failures);
    atomic_write_file(out_dir / (stage + "_failures.json"), doc.dump(2));
}

}  // namespace

BatchOutcome Pipeline::cmd_screen(const fs::path& manifest_path, const fs::path& out_manifest_path) {
    const Manifest manifest = Manifest::load(manifest_path);

    struct ScreenRow {
        ManifestRecord record;
        bool keep = false;
        std::string reason;
    };
    std::mutex mu;
    std::vector<ScreenRow> rows;

    BatchOutcome outcome = run_batch(manifest, config_.workers, [&](const ManifestRecord& record) {
        VideoAsset video;
        video.video_id = record.video_id;
        video.category = record.category;
        video.duration_s = record.duration_s;
        video.frame_paths = sample_frames(record.source, config_.search.frames_per_video);

        // Screening consumes a caption; produce one with the screener model.
        ChatRequest caption_req;
        caption_req.role = Role::screener;
        caption_req.user_text = prompts_.get(prompt_names::eval_caption_default);
        caption_req.images = config_.roles.frames_for(Role::screener, video.frame_paths);
        caption_req.request_key = make_request_key(caption_req);
        const std::string caption = gateway_->complete_chat(caption_req).text;

        const ScreenResult result =
            screen_video(video, caption, *gateway_, prompts_, config_.roles);
        std::lock_guard<std::mutex> lock(mu);
        rows.push_back({record, result.keep, result.reason});
    });

    std::sort(rows.begin(), rows.end(),
              [](const ScreenRow& a, const ScreenRow& b) {
                  return a.record.video_id < b.record.video_id;
              });

    Manifest kept;
    json ledger = json::array();
    for (const auto& row : rows) {
        if (row.keep) kept.records.push_back(row.record);
        ledger.push_back({{"video_id", row.record.video_id},
                          {"keep", row.keep},
                          {"reason", row.reason}});
    }
    kept.save(out_manifest_path);
    atomic_write_file(out_manifest_path.string() + ".ledger.json", ledger.dump(2));
    if (outcome.failed > 0 && out_manifest_path.has_parent_path()) {
        write_failure_ledger(out_manifest_path.parent_path(), "screen", outcome);
    }
    return outcome;
}

void Pipeline::mine_one(const ManifestRecord& record, const fs::path& out_dir) {
    VideoAsset video;
    video.video_id = record.video_id;
    video.category = record.category;
    video.duration_s = record.duration_s;
    video.frame_paths = sample_frames(record.source, config_.search.frames_per_video);

    const fs::path tree_path = out_dir / (record.video_id + ".tree.json");
    Tree tree = [&]() {
        if (config_.resume && fs::exists(tree_path)) {
            return Tree::deserialize(read_text_file(tree_path));
        }
        return Tree(video);
    }();

    try {
        if (config_.beam) {
            continue_beam_search(tree, *gateway_, config_.search, config_.roles, prompts_,
                                 config_.beam_size, config_.search.iterations);
        } else {
            continue_search(tree, *gateway_, config_.search, config_.roles, prompts_);
        }
    } catch (const Error&) {
        // Leave a resumable dump of whatever completed before failing.
        atomic_write_file(tree_path, tree.serialize());
        throw;
    }
    atomic_write_file(tree_path, tree.serialize());

    KeyPointPool pool = build_pool(tree, *gateway_, prompts_, config_.pool_dedup_threshold,
                                   config_.paraphrase_on);
    export_review(pool, out_dir / (record.video_id + ".review.tsv"));
    atomic_write_file(out_dir / (record.video_id + ".pool.json"), pool.to_json());

    // Verdict ledger: the audit trail behind every MC value.
    json ledger = json::array();
    for (int id = 1; id < tree.size(); ++id) {
        for (const auto& kp : tree.node(id).key_points) {
            for (const auto& q : kp.questions) {
                ledger.push_back({{"kp_id", kp.kp_id},
                                  {"node_id", id},
                                  {"key_point", kp.text},
                                  {"question", q.question_text},
                                  {"verdict_a", verdict_name(q.verdict_a)},
                                  {"verdict_b", verdict_name(q.verdict_b)},
                                  {"rationale_a", q.rationale_a},
                                  {"rationale_b", q.rationale_b}});
            }
        }
    }
    atomic_write_file(out_dir / (record.video_id + ".verdicts.json"), ledger.dump(2));
}

BatchOutcome Pipeline::cmd_mine(const fs::path& manifest_path, const fs::path& out_dir) {
    const Manifest manifest = Manifest::load(manifest_path);
    std::error_code ec;
    fs::create_directories(out_dir, ec);

    BatchOutcome outcome = run_batch(manifest, config_.workers, [&](const ManifestRecord& record) {
        mine_one(record, out_dir);
    });
    if (outcome.failed > 0) {
        write_failure_ledger(out_dir, "mine", outcome);
    }
    return outcome;
}

BatchOutcome Pipeline::cmd_evaluate(const fs::path& manifest_path, const fs::path& pools_dir,
                                    const std::string& model_name, const fs::path& out_dir) {
    const Manifest manifest = Manifest::load(manifest_path);
    std::error_code ec;
    fs::create_directories(out_dir, ec);

    const std::string effective_model =
        !model_name.empty() ? model_name
        : !config_.candidate_model_name.empty() ? config_.candidate_model_name
                                                : "candidate";

    std::mutex mu;
    std::vector<EvalRecord> records;

    BatchOutcome outcome = run_batch(manifest, config_.workers, [&](const ManifestRecord& record) {
        const fs::path pool_path = pools_dir / (record.video_id + ".pool.json");
        if (!fs::exists(pool_path)) {
            throw Error(ErrorCode::missing_pool, "no pool for " + record.video_id + " at " +
                                                     pool_path.string());
        }
        const KeyPointPool pool = KeyPointPool::from_json(read_text_file(pool_path));
        const auto reference = pool.survivors_at(config_.eval_threshold);

        VideoAsset video;
        video.video_id = record.video_id;
        video.category = record.category;
        video.duration_s = record.duration_s;
        video.frame_paths = sample_frames(record.source, config_.eval_frames);

        EvalRecord eval_record =
            evaluate_candidate(effective_model, video, reference, config_.eval_threshold,
                               *gateway_, prompts_, config_.roles, config_.eval_frames,
                               config_.prompt_profile);
        atomic_write_file(out_dir / (record.video_id + "." + effective_model + ".record.json"),
                          eval_record.to_json());
        std::lock_guard<std::mutex> lock(mu);
        records.push_back(std::move(eval_record));
    });

    if (!records.empty()) {
        std::sort(records.begin(), records.end(),
                  [](const EvalRecord& a, const EvalRecord& b) { return a.video_id < b.video_id; });
        const EvalReport report = aggregate(records);
        atomic_write_file(out_dir / ("report_" + effective_model + ".json"), report.to_json());
        atomic_write_file(out_dir / ("report_" + effective_model + ".txt"), report.render_table());
    }
    if (outcome.failed > 0) {
        write_failure_ledger(out_dir, "evaluate", outcome);
    }
    return outcome;
}

void Pipeline::cmd_report(const fs::path& results_dir, const fs::path& out_dir) {
    std::vector<EvalRecord> records;
    std::error_code ec;
    if (fs::exists(results_dir, ec)) {
        for (const auto& entry : fs::recursive_directory_iterator(results_dir)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (name.size() > 12 && name.substr(name.size() - 12) == ".record.json") {
                records.push_back(EvalRecord::from_json(read_text_file(entry.path())));
            }
        }
    }
    if (records.empty()) {
        throw Error(ErrorCode::no_results, "no .record.json files under " + results_dir.string());
    }
    fs::create_directories(out_dir, ec);

    std::map<double, std::vector<EvalRecord>> by_threshold;
    for (auto& record : records) {
        by_threshold[record.pool_threshold].push_back(std::move(record));
    }

    json doc;
    std::ostringstream text;
    std::map<std::string, std::map<double, double>> sweep;  // model -> threshold -> F1
    for (const auto& [threshold, bucket] : by_threshold) {
        const EvalReport report = aggregate(bucket);
        const std::string key = std::to_string(threshold).substr(0, 4);
        doc["thresholds"][key] = json::parse(report.to_json());
        text << "== pool threshold " << key << " ==\n" << report.render_table() << "\n";
        for (const auto& [model, counts] : report.overall) {
            sweep[model][threshold] = counts.f1();
        }
    }

    // Threshold sweep table plus rank stability between adjacent thresholds.
    if (!sweep.empty()) {
        std::vector<double> thresholds;
        for (const auto& [threshold, bucket] : by_threshold) thresholds.push_back(threshold);
        text << "== F1 across thresholds ==\nModel";
        for (double t : thresholds) text << " | " << std::to_string(t).substr(0, 4);
        text << "\n";
        for (const auto& [model, values] : sweep) {
            text << model;
            for (double t : thresholds) {
                auto it = values.find(t);
                char buf[16];
                if (it != values.end()) {
                    std::snprintf(buf, sizeof(buf), "%.1f", it->second * 100.0);
                } else {
                    std::snprintf(buf, sizeof(buf), "-");
                }
                text << " | " << buf;
            }
            text << "\n";
            for (const auto& [t, f1] : values) {
                doc["sweep"][model][std::to_string(t).substr(0, 4)] = f1;
            }
        }

        json stability = json::array();
        for (std::size_t i = 0; i + 1 < thresholds.size(); ++i) {
            std::vector<double> lhs;
            std::vector<double> rhs;
            for (const auto& [model, values] : sweep) {
                auto a = values.find(thresholds[i]);
                auto b = values.find(thresholds[i + 1]);
                if (a != values.end() && b != values.end()) {
                    lhs.push_back(a->second);
                    rhs.push_back(b->second);
                }
            }
            if (lhs.size() < 2) continue;  // rank check needs at least two models
            const double tau = kendall_tau(lhs, rhs);
            stability.push_back({{"threshold_a", thresholds[i]},
                                 {"threshold_b", thresholds[i + 1]},
                                 {"kendall_tau", tau},
                                 {"models", lhs.size()}});
            text << "rank stability " << std::to_string(thresholds[i]).substr(0, 4) << " vs "
                 << std::to_string(thresholds[i + 1]).substr(0, 4) << ": tau = " << tau << "\n";
        }
        doc["rank_stability"] = std::move(stability);
    }

    atomic_write_file(out_dir / "report.json", doc.dump(2));
    atomic_write_file(out_dir / "report.txt", text.str());
}

BatchOutcome Pipeline::cmd_distill(const fs::path& manifest_path, const fs::path& pools_dir,
                                   const fs::path& out_dir) {
    const Manifest manifest = Manifest::load(manifest_path);
    std::error_code ec;
    fs::create_directories(out_dir, ec);

    BatchOutcome outcome = run_batch(manifest, config_.workers, [&](const ManifestRecord& record) {
        const fs::path pool_path = pools_dir / (record.video_id + ".pool.json");
        const fs::path tree_path = pools_dir / (record.video_id + ".tree.json");
        if (!fs::exists(pool_path) || !fs::exists(tree_path)) {
            throw Error(ErrorCode::missing_pool,
                        "distill needs pool and tree dumps for " + record.video_id);
        }
        const KeyPointPool pool = KeyPointPool::from_json(read_text_file(pool_path));
        if (pool.survivors().empty()) {
            return;  // nothing to distill; skip with a ledger-visible success
        }
        const Tree tree = Tree::deserialize(read_text_file(tree_path));
        const auto frames =
            config_.roles.frames_for(Role::distiller, tree.video().frame_paths);
        const TrainingSample sample =
            distill_training_sample(pool, tree, *gateway_, prompts_, frames);
        atomic_write_file(out_dir / (record.video_id + ".sample.json"), sample.to_json());
    });
    if (outcome.failed > 0) {
        write_failure_ledger(out_dir, "distill", outcome);
    }
    return outcome;
}

}  // namespace autocap
