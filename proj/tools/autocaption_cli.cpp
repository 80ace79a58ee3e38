// Command-line front end over the shared-library C API.
//
// Exit codes: 0 success, 1 partial (some videos failed), 2 fatal error.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "autocaption.h"

namespace {

struct Options {
    std::string config;
    std::string manifest;
    std::string pools;
    std::string results;
    std::string out;
    std::string model_endpoint;
    std::string model_name;
    std::vector<std::pair<std::string, std::string>> knobs;
};

int finish(ac_pipeline* pipeline, ac_status status) {
    int exit_code = 0;
    if (status == AC_PARTIAL) {
        std::fprintf(stderr, "partial failure: %s\n", ac_pipeline_last_error(pipeline));
        exit_code = 1;
    } else if (status != AC_OK) {
        std::fprintf(stderr, "error (%d): %s\n", static_cast<int>(status),
                     ac_pipeline_last_error(pipeline));
        exit_code = 2;
    }
    ac_pipeline_close(pipeline);
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tree-search mining of verified video key points, with an "
                 "entailment-based evaluation harness"};
    app.require_subcommand(1);

    Options opt;
    bool simulated = false;
    bool beam = false;
    bool resume = false;
    bool no_paraphrase = false;
    std::string seed;
    std::string workers;
    std::string iterations;
    std::string c_explore;
    std::string alpha;
    std::string beta;
    std::string frames;
    std::string beam_size;
    std::string dedup_threshold;
    std::string pool_threshold;
    std::string eval_frames;
    std::string prompt_profile;
    std::string cache_dir;

    app.add_option("--config", opt.config, "pipeline config file (JSON)");
    app.add_option("--seed", seed, "deterministic run seed");
    app.add_option("--workers", workers, "parallel videos");
    app.add_flag("--simulated", simulated, "use the deterministic simulated backend");
    app.add_option("--cache-dir", cache_dir, "provider response cache directory");

    auto* screen = app.add_subcommand("screen", "filter a manifest down to usable videos");
    screen->add_option("--manifest", opt.manifest, "input manifest")->required();
    screen->add_option("--out", opt.out, "filtered manifest path")->required();

    auto* mine = app.add_subcommand("mine", "run the tree search and build key-point pools");
    mine->add_option("--manifest", opt.manifest, "input manifest")->required();
    mine->add_option("--out", opt.out, "output directory")->required();
    mine->add_option("--iterations", iterations, "search iterations (default 25)");
    mine->add_option("--c-explore", c_explore, "exploration constant (default 0.125)");
    mine->add_option("--alpha", alpha, "value weight (default 0.5)");
    mine->add_option("--beta", beta, "similarity weight (default 0.5)");
    mine->add_option("--frames", frames, "frames sampled per video (default 64)");
    mine->add_option("--dedup-threshold", dedup_threshold, "pool dedup threshold (default 0.9)");
    mine->add_flag("--beam", beam, "run the beam-search baseline instead");
    mine->add_option("--beam-size", beam_size, "children per beam round (default 2)");
    mine->add_flag("--resume", resume, "continue from existing tree dumps");
    mine->add_flag("--no-paraphrase", no_paraphrase, "skip the paraphrase pass");

    auto* evaluate = app.add_subcommand("evaluate", "score a candidate model against pools");
    evaluate->add_option("--manifest", opt.manifest, "input manifest")->required();
    evaluate->add_option("--pools", opt.pools, "directory of mined pools")->required();
    evaluate->add_option("--out", opt.out, "results directory")->required();
    evaluate->add_option("--model-endpoint", opt.model_endpoint, "candidate chat endpoint");
    evaluate->add_option("--model-name", opt.model_name, "candidate model name");
    evaluate->add_option("--frames", eval_frames, "frames per caption (default 16)");
    evaluate->add_option("--prompt-profile", prompt_profile,
                         "caption prompt profile: default, vila, pllava");
    evaluate->add_option("--pool-threshold", pool_threshold,
                         "pool similarity threshold (default 0.8)");

    auto* report = app.add_subcommand("report", "render tables from evaluation results");
    report->add_option("--results", opt.results, "directory of .record.json files")->required();
    report->add_option("--out", opt.out, "report output directory")->required();

    auto* distill = app.add_subcommand("distill", "build training samples from pools");
    distill->add_option("--manifest", opt.manifest, "input manifest")->required();
    distill->add_option("--pools", opt.pools, "directory of mined pools + trees")->required();
    distill->add_option("--out", opt.out, "samples output directory")->required();

    CLI11_PARSE(app, argc, argv);

    ac_pipeline* pipeline = nullptr;
    ac_status status = ac_pipeline_open(opt.config.empty() ? nullptr : opt.config.c_str(),
                                        &pipeline);
    if (status != AC_OK || !pipeline) {
        std::fprintf(stderr, "cannot open pipeline config (%d)\n", static_cast<int>(status));
        return 2;
    }

    auto set = [&](const char* key, const std::string& value) {
        if (value.empty()) return true;
        if (ac_pipeline_set(pipeline, key, value.c_str()) != AC_OK) {
            std::fprintf(stderr, "bad option %s=%s: %s\n", key, value.c_str(),
                         ac_pipeline_last_error(pipeline));
            return false;
        }
        return true;
    };

    bool ok = set("seed", seed) && set("workers", workers) && set("cache_dir", cache_dir) &&
              set("iterations", iterations) && set("c_explore", c_explore) &&
              set("alpha", alpha) && set("beta", beta) && set("frames", frames) &&
              set("beam_size", beam_size) && set("dedup_threshold", dedup_threshold) &&
              set("pool_threshold", pool_threshold) && set("eval_frames", eval_frames) &&
              set("prompt_profile", prompt_profile) &&
              set("model_endpoint", opt.model_endpoint) && set("model_name", opt.model_name);
    if (ok && simulated) ok = set("simulated", "1");
    if (ok && beam) ok = set("beam", "1");
    if (ok && resume) ok = set("resume", "1");
    if (ok && no_paraphrase) ok = set("paraphrase", "0");
    if (!ok) {
        ac_pipeline_close(pipeline);
        return 2;
    }

    if (screen->parsed()) {
        return finish(pipeline, ac_screen(pipeline, opt.manifest.c_str(), opt.out.c_str()));
    }
    if (mine->parsed()) {
        return finish(pipeline, ac_mine(pipeline, opt.manifest.c_str(), opt.out.c_str()));
    }
    if (evaluate->parsed()) {
        return finish(pipeline, ac_evaluate(pipeline, opt.manifest.c_str(), opt.pools.c_str(),
                                            opt.model_name.empty() ? nullptr
                                                                   : opt.model_name.c_str(),
                                            opt.out.c_str()));
    }
    if (report->parsed()) {
        return finish(pipeline, ac_report(pipeline, opt.results.c_str(), opt.out.c_str()));
    }
    if (distill->parsed()) {
        return finish(pipeline, ac_distill(pipeline, opt.manifest.c_str(), opt.pools.c_str(),
                                           opt.out.c_str()));
    }
    ac_pipeline_close(pipeline);
    return 2;
}
