#include "autocaption.h"

#include <memory>
#include <string>

#include "errors.hpp"
#include "pipeline.hpp"

// The C boundary: opaque handle holding the config, a lazily-built pipeline
// and the last error message.
struct ac_pipeline {
    autocap::PipelineConfig config;
    std::unique_ptr<autocap::Pipeline> built;
    bool dirty = true;  // config changed since the pipeline was built
    std::string last_error;
};

namespace {

constexpr const char* kVersion = "0.1.0";

ac_status status_from_code(autocap::ErrorCode code) {
    using autocap::ErrorCode;
    switch (code) {
        case ErrorCode::config_error:
        case ErrorCode::manifest_error:
            return AC_ERR_CONFIG;
        case ErrorCode::invalid_argument:
        case ErrorCode::budget_exceeded:
        case ErrorCode::too_few_actions:
        case ErrorCode::mixed_threshold:
        case ErrorCode::unknown_parent:
        case ErrorCode::unknown_node:
            return AC_ERR_INVALID_ARG;
        case ErrorCode::io_failure:
        case ErrorCode::missing_pool:
        case ErrorCode::no_results:
        case ErrorCode::corrupt_tree:
        case ErrorCode::format_version_mismatch:
        case ErrorCode::import_mismatch:
        case ErrorCode::unreadable_video:
            return AC_ERR_IO;
        case ErrorCode::endpoint_unreachable:
        case ErrorCode::provider_refusal:
        case ErrorCode::oracle_missing:
        case ErrorCode::search_aborted:
            return AC_ERR_PROVIDER;
        default:
            return AC_ERR_INTERNAL;
    }
}

autocap::Pipeline& pipeline_of(ac_pipeline* p) {
    if (p->dirty || !p->built) {
        p->built = std::make_unique<autocap::Pipeline>(p->config);
        p->dirty = false;
    }
    return *p->built;
}

template <typename Fn>
ac_status guarded(ac_pipeline* p, Fn&& fn) {
    if (!p) return AC_ERR_INVALID_ARG;
    p->last_error.clear();
    try {
        return fn();
    } catch (const autocap::Error& e) {
        p->last_error = e.what();
        return status_from_code(e.code());
    } catch (const std::exception& e) {
        p->last_error = e.what();
        return AC_ERR_INTERNAL;
    }
}

ac_status from_outcome(const autocap::BatchOutcome& outcome, ac_pipeline* p) {
    if (outcome.failed == 0) return AC_OK;
    std::string note = std::to_string(outcome.failed) + " video(s) failed:";
    for (const auto& [video_id, error] : outcome.failures) {
        note += " [" + video_id + ": " + error + "]";
    }
    p->last_error = note;
    return AC_PARTIAL;
}

}  // namespace

extern "C" {

const char* ac_version(void) { return kVersion; }

ac_status ac_pipeline_open(const char* config_path, ac_pipeline** out) {
    if (!out) return AC_ERR_INVALID_ARG;
    *out = nullptr;
    auto handle = std::make_unique<ac_pipeline>();
    if (config_path && *config_path) {
        try {
            handle->config = autocap::PipelineConfig::load(config_path);
        } catch (const autocap::Error& e) {
            return status_from_code(e.code());
        } catch (const std::exception&) {
            return AC_ERR_CONFIG;
        }
    }
    *out = handle.release();
    return AC_OK;
}

void ac_pipeline_close(ac_pipeline* p) { delete p; }

const char* ac_pipeline_last_error(const ac_pipeline* p) {
    return p ? p->last_error.c_str() : "null pipeline";
}

ac_status ac_pipeline_set(ac_pipeline* p, const char* key, const char* value) {
    return guarded(p, [&]() {
        if (!key || !value) {
            throw autocap::Error(autocap::ErrorCode::invalid_argument, "null option key/value");
        }
        p->config.set_option(key, value);
        p->dirty = true;
        return AC_OK;
    });
}

ac_status ac_screen(ac_pipeline* p, const char* manifest_path, const char* out_manifest_path) {
    return guarded(p, [&]() {
        if (!manifest_path || !out_manifest_path) {
            throw autocap::Error(autocap::ErrorCode::invalid_argument, "null path");
        }
        return from_outcome(pipeline_of(p).cmd_screen(manifest_path, out_manifest_path), p);
    });
}

ac_status ac_mine(ac_pipeline* p, const char* manifest_path, const char* out_dir) {
    return guarded(p, [&]() {
        if (!manifest_path || !out_dir) {
            throw autocap::Error(autocap::ErrorCode::invalid_argument, "null path");
        }
        return from_outcome(pipeline_of(p).cmd_mine(manifest_path, out_dir), p);
    });
}

ac_status ac_evaluate(ac_pipeline* p, const char* manifest_path, const char* pools_dir,
                      const char* model_name, const char* out_dir) {
    return guarded(p, [&]() {
        if (!manifest_path || !pools_dir || !out_dir) {
            throw autocap::Error(autocap::ErrorCode::invalid_argument, "null path");
        }
        return from_outcome(pipeline_of(p).cmd_evaluate(manifest_path, pools_dir,
                                                        model_name ? model_name : "", out_dir),
                            p);
    });
}

ac_status ac_report(ac_pipeline* p, const char* results_dir, const char* out_dir) {
    return guarded(p, [&]() {
        if (!results_dir || !out_dir) {
            throw autocap::Error(autocap::ErrorCode::invalid_argument, "null path");
        }
        pipeline_of(p).cmd_report(results_dir, out_dir);
        return AC_OK;
    });
}

ac_status ac_distill(ac_pipeline* p, const char* manifest_path, const char* pools_dir,
                     const char* out_dir) {
    return guarded(p, [&]() {
        if (!manifest_path || !pools_dir || !out_dir) {
            throw autocap::Error(autocap::ErrorCode::invalid_argument, "null path");
        }
        return from_outcome(pipeline_of(p).cmd_distill(manifest_path, pools_dir, out_dir), p);
    });
}

}  // extern "C"
