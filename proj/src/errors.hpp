#pragma once

#include <stdexcept>
#include <string>

namespace autocap {

// Every failure the pipeline can surface. The C API maps these onto its
// status codes; internally they travel as exceptions.
enum class ErrorCode {
    // provider gateway
    endpoint_unreachable,
    budget_exceeded,
    provider_refusal,
    oracle_missing,
    // search tree
    unknown_parent,
    unknown_node,
    format_version_mismatch,
    corrupt_tree,
    // actions
    too_few_actions,
    stage_extraction_failed,
    // key points
    unparseable_extraction,
    no_questions_generated,
    // post-processing
    io_failure,
    import_mismatch,
    thought_missing_delimiters,
    // evaluation
    mixed_threshold,
    missing_pool,
    no_results,
    unreadable_video,
    // pipeline
    config_error,
    manifest_error,
    search_aborted,
    invalid_argument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace autocap
