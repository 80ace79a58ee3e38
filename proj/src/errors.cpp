#include "errors.hpp"

namespace autocap {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::endpoint_unreachable: return "EndpointUnreachable";
        case ErrorCode::budget_exceeded: return "BudgetExceeded";
        case ErrorCode::provider_refusal: return "ProviderRefusal";
        case ErrorCode::oracle_missing: return "OracleMissing";
        case ErrorCode::unknown_parent: return "UnknownParent";
        case ErrorCode::unknown_node: return "UnknownNode";
        case ErrorCode::format_version_mismatch: return "FormatVersionMismatch";
        case ErrorCode::corrupt_tree: return "CorruptTree";
        case ErrorCode::too_few_actions: return "TooFewActions";
        case ErrorCode::stage_extraction_failed: return "StageExtractionFailed";
        case ErrorCode::unparseable_extraction: return "UnparseableExtraction";
        case ErrorCode::no_questions_generated: return "NoQuestionsGenerated";
        case ErrorCode::io_failure: return "IoFailure";
        case ErrorCode::import_mismatch: return "ImportMismatch";
        case ErrorCode::thought_missing_delimiters: return "ThoughtMissingDelimiters";
        case ErrorCode::mixed_threshold: return "MixedThreshold";
        case ErrorCode::missing_pool: return "MissingPool";
        case ErrorCode::no_results: return "NoResults";
        case ErrorCode::unreadable_video: return "UnreadableVideo";
        case ErrorCode::config_error: return "ConfigError";
        case ErrorCode::manifest_error: return "ManifestError";
        case ErrorCode::search_aborted: return "SearchAborted";
        case ErrorCode::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

}  // namespace autocap
