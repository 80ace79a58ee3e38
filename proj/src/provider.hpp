#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "embedding.hpp"

namespace autocap {

// Pipeline roles, each bindable to its own model endpoint. candidate_model
// is the model under evaluation, bound at evaluate time rather than in the
// pipeline config.
enum class Role {
    generator,
    overall_describer,
    kp_extractor,
    question_writer,
    verifier_a,
    verifier_b,
    judge,
    embedder,
    paraphraser,
    filter_judge,
    screener,
    distiller,
    candidate_model,
};

const char* role_name(Role role);
std::optional<Role> role_from_name(std::string_view name);

// Binding of one role to an OpenAI-compatible endpoint.
struct RoleBinding {
    std::string endpoint;        // e.g. https://host/v1
    std::string model_name;
    int frame_budget = 64;
    double temperature = 0.0;
    int max_retries = 3;
    std::string api_key_env;     // environment variable holding the key
    int min_interval_ms = 0;     // per-endpoint rate limit; 0 = unlimited
};

enum class FinishState { complete, truncated, refused };

const char* finish_state_name(FinishState s);

struct ChatRequest {
    Role role = Role::generator;
    int role_instance = 0;            // roles with several endpoints (overall describer)
    std::string system_text;
    std::string user_text;
    std::vector<std::string> images;  // frame paths, at most the role's frame budget
    double temperature = 0.0;
    int max_output_tokens = 2048;
    std::string request_key;          // deterministic replay/cache key
};

struct ChatResponse {
    std::string text;
    FinishState finish_state = FinishState::complete;
    std::int64_t latency_ms = 0;
};

// Derives the replay key from everything that identifies the call.
std::string make_request_key(const ChatRequest& req);

// Uniform access to all external models. Thread safe; many workers may
// issue requests concurrently.
class ProviderGateway {
public:
    virtual ~ProviderGateway() = default;

    virtual bool has_role(Role role) const = 0;

    // Endpoints bound to the overall-describer role (1 or 2).
    virtual int overall_instances() const { return 1; }

    virtual ChatResponse complete_chat(const ChatRequest& req) = 0;

    // One vector per input, order preserved. Falls back to the built-in
    // character-3-gram embedder when no embedding endpoint is configured.
    virtual std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) = 0;
};

// Per-role request parameters. Roles without an explicit binding fall back
// to the defaults: frame budget 64, temperature 0 everywhere except the
// generator's 0.7.
struct RolePolicy {
    std::map<Role, RoleBinding> bindings;

    int frame_budget(Role role) const;
    double temperature(Role role) const;

    // The first min(budget, |frames|) frames for the role.
    std::vector<std::string> frames_for(Role role, const std::vector<std::string>& frames) const;
};

// One file per request_key under cache_dir; writes are atomic so parallel
// workers can share the directory.
class ResponseCache {
public:
    ResponseCache() = default;
    explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    bool enabled() const { return !dir_.empty(); }
    std::optional<ChatResponse> lookup(const std::string& request_key) const;
    void store(const std::string& request_key, const ChatResponse& response) const;

private:
    std::filesystem::path dir_;
};

}  // namespace autocap
