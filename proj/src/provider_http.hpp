#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "provider.hpp"

namespace autocap {

// OpenAI-compatible chat-completions / embeddings client. Frames travel as
// base64 data URLs inside the chat message content.
class HttpGateway : public ProviderGateway {
public:
    struct Options {
        std::map<Role, RoleBinding> roles;
        // Second overall-describer endpoint; when set the bootstrap invokes
        // both and the root gains two children.
        std::optional<RoleBinding> overall_describer_2;
        std::string cache_dir;        // empty disables the response cache
        int backoff_base_ms = 250;    // doubled per retry
    };

    explicit HttpGateway(Options options);

    bool has_role(Role role) const override;
    int overall_instances() const override;
    ChatResponse complete_chat(const ChatRequest& req) override;
    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts) override;

private:
    struct EndpointState {
        std::mutex mu;
        std::int64_t last_request_ms = 0;
    };

    const RoleBinding& binding_for(Role role, int instance) const;
    void throttle(const RoleBinding& binding);
    ChatResponse post_chat_once(const RoleBinding& binding, const ChatRequest& req);

    Options options_;
    ResponseCache cache_;
    FallbackEmbedder fallback_;
    std::mutex states_mu_;
    std::map<std::string, std::unique_ptr<EndpointState>> endpoint_states_;
};

// Splits "https://host:8080/v1" into the client base and path prefix.
struct ParsedEndpoint {
    std::string base;         // scheme://host[:port]
    std::string path_prefix;  // possibly empty
};
ParsedEndpoint parse_endpoint(const std::string& endpoint);

std::string base64_encode(std::string_view data);

}  // namespace autocap
