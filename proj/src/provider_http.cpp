#include "provider_http.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "errors.hpp"
#include "util.hpp"

namespace autocap {

namespace {

using nlohmann::json;

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string mime_type_for(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : lowercase(path.substr(dot + 1));
    if (ext == "png") return "image/png";
    if (ext == "gif") return "image/gif";
    if (ext == "webp") return "image/webp";
    if (ext == "bmp") return "image/bmp";
    return "image/jpeg";
}

bool retryable_status(int status) {
    return status == 429 || status == 500 || status == 502 || status == 503 || status == 504;
}

}  // namespace

std::string base64_encode(std::string_view data) {
    static const char table[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= data.size()) {
        std::uint32_t v = (static_cast<unsigned char>(data[i]) << 16) |
                          (static_cast<unsigned char>(data[i + 1]) << 8) |
                          static_cast<unsigned char>(data[i + 2]);
        out.push_back(table[(v >> 18) & 0x3f]);
        out.push_back(table[(v >> 12) & 0x3f]);
        out.push_back(table[(v >> 6) & 0x3f]);
        out.push_back(table[v & 0x3f]);
        i += 3;
    }
    if (i + 1 == data.size()) {
        std::uint32_t v = static_cast<unsigned char>(data[i]) << 16;
        out.push_back(table[(v >> 18) & 0x3f]);
        out.push_back(table[(v >> 12) & 0x3f]);
        out += "==";
    } else if (i + 2 == data.size()) {
        std::uint32_t v = (static_cast<unsigned char>(data[i]) << 16) |
                          (static_cast<unsigned char>(data[i + 1]) << 8);
        out.push_back(table[(v >> 18) & 0x3f]);
        out.push_back(table[(v >> 12) & 0x3f]);
        out.push_back(table[(v >> 6) & 0x3f]);
        out.push_back('=');
    }
    return out;
}

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
    ParsedEndpoint parsed;
    auto scheme_end = endpoint.find("://");
    std::size_t authority_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = endpoint.find('/', authority_start);
    if (path_start == std::string::npos) {
        parsed.base = endpoint;
    } else {
        parsed.base = endpoint.substr(0, path_start);
        parsed.path_prefix = endpoint.substr(path_start);
        while (!parsed.path_prefix.empty() && parsed.path_prefix.back() == '/') {
            parsed.path_prefix.pop_back();
        }
    }
    return parsed;
}

HttpGateway::HttpGateway(Options options) : options_(std::move(options)) {
    if (!options_.cache_dir.empty()) {
        cache_ = ResponseCache(options_.cache_dir);
    }
}

bool HttpGateway::has_role(Role role) const {
    auto it = options_.roles.find(role);
    return it != options_.roles.end() && !it->second.endpoint.empty();
}

int HttpGateway::overall_instances() const {
    return options_.overall_describer_2 ? 2 : 1;
}

const RoleBinding& HttpGateway::binding_for(Role role, int instance) const {
    if (role == Role::overall_describer && instance > 0) {
        if (!options_.overall_describer_2) {
            throw Error(ErrorCode::config_error, "no second overall_describer endpoint");
        }
        return *options_.overall_describer_2;
    }
    auto it = options_.roles.find(role);
    if (it == options_.roles.end() || it->second.endpoint.empty()) {
        throw Error(ErrorCode::config_error,
                    std::string("no endpoint configured for role ") + role_name(role));
    }
    return it->second;
}

void HttpGateway::throttle(const RoleBinding& binding) {
    if (binding.min_interval_ms <= 0) return;
    EndpointState* state = nullptr;
    {
        std::lock_guard<std::mutex> lock(states_mu_);
        auto& slot = endpoint_states_[binding.endpoint];
        if (!slot) slot = std::make_unique<EndpointState>();
        state = slot.get();
    }
    std::lock_guard<std::mutex> lock(state->mu);
    const std::int64_t now = now_ms();
    const std::int64_t wait = state->last_request_ms + binding.min_interval_ms - now;
    if (wait > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(wait));
    }
    state->last_request_ms = now_ms();
}

ChatResponse HttpGateway::post_chat_once(const RoleBinding& binding, const ChatRequest& req) {
    const ParsedEndpoint ep = parse_endpoint(binding.endpoint);
    httplib::Client client(ep.base);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(600, 0);

    httplib::Headers headers;
    if (!binding.api_key_env.empty()) {
        if (const char* key = std::getenv(binding.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    json messages = json::array();
    if (!req.system_text.empty()) {
        messages.push_back({{"role", "system"}, {"content", req.system_text}});
    }
    if (req.images.empty()) {
        messages.push_back({{"role", "user"}, {"content", req.user_text}});
    } else {
        json content = json::array();
        content.push_back({{"type", "text"}, {"text", req.user_text}});
        for (const auto& frame : req.images) {
            std::string bytes;
            try {
                bytes = read_text_file(frame);
            } catch (const std::exception& e) {
                throw Error(ErrorCode::io_failure, e.what());
            }
            content.push_back(
                {{"type", "image_url"},
                 {"image_url",
                  {{"url", "data:" + mime_type_for(frame) + ";base64," + base64_encode(bytes)}}}});
        }
        messages.push_back({{"role", "user"}, {"content", std::move(content)}});
    }

    json body;
    body["model"] = binding.model_name;
    body["messages"] = std::move(messages);
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_output_tokens;

    const std::int64_t started = now_ms();
    auto result = client.Post(ep.path_prefix + "/chat/completions", headers, body.dump(),
                              "application/json");
    if (!result) {
        throw Error(ErrorCode::endpoint_unreachable,
                    "transport failure against " + binding.endpoint);
    }
    if (retryable_status(result->status)) {
        throw Error(ErrorCode::endpoint_unreachable,
                    "HTTP " + std::to_string(result->status) + " from " + binding.endpoint);
    }
    if (result->status != 200) {
        throw Error(ErrorCode::provider_refusal,
                    "HTTP " + std::to_string(result->status) + ": " + result->body);
    }

    ChatResponse resp;
    resp.latency_ms = now_ms() - started;
    try {
        auto doc = json::parse(result->body);
        const auto& choice = doc.at("choices").at(0);
        const auto& message = choice.at("message");
        if (message.contains("content") && message["content"].is_string()) {
            resp.text = message["content"].get<std::string>();
        }
        const std::string finish = choice.value("finish_reason", "stop");
        if (finish == "length") {
            resp.finish_state = FinishState::truncated;
        } else if (finish == "content_filter" || (message.contains("refusal") && !message["refusal"].is_null())) {
            resp.finish_state = FinishState::refused;
        } else {
            resp.finish_state = FinishState::complete;
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::provider_refusal, std::string("unparseable provider payload: ") + e.what());
    }
    if (resp.finish_state == FinishState::refused) {
        throw Error(ErrorCode::provider_refusal, "provider refused the request");
    }
    // A complete response carries text; an empty one is unusable downstream.
    if (resp.finish_state == FinishState::complete && resp.text.empty()) {
        throw Error(ErrorCode::provider_refusal, "provider returned an empty completion");
    }
    return resp;
}

ChatResponse HttpGateway::complete_chat(const ChatRequest& req) {
    const RoleBinding& binding = binding_for(req.role, req.role_instance);
    if (static_cast<int>(req.images.size()) > binding.frame_budget) {
        throw Error(ErrorCode::budget_exceeded,
                    std::to_string(req.images.size()) + " frames exceed budget " +
                        std::to_string(binding.frame_budget) + " for role " + role_name(req.role));
    }

    const std::string key = req.request_key.empty() ? make_request_key(req) : req.request_key;
    if (auto hit = cache_.lookup(key)) {
        return *hit;
    }

    // 1 + max_retries transport attempts, exponential backoff between them.
    Error last(ErrorCode::endpoint_unreachable, "no attempt made");
    const int attempts = 1 + std::max(0, binding.max_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(options_.backoff_base_ms << (attempt - 1)));
        }
        throttle(binding);
        try {
            ChatResponse resp = post_chat_once(binding, req);
            cache_.store(key, resp);
            return resp;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::endpoint_unreachable) throw;
            last = e;
        }
    }
    throw last;
}

std::vector<EmbeddingVector> HttpGateway::embed_texts(const std::vector<std::string>& texts) {
    if (!has_role(Role::embedder)) {
        return fallback_.embed_all(texts);
    }
    const RoleBinding& binding = binding_for(Role::embedder, 0);
    const ParsedEndpoint ep = parse_endpoint(binding.endpoint);
    httplib::Client client(ep.base);
    client.set_read_timeout(600, 0);
    httplib::Headers headers;
    if (!binding.api_key_env.empty()) {
        if (const char* key = std::getenv(binding.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    json body;
    body["model"] = binding.model_name;
    body["input"] = texts;

    const int attempts = 1 + std::max(0, binding.max_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(options_.backoff_base_ms << (attempt - 1)));
        }
        throttle(binding);
        auto result = client.Post(ep.path_prefix + "/embeddings", headers, body.dump(),
                                  "application/json");
        if (!result || retryable_status(result->status)) continue;
        if (result->status != 200) {
            throw Error(ErrorCode::endpoint_unreachable,
                        "HTTP " + std::to_string(result->status) + " from embedder");
        }
        try {
            auto doc = json::parse(result->body);
            std::vector<EmbeddingVector> out(texts.size());
            for (const auto& item : doc.at("data")) {
                const std::size_t index = item.at("index").get<std::size_t>();
                if (index >= out.size()) continue;
                out[index].values = item.at("embedding").get<std::vector<double>>();
            }
            return out;
        } catch (const json::exception& e) {
            throw Error(ErrorCode::endpoint_unreachable,
                        std::string("unparseable embeddings payload: ") + e.what());
        }
    }
    throw Error(ErrorCode::endpoint_unreachable, "embeddings endpoint unreachable");
}

}  // namespace autocap
