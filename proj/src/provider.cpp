#include "provider.hpp"

#include <json.hpp>

#include "errors.hpp"
#include "util.hpp"

namespace autocap {

namespace {

struct RoleName {
    Role role;
    const char* name;
};

constexpr RoleName kRoleNames[] = {
    {Role::generator, "generator"},
    {Role::overall_describer, "overall_describer"},
    {Role::kp_extractor, "kp_extractor"},
    {Role::question_writer, "question_writer"},
    {Role::verifier_a, "verifier_a"},
    {Role::verifier_b, "verifier_b"},
    {Role::judge, "judge"},
    {Role::embedder, "embedder"},
    {Role::paraphraser, "paraphraser"},
    {Role::filter_judge, "filter_judge"},
    {Role::screener, "screener"},
    {Role::distiller, "distiller"},
    {Role::candidate_model, "candidate_model"},
};

}  // namespace

const char* role_name(Role role) {
    for (const auto& entry : kRoleNames) {
        if (entry.role == role) return entry.name;
    }
    return "unknown";
}

std::optional<Role> role_from_name(std::string_view name) {
    for (const auto& entry : kRoleNames) {
        if (name == entry.name) return entry.role;
    }
    return std::nullopt;
}

const char* finish_state_name(FinishState s) {
    switch (s) {
        case FinishState::complete: return "complete";
        case FinishState::truncated: return "truncated";
        case FinishState::refused: return "refused";
    }
    return "unknown";
}

std::string make_request_key(const ChatRequest& req) {
    std::uint64_t h = fnv1a64(role_name(req.role));
    h ^= static_cast<std::uint64_t>(req.role_instance) * kFnvPrime;
    h = fnv1a64(req.system_text, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(req.user_text, h);
    for (const auto& img : req.images) {
        h = fnv1a64("\x1e", h);
        h = fnv1a64(img, h);
    }
    char temp_buf[32];
    std::snprintf(temp_buf, sizeof(temp_buf), "%.6f", req.temperature);
    h = fnv1a64(temp_buf, h);
    return to_hex(h);
}

int RolePolicy::frame_budget(Role role) const {
    auto it = bindings.find(role);
    return it == bindings.end() ? 64 : it->second.frame_budget;
}

double RolePolicy::temperature(Role role) const {
    auto it = bindings.find(role);
    if (it != bindings.end()) return it->second.temperature;
    return role == Role::generator ? 0.7 : 0.0;
}

std::vector<std::string> RolePolicy::frames_for(Role role,
                                                const std::vector<std::string>& frames) const {
    const auto budget = static_cast<std::size_t>(std::max(0, frame_budget(role)));
    if (frames.size() <= budget) return frames;
    return std::vector<std::string>(frames.begin(),
                                    frames.begin() + static_cast<std::ptrdiff_t>(budget));
}

std::optional<ChatResponse> ResponseCache::lookup(const std::string& request_key) const {
    if (!enabled()) return std::nullopt;
    const auto path = dir_ / (request_key + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
        auto doc = nlohmann::json::parse(read_text_file(path));
        ChatResponse resp;
        resp.text = doc.at("text").get<std::string>();
        const std::string fs = doc.at("finish_state").get<std::string>();
        if (fs == "truncated") {
            resp.finish_state = FinishState::truncated;
        } else if (fs == "refused") {
            resp.finish_state = FinishState::refused;
        } else {
            resp.finish_state = FinishState::complete;
        }
        resp.latency_ms = doc.value("latency_ms", std::int64_t{0});
        return resp;
    } catch (const std::exception&) {
        // Corrupt entry: treat as a miss and let the caller refresh it.
        return std::nullopt;
    }
}

void ResponseCache::store(const std::string& request_key, const ChatResponse& response) const {
    if (!enabled()) return;
    nlohmann::json doc;
    doc["text"] = response.text;
    doc["finish_state"] = finish_state_name(response.finish_state);
    doc["latency_ms"] = response.latency_ms;
    atomic_write_file(dir_ / (request_key + ".json"), doc.dump(2));
}

}  // namespace autocap
