#include "verification.hpp"

#include <future>

#include <json.hpp>

#include "errors.hpp"
#include "util.hpp"

namespace autocap {

namespace {

// One verifier call carries at most this many questions; larger nodes split.
constexpr std::size_t kQuestionsPerCall = 20;

std::vector<std::string> parse_bullet_lines(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& line : split_lines(text)) {
        const std::string t = trim(line);
        if (t.size() >= 2 && t[0] == '>') {
            std::string item = trim(std::string_view(t).substr(1));
            if (!item.empty()) out.push_back(std::move(item));
        }
    }
    return out;
}

}  // namespace

std::vector<KeyPoint> extract_key_points(const std::string& description,
                                         const std::string& video_id, int node_id,
                                         ProviderGateway& gateway, const PromptLibrary& prompts,
                                         const std::vector<std::string>& frames) {
    ChatRequest req;
    req.role = Role::kp_extractor;
    req.user_text = PromptLibrary::fill(prompts.get(prompt_names::extract_kp),
                                        {{"description", description}});
    req.images = frames;
    req.request_key = make_request_key(req);
    const std::string reply = gateway.complete_chat(req).text;

    const auto lines = parse_bullet_lines(reply);
    if (lines.empty()) {
        throw Error(ErrorCode::unparseable_extraction, "no '>' lines in extractor reply");
    }
    std::vector<KeyPoint> out;
    out.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        KeyPoint kp;
        kp.kp_id = video_id + "/" + std::to_string(node_id) + "/" + std::to_string(i);
        kp.text = lines[i];
        kp.status = KpStatus::unverified;
        out.push_back(std::move(kp));
    }
    return out;
}

void categorize_key_point(KeyPoint& kp, ProviderGateway& gateway, const PromptLibrary& prompts) {
    ChatRequest req;
    req.role = Role::kp_extractor;
    req.user_text =
        PromptLibrary::fill(prompts.get(prompt_names::categorize_kp), {{"key_point", kp.text}});
    req.request_key = make_request_key(req);

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply;
        try {
            reply = gateway.complete_chat(req).text;
        } catch (const Error&) {
            break;
        }
        if (auto category = kp_category_from_text(reply)) {
            kp.category = *category;
            kp.category_defaulted = false;
            return;
        }
        // Nudge the retry onto a distinct request key so caches do not
        // replay the same unusable answer.
        req.user_text += "\nPlease answer with one of the five category names.";
        req.request_key = make_request_key(req);
    }
    kp.category = KpCategory::object;
    kp.category_defaulted = true;
}

std::vector<VerificationQuestion> generate_questions(const KeyPoint& kp, ProviderGateway& gateway,
                                                     const PromptLibrary& prompts) {
    ChatRequest req;
    req.role = Role::question_writer;
    req.user_text = PromptLibrary::fill(prompts.get(prompt_names::generate_questions),
                                        {{"key_point", kp.text}});
    req.request_key = make_request_key(req);
    const std::string reply = gateway.complete_chat(req).text;

    std::vector<VerificationQuestion> out;
    for (const auto& line : parse_bullet_lines(reply)) {
        VerificationQuestion q;
        q.question_text = line;
        out.push_back(std::move(q));
    }
    if (out.empty()) {
        throw Error(ErrorCode::no_questions_generated, "question writer produced no questions");
    }
    return out;
}

std::vector<std::pair<Verdict, std::string>> parse_verifier_reply(const std::string& reply,
                                                                  std::size_t question_count) {
    std::vector<std::pair<Verdict, std::string>> verdicts(
        question_count, {Verdict::error, "missing answer"});

    std::vector<std::string> items;
    try {
        auto arr = nlohmann::json::parse(reply);
        if (arr.is_array()) {
            for (const auto& item : arr) {
                if (item.is_string()) items.push_back(item.get<std::string>());
            }
        }
    } catch (const nlohmann::json::exception&) {
        // Fall back to one answer per line.
        for (const auto& line : split_lines(reply)) {
            if (!trim(line).empty()) items.push_back(trim(line));
        }
    }

    for (const auto& item : items) {
        auto parsed = parse_numbered_line(item);
        if (!parsed) continue;
        const auto index = static_cast<std::size_t>(parsed->first);
        if (index == 0 || index > question_count) continue;
        std::string body = parsed->second;
        // Leading yes/no token decides, case-insensitively, with brackets
        // tolerated: "[Yes], [reason]" or "yes, reason".
        std::size_t pos = 0;
        while (pos < body.size() &&
               (body[pos] == '[' || std::isspace(static_cast<unsigned char>(body[pos])))) {
            ++pos;
        }
        std::size_t end = pos;
        while (end < body.size() && std::isalpha(static_cast<unsigned char>(body[end]))) ++end;
        const std::string token = lowercase(body.substr(pos, end - pos));
        Verdict verdict = Verdict::error;
        if (token == "yes") verdict = Verdict::yes;
        if (token == "no") verdict = Verdict::no;
        verdicts[index - 1] = {verdict, body};
    }
    return verdicts;
}

namespace {

std::vector<std::pair<Verdict, std::string>> ask_verifier(Role role,
                                                          const std::vector<std::string>& questions,
                                                          const std::vector<std::string>& frames,
                                                          ProviderGateway& gateway,
                                                          const PromptLibrary& prompts) {
    std::vector<std::string> numbered;
    numbered.reserve(questions.size());
    for (std::size_t i = 0; i < questions.size(); ++i) {
        numbered.push_back(std::to_string(i + 1) + ". " + questions[i]);
    }
    ChatRequest req;
    req.role = role;
    req.user_text = PromptLibrary::fill(prompts.get(prompt_names::answer_questions),
                                        {{"ques_num", std::to_string(questions.size())},
                                         {"question_list", join(numbered, "\n")}});
    req.images = frames;
    req.request_key = make_request_key(req);
    try {
        return parse_verifier_reply(gateway.complete_chat(req).text, questions.size());
    } catch (const Error& e) {
        // Provider failure: record error verdicts, which fail the points.
        return std::vector<std::pair<Verdict, std::string>>(questions.size(),
                                                            {Verdict::error, e.what()});
    }
}

}  // namespace

void verify_node_key_points(std::vector<KeyPoint>& kps, const std::vector<std::string>& frames,
                            ProviderGateway& gateway, const PromptLibrary& prompts) {
    // Flatten (kp, question) pairs in stable order.
    struct Slot {
        std::size_t kp_index;
        std::size_t q_index;
    };
    std::vector<Slot> slots;
    std::vector<std::string> questions;
    for (std::size_t k = 0; k < kps.size(); ++k) {
        for (std::size_t q = 0; q < kps[k].questions.size(); ++q) {
            slots.push_back({k, q});
            questions.push_back(kps[k].questions[q].question_text);
        }
    }

    for (std::size_t start = 0; start < questions.size(); start += kQuestionsPerCall) {
        const std::size_t count = std::min(kQuestionsPerCall, questions.size() - start);
        std::vector<std::string> batch(questions.begin() + static_cast<std::ptrdiff_t>(start),
                                       questions.begin() +
                                           static_cast<std::ptrdiff_t>(start + count));
        // The two verifiers are independent; ask them concurrently and merge
        // in question order so the outcome is order-independent.
        auto future_a = std::async(std::launch::async, ask_verifier, Role::verifier_a,
                                   std::cref(batch), std::cref(frames), std::ref(gateway),
                                   std::cref(prompts));
        auto verdicts_b = ask_verifier(Role::verifier_b, batch, frames, gateway, prompts);
        auto verdicts_a = future_a.get();

        for (std::size_t i = 0; i < count; ++i) {
            const Slot& slot = slots[start + i];
            VerificationQuestion& q = kps[slot.kp_index].questions[slot.q_index];
            q.verdict_a = verdicts_a[i].first;
            q.rationale_a = verdicts_a[i].second;
            q.verdict_b = verdicts_b[i].first;
            q.rationale_b = verdicts_b[i].second;
        }
    }

    for (auto& kp : kps) {
        kp.status = adjudicate(kp.questions);
    }
}

KpStatus verify_key_point(KeyPoint& kp, const std::vector<std::string>& frames,
                          ProviderGateway& gateway, const PromptLibrary& prompts) {
    std::vector<KeyPoint> one{kp};
    verify_node_key_points(one, frames, gateway, prompts);
    kp = one.front();
    return kp.status;
}

}  // namespace autocap
