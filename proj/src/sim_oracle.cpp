#include "sim_oracle.hpp"

#include <algorithm>

#include <json.hpp>

#include "errors.hpp"
#include "keypoints.hpp"
#include "util.hpp"

namespace autocap {

namespace {

using nlohmann::json;

// Template markers the handlers key on. They match the shipped prompts.
constexpr const char* kMarkStage1 = "Please ouput only one detail you want to focus on";
constexpr const char* kMarkFocus = "I want you to focus on the ";
constexpr const char* kMarkOverall = "comprehensive overview of the entire video content";
constexpr const char* kMarkStage2 = "Here is the MODEL ANSWER:";
constexpr const char* kMarkTemporal = "new temporal perspective";
constexpr const char* kMarkSpatial = "new spatial perspective";
constexpr const char* kMarkBackground = "detailed description of the background";
constexpr const char* kMarkCamera = "changes in camera shots";
constexpr const char* kMarkVideoDesc = "### Video Description:";
constexpr const char* kMarkResult = "### Result:";
constexpr const char* kMarkKeyPoint = "### Key Point";
constexpr const char* kMarkQuestions = "### Questions";
constexpr const char* kMarkOutput = "### Output";
constexpr const char* kMarkJudgeRef = "### Human-Generated Video Key Points:";
constexpr const char* kMarkJudgeItems = "### LMM Caption Breakdown Point to Evaluate:";
constexpr const char* kMarkSentences = "## Sentences:";
constexpr const char* kMarkParaOut = "## Output:";
constexpr const char* kMarkCaption = "### Caption";
constexpr const char* kMarkThoughtInput = "### Input:";
constexpr const char* kMarkExpectedOut = "### Expected Output:";
constexpr const char* kMarkFromThought = "According to the reasoning thought";

// Text between the LAST occurrence of `begin` and the next `end` marker
// (templates contain earlier example blocks with the same markers).
std::string section_after_last(const std::string& text, const std::string& begin,
                               const std::string& end) {
    const auto b = text.rfind(begin);
    if (b == std::string::npos) return {};
    const auto content_start = b + begin.size();
    auto e = end.empty() ? std::string::npos : text.find(end, content_start);
    return trim(text.substr(content_start,
                            e == std::string::npos ? std::string::npos : e - content_start));
}

std::vector<std::string> numbered_items(const std::string& block) {
    std::vector<std::string> out;
    for (const auto& line : split_lines(block)) {
        if (auto parsed = parse_numbered_line(line)) out.push_back(parsed->second);
    }
    return out;
}

std::string strip_stem(std::string_view sentence) {
    std::string s = trim(sentence);
    while (!s.empty() && (s.back() == '.' || s.back() == '?' || s.back() == '!')) s.pop_back();
    return s;
}

std::string corrupt_fact(const std::string& text) {
    return strip_stem(text) + " made of pure gold.";
}

bool has_uncertain_expression(const std::string& sentence) {
    const std::string s = lowercase(sentence);
    for (const char* cue : {"could be", "might ", "perhaps", "possibly", "appears to",
                            "probably", "seems to"}) {
        if (s.find(cue) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

SimOracle SimOracle::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::oracle_missing, std::string("bad oracle file: ") + e.what());
    }
    SimOracle oracle;
    oracle.video_id = doc.value("video_id", std::string{"synthetic"});
    oracle.frame_count = doc.value("frame_count", 64);
    oracle.duration_s = doc.value("duration_s", 12.0);
    oracle.category = doc.value("category", std::string{});
    oracle.noise_rate = doc.value("noise_rate", 0.0);
    oracle.reveal_per_call = doc.value("reveal_per_call", 4);
    oracle.screen_keep = doc.value("screen_keep", true);
    oracle.screen_reason = doc.value("screen_reason", std::string{"clear subject throughout"});
    oracle.candidate_caption = doc.value("candidate_caption", std::string{});
    if (doc.contains("facts")) {
        for (const auto& f : doc["facts"]) {
            SimFact fact;
            fact.text = f.at("text").get<std::string>();
            fact.category = f.value("category", std::string{"object"});
            fact.action = f.value("action", std::string{"A2"});
            fact.detail = f.value("detail", std::string{});
            fact.aspects = f.value("aspects", std::string{});
            oracle.facts.push_back(std::move(fact));
        }
    }
    if (doc.contains("question_scripts")) {
        for (const auto& [k, v] : doc["question_scripts"].items()) {
            oracle.question_scripts[normalize_sentence(k)] = v.get<std::vector<std::string>>();
        }
    }
    if (doc.contains("extraction_scripts")) {
        for (const auto& [k, v] : doc["extraction_scripts"].items()) {
            oracle.extraction_scripts[normalize_sentence(k)] = v.get<std::vector<std::string>>();
        }
    }
    if (doc.contains("question_answers")) {
        for (const auto& [k, v] : doc["question_answers"].items()) {
            oracle.question_answers[normalize_sentence(k)] = v.get<bool>();
        }
    }
    if (doc.contains("contradictions")) {
        for (const auto& pair : doc["contradictions"]) {
            oracle.contradictions.emplace_back(normalize_sentence(pair.at(0).get<std::string>()),
                                               normalize_sentence(pair.at(1).get<std::string>()));
        }
    }
    if (doc.contains("filter_drop_texts")) {
        for (const auto& t : doc["filter_drop_texts"]) {
            oracle.filter_drop_texts.push_back(normalize_sentence(t.get<std::string>()));
        }
    }
    return oracle;
}

SimOracle SimOracle::load(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        throw Error(ErrorCode::oracle_missing, "no oracle at " + path.string());
    }
    return from_json(read_text_file(path));
}

std::string SimOracle::to_json() const {
    json facts_doc = json::array();
    for (const auto& f : facts) {
        facts_doc.push_back({{"text", f.text},
                             {"category", f.category},
                             {"action", f.action},
                             {"detail", f.detail},
                             {"aspects", f.aspects}});
    }
    json doc;
    doc["video_id"] = video_id;
    doc["frame_count"] = frame_count;
    doc["duration_s"] = duration_s;
    doc["category"] = category;
    doc["noise_rate"] = noise_rate;
    doc["reveal_per_call"] = reveal_per_call;
    doc["screen_keep"] = screen_keep;
    doc["screen_reason"] = screen_reason;
    if (!candidate_caption.empty()) doc["candidate_caption"] = candidate_caption;
    doc["facts"] = std::move(facts_doc);
    if (!question_scripts.empty()) {
        json qs = json::object();
        for (const auto& [k, v] : question_scripts) qs[k] = v;
        doc["question_scripts"] = std::move(qs);
    }
    if (!extraction_scripts.empty()) {
        json es = json::object();
        for (const auto& [k, v] : extraction_scripts) es[k] = v;
        doc["extraction_scripts"] = std::move(es);
    }
    if (!contradictions.empty()) {
        json cs = json::array();
        for (const auto& [a, b] : contradictions) cs.push_back({a, b});
        doc["contradictions"] = std::move(cs);
    }
    if (!filter_drop_texts.empty()) doc["filter_drop_texts"] = filter_drop_texts;
    return doc.dump(2);
}

SimulatedGateway::SimulatedGateway(Options options) : options_(options) {}

void SimulatedGateway::set_frame_budget(Role role, int budget) {
    frame_budgets_[role] = budget;
}

void SimulatedGateway::load_oracle(const std::filesystem::path& path) {
    std::lock_guard<std::mutex> lock(mu_);
    const std::string key = path.string();
    if (!oracles_.count(key)) {
        oracles_.emplace(key, SimOracle::load(path));
    }
}

const SimOracle* SimulatedGateway::find_loaded(const std::string& key) const {
    auto it = oracles_.find(key);
    return it == oracles_.end() ? nullptr : &it->second;
}

const SimOracle* SimulatedGateway::oracle_for_request(const ChatRequest& req) {
    if (req.images.empty()) return nullptr;
    // Frame refs look like "<oracle path>#frame-3".
    const std::string& first = req.images.front();
    const auto hash_pos = first.rfind('#');
    const std::string path = hash_pos == std::string::npos ? first : first.substr(0, hash_pos);
    std::lock_guard<std::mutex> lock(mu_);
    if (const SimOracle* found = find_loaded(path)) return found;
    auto [it, inserted] = oracles_.emplace(path, SimOracle::load(path));
    return &it->second;
}

ChatResponse SimulatedGateway::complete_chat(const ChatRequest& req) {
    return complete_with_seed(req, options_.seed);
}

ChatResponse SimulatedGateway::complete_with_seed(const ChatRequest& req, std::uint64_t seed) {
    auto budget_it = frame_budgets_.find(req.role);
    const int budget = budget_it == frame_budgets_.end() ? 64 : budget_it->second;
    if (static_cast<int>(req.images.size()) > budget) {
        throw Error(ErrorCode::budget_exceeded,
                    std::to_string(req.images.size()) + " frames exceed budget " +
                        std::to_string(budget) + " for role " + role_name(req.role));
    }

    ChatResponse resp;
    resp.latency_ms = 0;
    switch (req.role) {
        case Role::generator:
        case Role::overall_describer:
            resp.text = handle_generator(req, seed);
            break;
        case Role::kp_extractor:
            resp.text = handle_extractor(req);
            break;
        case Role::question_writer:
            resp.text = handle_question_writer(req);
            break;
        case Role::verifier_a:
        case Role::verifier_b:
            resp.text = handle_verifier(req, seed);
            break;
        case Role::judge:
            resp.text = handle_judge(req);
            break;
        case Role::paraphraser:
            resp.text = handle_paraphraser(req);
            break;
        case Role::filter_judge:
            resp.text = handle_filter_judge(req);
            break;
        case Role::screener:
            resp.text = handle_screener(req);
            break;
        case Role::distiller:
            resp.text = handle_distiller(req);
            break;
        case Role::candidate_model:
            resp.text = handle_candidate(req);
            break;
        case Role::embedder:
            resp.text = "";
            break;
    }
    resp.finish_state = FinishState::complete;
    if (resp.text.empty()) resp.text = "(no output)";
    return resp;
}

std::vector<EmbeddingVector> SimulatedGateway::embed_texts(const std::vector<std::string>& texts) {
    return fallback_.embed_all(texts);
}

std::string SimulatedGateway::handle_generator(const ChatRequest& req, std::uint64_t seed) {
    const SimOracle* oracle = oracle_for_request(req);
    if (!oracle) {
        throw Error(ErrorCode::oracle_missing, "generator call carries no oracle frames");
    }
    const std::string& prompt = req.user_text;
    const std::string prompt_norm = normalize_sentence(prompt);
    auto mentioned = [&](const SimFact& fact) {
        return prompt_norm.find(normalize_sentence(fact.text)) != std::string::npos;
    };

    // Stage-2 re-prompt: describe the focused detail group.
    if (prompt.find(kMarkFocus) != std::string::npos) {
        const auto pos = prompt.rfind(kMarkFocus);
        std::string rest = prompt.substr(pos + std::string(kMarkFocus).size());
        const auto cut = rest.find(" in the video");
        const std::string detail = trim(cut == std::string::npos ? rest : rest.substr(0, cut));
        std::vector<std::string> parts;
        for (const auto& fact : oracle->facts) {
            if (fact.action == "A2" && fact.detail == detail) parts.push_back(fact.text);
        }
        if (parts.empty()) return "The " + detail + " is visible in the video.";
        return join(parts, " ");
    }

    // Stage 1: name the first detail group the prompt has not covered yet.
    if (prompt.find(kMarkStage1) != std::string::npos) {
        std::vector<std::string> group_order;
        std::map<std::string, bool> group_fully_known;
        for (const auto& fact : oracle->facts) {
            if (fact.action != "A2" || fact.detail.empty()) continue;
            if (std::find(group_order.begin(), group_order.end(), fact.detail) ==
                group_order.end()) {
                group_order.push_back(fact.detail);
                group_fully_known[fact.detail] = true;
            }
            if (!mentioned(fact)) group_fully_known[fact.detail] = false;
        }
        if (group_order.empty()) return "I want to focus on the main subject.";
        std::string chosen = group_order.front();
        for (const auto& g : group_order) {
            if (!group_fully_known[g]) {
                chosen = g;
                break;
            }
        }
        return "I think the " + chosen + " in the video deserves a closer look.";
    }

    // Overall description: all A1-tagged facts. The second endpoint words it
    // in reverse order so the two bootstrap children differ textually.
    if (prompt.find(kMarkOverall) != std::string::npos) {
        std::vector<std::string> parts;
        for (const auto& fact : oracle->facts) {
            if (fact.action == "A1") parts.push_back(fact.text);
        }
        if (parts.empty()) return "The video shows a scene.";
        if (req.role_instance > 0) std::reverse(parts.begin(), parts.end());
        return join(parts, " ");
    }

    // Perspective actions: reveal the first facts of the action's list that
    // the prompt history does not already mention.
    std::string action;
    if (prompt.find(kMarkTemporal) != std::string::npos) {
        action = "A3";
    } else if (prompt.find(kMarkSpatial) != std::string::npos) {
        action = "A4";
    } else if (prompt.find(kMarkBackground) != std::string::npos) {
        action = "A5";
    } else if (prompt.find(kMarkCamera) != std::string::npos) {
        action = "A6";
    } else {
        action = "A3";
    }

    std::vector<const SimFact*> pool;
    std::vector<const SimFact*> fresh;
    for (const auto& fact : oracle->facts) {
        if (fact.action != action) continue;
        pool.push_back(&fact);
        if (!mentioned(fact)) fresh.push_back(&fact);
    }
    const auto& source = fresh.empty() ? pool : fresh;
    if (source.empty()) return "Nothing new stands out from this perspective.";

    std::vector<std::string> parts;
    const int take = std::max(1, oracle->reveal_per_call);
    for (std::size_t i = 0; i < source.size() && static_cast<int>(i) < take; ++i) {
        std::string text = source[i]->text;
        if (oracle->noise_rate > 0.0) {
            DetRng rng(derive_seed(seed, "gen-noise:" + req.request_key, i));
            if (rng.next_unit() < oracle->noise_rate) text = corrupt_fact(text);
        }
        parts.push_back(std::move(text));
    }
    return join(parts, " ");
}

std::string SimulatedGateway::handle_extractor(const ChatRequest& req) {
    const std::string& prompt = req.user_text;

    // Detail-focus extraction for the two-stage flow.
    if (prompt.find(kMarkStage2) != std::string::npos) {
        if (options_.stage2_malformed) return "I cannot tell what the model wants to focus on.";
        const std::string answer = section_after_last(prompt, kMarkStage2, "Output:");
        std::lock_guard<std::mutex> lock(mu_);
        const SimFact* best = nullptr;
        for (const auto& [path, oracle] : oracles_) {
            for (const auto& fact : oracle.facts) {
                if (fact.detail.empty()) continue;
                if (contains_ci(answer, fact.detail)) {
                    if (!best || fact.detail.size() > best->detail.size()) best = &fact;
                }
            }
        }
        if (!best) {
            return "Detail: main subject\nCategory: Other\nRelevant Describe Aspects: general "
                   "appearance";
        }
        return "Detail: " + best->detail + "\nCategory: " + best->category +
               "\nRelevant Describe Aspects: " + best->aspects;
    }

    // Category classification: look the key point up in the oracle facts,
    // falling back to cue words.
    if (prompt.find("### Category:") != std::string::npos) {
        const std::string kp = section_after_last(prompt, kMarkKeyPoint, "### Category:");
        const std::string norm = normalize_sentence(kp);
        {
            std::lock_guard<std::mutex> lock(mu_);
            for (const auto& [path, oracle] : oracles_) {
                for (const auto& fact : oracle.facts) {
                    if (normalize_sentence(fact.text) == norm) {
                        if (auto cat = kp_category_from_key(fact.category)) {
                            return kp_category_name(*cat);
                        }
                        return fact.category;
                    }
                }
            }
        }
        const std::string lowered = lowercase(kp);
        if (lowered.find("camera") != std::string::npos ||
            lowered.find("shot") != std::string::npos) {
            return kp_category_name(KpCategory::camera_movement_composition);
        }
        if (lowered.find("wear") != std::string::npos ||
            lowered.find("outfit") != std::string::npos ||
            lowered.find("dressed") != std::string::npos) {
            return kp_category_name(KpCategory::appearance);
        }
        if (lowered.find("background") != std::string::npos ||
            lowered.find("setting") != std::string::npos) {
            return kp_category_name(KpCategory::environment);
        }
        return kp_category_name(KpCategory::object);
    }

    // Key-point extraction: split the caption into sentences, honoring any
    // scripted splits, and emit "> point" lines.
    const std::string description = section_after_last(prompt, kMarkVideoDesc, kMarkResult);
    std::vector<std::string> points;
    {
        std::lock_guard<std::mutex> lock(mu_);
        for (const auto& sentence : split_sentences(description)) {
            if (has_uncertain_expression(sentence)) continue;
            const std::string norm = normalize_sentence(sentence);
            bool scripted = false;
            for (const auto& [path, oracle] : oracles_) {
                auto it = oracle.extraction_scripts.find(norm);
                if (it != oracle.extraction_scripts.end()) {
                    points.insert(points.end(), it->second.begin(), it->second.end());
                    scripted = true;
                    break;
                }
            }
            if (!scripted) points.push_back(sentence);
        }
    }
    std::string out;
    for (const auto& p : points) out += "> " + p + "\n";
    return out;
}

std::string SimulatedGateway::handle_question_writer(const ChatRequest& req) {
    const std::string kp = section_after_last(req.user_text, kMarkKeyPoint, kMarkOutput);
    const std::string norm = normalize_sentence(kp);
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [path, oracle] : oracles_) {
        auto it = oracle.question_scripts.find(norm);
        if (it != oracle.question_scripts.end()) {
            std::string out;
            for (const auto& q : it->second) out += "> " + q + "\n";
            return out;
        }
    }
    if (trim(kp).empty()) return "";
    return "> Is it true that " + strip_stem(kp) + "?\n";
}

std::string SimulatedGateway::handle_verifier(const ChatRequest& req, std::uint64_t seed) {
    const SimOracle* oracle = oracle_for_request(req);
    if (!oracle) {
        throw Error(ErrorCode::oracle_missing, "verifier call carries no oracle frames");
    }
    const std::string block = section_after_last(req.user_text, kMarkQuestions, kMarkOutput);
    const auto questions = numbered_items(block);

    std::vector<std::string> answers;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const std::string& q = questions[i];
        bool yes = false;
        std::string stem = q;
        if (starts_with_ci(stem, "Is it true that ")) {
            stem = stem.substr(std::string("Is it true that ").size());
        }
        const std::string norm = normalize_sentence(strip_stem(stem));
        auto scripted = oracle->question_answers.find(normalize_sentence(q));
        if (scripted != oracle->question_answers.end()) {
            yes = scripted->second;
        } else {
            for (const auto& fact : oracle->facts) {
                if (normalize_sentence(fact.text) == norm) {
                    yes = true;
                    break;
                }
            }
        }
        if (oracle->noise_rate > 0.0) {
            DetRng rng(derive_seed(seed, std::string(role_name(req.role)) + ":" + req.request_key,
                                   i));
            if (rng.next_unit() < oracle->noise_rate) yes = !yes;
        }
        answers.push_back("\"" + std::to_string(i + 1) + ". " + (yes ? "Yes" : "No") +
                          ", " + (yes ? "the frames confirm it." : "the frames do not show it.") +
                          "\"");
    }
    return "[" + join(answers, ", ") + "]";
}

std::string SimulatedGateway::handle_judge(const ChatRequest& req) {
    const std::string reference =
        section_after_last(req.user_text, kMarkJudgeRef, kMarkJudgeItems);
    const std::string items_block =
        section_after_last(req.user_text, kMarkJudgeItems, kMarkResult);
    const auto items = numbered_items(items_block);

    const std::string reference_norm = normalize_sentence(reference);
    std::vector<std::string> reference_lines;
    for (const auto& line : split_lines(reference)) {
        auto parsed = parse_numbered_line(line);
        reference_lines.push_back(normalize_sentence(parsed ? parsed->second : line));
    }

    std::vector<std::pair<std::string, std::string>> contradictions;
    {
        std::lock_guard<std::mutex> lock(mu_);
        for (const auto& [path, oracle] : oracles_) {
            contradictions.insert(contradictions.end(), oracle.contradictions.begin(),
                                  oracle.contradictions.end());
        }
    }

    nlohmann::json out = nlohmann::json::object();
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string norm = normalize_sentence(items[i]);
        std::string label = "neutral";
        if (!norm.empty() && reference_norm.find(norm) != std::string::npos) {
            label = "entailment";
        } else {
            for (const auto& [a, b] : contradictions) {
                const bool clash_ab =
                    norm == a && std::find(reference_lines.begin(), reference_lines.end(), b) !=
                                     reference_lines.end();
                const bool clash_ba =
                    norm == b && std::find(reference_lines.begin(), reference_lines.end(), a) !=
                                     reference_lines.end();
                // Caption references keep the pair check on the whole blob.
                const bool clash_blob =
                    (norm == a && reference_norm.find(b) != std::string::npos) ||
                    (norm == b && reference_norm.find(a) != std::string::npos);
                if (clash_ab || clash_ba || clash_blob) {
                    label = "contradiction";
                    break;
                }
            }
        }
        out["breakdown_point_" + std::to_string(i + 1)] = {
            {"judgement", label},
            {"analysis", label == "entailment" ? "Matches a reference key point."
             : label == "contradiction"        ? "Conflicts with a reference key point."
                                               : "Not covered by the reference."}};
    }
    return out.dump();
}

std::string SimulatedGateway::handle_paraphraser(const ChatRequest& req) {
    const std::string block = section_after_last(req.user_text, kMarkSentences, kMarkParaOut);
    std::vector<std::string> sentences;
    try {
        auto arr = nlohmann::json::parse(block);
        for (const auto& item : arr) sentences.push_back(item.get<std::string>());
    } catch (const nlohmann::json::exception&) {
        for (const auto& line : split_lines(block)) {
            if (!trim(line).empty()) sentences.push_back(trim(line));
        }
    }
    if (options_.paraphrase_miscount && !sentences.empty()) sentences.pop_back();
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : sentences) out.push_back(s);  // identity rewrite
    return out.dump();
}

std::string SimulatedGateway::handle_filter_judge(const ChatRequest& req) {
    const std::string block = section_after_last(req.user_text, "### Key Points", kMarkOutput);
    const auto items = numbered_items(block);
    std::vector<std::string> drop_list;
    {
        std::lock_guard<std::mutex> lock(mu_);
        for (const auto& [path, oracle] : oracles_) {
            drop_list.insert(drop_list.end(), oracle.filter_drop_texts.begin(),
                             oracle.filter_drop_texts.end());
        }
    }
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string norm = normalize_sentence(items[i]);
        bool drop = has_uncertain_expression(items[i]) ||
                    std::find(drop_list.begin(), drop_list.end(), norm) != drop_list.end();
        out += std::to_string(i + 1) + ". \"[" + (drop ? "No" : "Yes") + "] " +
               (drop ? "Speculative or out of scope." : "Concrete visual fact.") + "\"\n";
    }
    return out;
}

std::string SimulatedGateway::handle_screener(const ChatRequest& req) {
    const SimOracle* oracle = oracle_for_request(req);
    if (!oracle) {
        throw Error(ErrorCode::oracle_missing, "screener call carries no oracle frames");
    }
    (void)section_after_last(req.user_text, kMarkCaption, "");
    return std::string("Judgment: [") + (oracle->screen_keep ? "yes" : "no") +
           "] Reason: [" + oracle->screen_reason + "]";
}

std::string SimulatedGateway::handle_distiller(const ChatRequest& req) {
    const std::string& prompt = req.user_text;
    if (prompt.find(kMarkFromThought) != std::string::npos) {
        // Caption generation: echo the thought content so every fact survives.
        std::string body = prompt;
        const auto open = body.find("<thought>");
        const auto close = body.rfind("</thought>");
        if (open != std::string::npos && close != std::string::npos && close > open) {
            body = body.substr(open + std::string("<thought>").size(),
                               close - open - std::string("<thought>").size());
        }
        return trim(body);
    }
    const std::string input = section_after_last(prompt, kMarkThoughtInput, kMarkExpectedOut);
    if (options_.thought_missing_delimiters) return input;
    return "<thought>\n" + input + "\n</thought>";
}

std::string SimulatedGateway::handle_candidate(const ChatRequest& req) {
    const SimOracle* oracle = oracle_for_request(req);
    if (!oracle) {
        throw Error(ErrorCode::oracle_missing, "candidate call carries no oracle frames");
    }
    if (!oracle->candidate_caption.empty()) return oracle->candidate_caption;
    return "A video.";
}

}  // namespace autocap
