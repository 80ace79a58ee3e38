#include "eval.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "util.hpp"
#include "verification.hpp"

namespace autocap {

namespace {

using nlohmann::json;

std::string numbered_block(const std::vector<std::string>& items) {
    std::vector<std::string> numbered;
    numbered.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        numbered.push_back(std::to_string(i + 1) + ". " + items[i]);
    }
    return join(numbered, "\n");
}

EntailmentLabel label_from_text(const std::string& text) {
    const std::string t = lowercase(text);
    if (t.find("entail") != std::string::npos) return EntailmentLabel::entailment;
    if (t.find("contradict") != std::string::npos) return EntailmentLabel::contradiction;
    return EntailmentLabel::neutral;
}

}  // namespace

const char* entailment_label_name(EntailmentLabel label) {
    switch (label) {
        case EntailmentLabel::entailment: return "entailment";
        case EntailmentLabel::contradiction: return "contradiction";
        case EntailmentLabel::neutral: return "neutral";
    }
    return "neutral";
}

double f1_from_pr(double precision, double recall) {
    if (precision + recall <= 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

void score(EvalRecord& record) {
    std::size_t entailed_p = 0;
    for (auto label : record.precision_labels) {
        if (label == EntailmentLabel::entailment) ++entailed_p;
    }
    std::size_t entailed_r = 0;
    for (auto label : record.recall_labels) {
        if (label == EntailmentLabel::entailment) ++entailed_r;
    }
    record.precision = record.precision_labels.empty()
                           ? 0.0
                           : static_cast<double>(entailed_p) / record.precision_labels.size();
    record.recall = record.recall_labels.empty()
                        ? 0.0
                        : static_cast<double>(entailed_r) / record.recall_labels.size();
    record.f1 = f1_from_pr(record.precision, record.recall);
}

std::string caption_video(ProviderGateway& gateway, const PromptLibrary& prompts,
                          const std::vector<std::string>& frames, const std::string& profile,
                          double temperature) {
    const char* name = prompt_names::eval_caption_default;
    if (profile == "vila") name = prompt_names::eval_caption_vila;
    else if (profile == "pllava") name = prompt_names::eval_caption_pllava;
    else if (!profile.empty() && profile != "default") {
        throw Error(ErrorCode::invalid_argument, "unknown prompt profile: " + profile);
    }
    ChatRequest req;
    req.role = Role::candidate_model;
    req.user_text = prompts.get(name);
    req.images = frames;
    req.temperature = temperature;
    req.request_key = make_request_key(req);
    return gateway.complete_chat(req).text;
}

std::vector<EntailmentLabel> judge_entailment(const std::vector<std::string>& items,
                                              const std::string& reference,
                                              ProviderGateway& gateway,
                                              const PromptLibrary& prompts, int* warnings) {
    std::vector<EntailmentLabel> labels(items.size(), EntailmentLabel::neutral);
    if (items.empty()) return labels;

    ChatRequest req;
    req.role = Role::judge;
    req.user_text = PromptLibrary::fill(prompts.get(prompt_names::judge_entailment),
                                        {{"key_points", reference},
                                         {"breakdown_points", numbered_block(items)}});
    req.request_key = make_request_key(req);

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply;
        try {
            reply = gateway.complete_chat(req).text;
        } catch (const Error&) {
            break;
        }
        bool all_present = true;
        std::vector<EntailmentLabel> parsed(items.size(), EntailmentLabel::neutral);
        try {
            auto doc = json::parse(reply);
            for (std::size_t i = 0; i < items.size(); ++i) {
                const std::string key = "breakdown_point_" + std::to_string(i + 1);
                if (!doc.contains(key) || !doc[key].contains("judgement")) {
                    all_present = false;
                    continue;
                }
                parsed[i] = label_from_text(doc[key]["judgement"].get<std::string>());
            }
        } catch (const json::exception&) {
            all_present = false;
        }
        if (all_present) return parsed;
        if (attempt == 0) {
            // Distinct request key for the retry so a cached reply is not
            // replayed verbatim.
            req.user_text += "\nPlease reply with the JSON dict only.";
            req.request_key = make_request_key(req);
        } else {
            if (warnings) ++*warnings;
            return parsed;  // whatever was parseable; the rest stays neutral
        }
    }
    if (warnings) ++*warnings;
    return labels;
}

EvalRecord evaluate_candidate(const std::string& model_name, const VideoAsset& video,
                              const std::vector<const PoolEntry*>& reference,
                              double pool_threshold, ProviderGateway& gateway,
                              const PromptLibrary& prompts, const RolePolicy& roles,
                              int n_frames, const std::string& prompt_profile) {
    EvalRecord record;
    record.model_name = model_name;
    record.video_id = video.video_id;
    record.video_category = video.category;
    record.n_frames = n_frames;
    record.pool_threshold = pool_threshold;

    std::vector<std::string> frames = video.frame_paths;
    if (static_cast<int>(frames.size()) > n_frames) {
        // Same uniform rule as mining, over the already-sampled frame list.
        std::vector<std::string> picked;
        const auto total = static_cast<int>(frames.size());
        if (n_frames == 1) {
            picked.push_back(frames[static_cast<std::size_t>((total - 1) / 2)]);
        } else {
            for (int k = 0; k < n_frames; ++k) {
                picked.push_back(frames[static_cast<std::size_t>(
                    static_cast<long long>(k) * (total - 1) / (n_frames - 1))]);
            }
        }
        frames = std::move(picked);
    }

    record.caption = caption_video(gateway, prompts, roles.frames_for(Role::candidate_model, frames),
                                   prompt_profile, roles.temperature(Role::candidate_model));

    // Candidate key points, extracted and categorized like mining output.
    try {
        record.candidate_kps = extract_key_points(
            record.caption, video.video_id + "/candidate", 0, gateway, prompts,
            roles.frames_for(Role::kp_extractor, frames));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::unparseable_extraction) throw;
        record.candidate_kps.clear();
    }
    for (auto& kp : record.candidate_kps) {
        categorize_key_point(kp, gateway, prompts);
    }

    std::vector<std::string> reference_texts;
    reference_texts.reserve(reference.size());
    for (const PoolEntry* entry : reference) {
        reference_texts.push_back(entry->kp.text);
        record.reference_categories.push_back(entry->kp.category);
    }

    // Precision: candidate key points against the reference key points.
    std::vector<std::string> candidate_texts;
    candidate_texts.reserve(record.candidate_kps.size());
    for (const auto& kp : record.candidate_kps) candidate_texts.push_back(kp.text);
    record.precision_labels = judge_entailment(candidate_texts, numbered_block(reference_texts),
                                               gateway, prompts, &record.judge_warnings);

    // Recall: each reference key point against the raw caption.
    record.recall_labels = judge_entailment(reference_texts, record.caption, gateway, prompts,
                                            &record.judge_warnings);

    score(record);
    return record;
}

std::string EvalRecord::to_json() const {
    json doc;
    doc["model_name"] = model_name;
    doc["video_id"] = video_id;
    doc["video_category"] = video_category;
    doc["caption"] = caption;
    doc["n_frames"] = n_frames;
    doc["pool_threshold"] = pool_threshold;
    doc["precision"] = precision;
    doc["recall"] = recall;
    doc["f1"] = f1;
    doc["judge_warnings"] = judge_warnings;
    json cands = json::array();
    for (std::size_t i = 0; i < candidate_kps.size(); ++i) {
        cands.push_back({{"text", candidate_kps[i].text},
                         {"category", kp_category_key(candidate_kps[i].category)},
                         {"label", entailment_label_name(precision_labels[i])}});
    }
    doc["candidates"] = std::move(cands);
    json refs = json::array();
    for (std::size_t i = 0; i < recall_labels.size(); ++i) {
        refs.push_back({{"category", kp_category_key(reference_categories[i])},
                        {"label", entailment_label_name(recall_labels[i])}});
    }
    doc["references"] = std::move(refs);
    return doc.dump(2);
}

EvalRecord EvalRecord::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
        EvalRecord record;
        record.model_name = doc.at("model_name").get<std::string>();
        record.video_id = doc.at("video_id").get<std::string>();
        record.video_category = doc.value("video_category", std::string{});
        record.caption = doc.value("caption", std::string{});
        record.n_frames = doc.value("n_frames", 16);
        record.pool_threshold = doc.at("pool_threshold").get<double>();
        record.judge_warnings = doc.value("judge_warnings", 0);
        auto label_from = [](const std::string& name) {
            if (name == "entailment") return EntailmentLabel::entailment;
            if (name == "contradiction") return EntailmentLabel::contradiction;
            return EntailmentLabel::neutral;
        };
        for (const auto& c : doc.at("candidates")) {
            KeyPoint kp;
            kp.text = c.at("text").get<std::string>();
            if (auto cat = kp_category_from_key(c.at("category").get<std::string>())) {
                kp.category = *cat;
            }
            record.candidate_kps.push_back(std::move(kp));
            record.precision_labels.push_back(label_from(c.at("label").get<std::string>()));
        }
        for (const auto& r : doc.at("references")) {
            if (auto cat = kp_category_from_key(r.at("category").get<std::string>())) {
                record.reference_categories.push_back(*cat);
            } else {
                record.reference_categories.push_back(KpCategory::object);
            }
            record.recall_labels.push_back(label_from(r.at("label").get<std::string>()));
        }
        score(record);
        return record;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io_failure, std::string("bad eval record: ") + e.what());
    }
}

double PRCounts::precision() const {
    return total_p == 0 ? 0.0 : static_cast<double>(entailed_p) / static_cast<double>(total_p);
}

double PRCounts::recall() const {
    return total_r == 0 ? 0.0 : static_cast<double>(entailed_r) / static_cast<double>(total_r);
}

double PRCounts::f1() const { return f1_from_pr(precision(), recall()); }

void PRCounts::add(const PRCounts& other) {
    entailed_p += other.entailed_p;
    total_p += other.total_p;
    entailed_r += other.entailed_r;
    total_r += other.total_r;
}

EvalReport aggregate(const std::vector<EvalRecord>& records) {
    EvalReport report;
    if (records.empty()) {
        throw Error(ErrorCode::no_results, "no evaluation records to aggregate");
    }
    report.pool_threshold = records.front().pool_threshold;
    report.record_count = records.size();

    std::map<std::string, std::vector<const EvalRecord*>> by_model;
    for (const auto& record : records) {
        if (std::abs(record.pool_threshold - report.pool_threshold) > 1e-9) {
            throw Error(ErrorCode::mixed_threshold,
                        "records mix pool thresholds " + std::to_string(report.pool_threshold) +
                            " and " + std::to_string(record.pool_threshold));
        }
        by_model[record.model_name].push_back(&record);
    }

    for (const auto& [model, model_records] : by_model) {
        PRCounts overall;
        MacroAverages macro;
        for (const EvalRecord* record : model_records) {
            PRCounts counts;
            for (std::size_t i = 0; i < record->precision_labels.size(); ++i) {
                ++counts.total_p;
                if (record->precision_labels[i] == EntailmentLabel::entailment) {
                    ++counts.entailed_p;
                }
                const std::string cat = kp_category_key(record->candidate_kps[i].category);
                auto& cell = report.by_kp_category[model][cat];
                ++cell.total_p;
                if (record->precision_labels[i] == EntailmentLabel::entailment) ++cell.entailed_p;
            }
            for (std::size_t i = 0; i < record->recall_labels.size(); ++i) {
                ++counts.total_r;
                if (record->recall_labels[i] == EntailmentLabel::entailment) {
                    ++counts.entailed_r;
                }
                const std::string cat = kp_category_key(record->reference_categories[i]);
                auto& cell = report.by_kp_category[model][cat];
                ++cell.total_r;
                if (record->recall_labels[i] == EntailmentLabel::entailment) ++cell.entailed_r;
            }
            report.by_video_category[model][record->video_category].add(counts);
            report.by_frame_count[model][record->n_frames].add(counts);
            overall.add(counts);
            macro.precision += record->precision;
            macro.recall += record->recall;
            macro.f1 += record->f1;
        }
        const auto n = static_cast<double>(model_records.size());
        macro.precision /= n;
        macro.recall /= n;
        macro.f1 /= n;
        report.overall[model] = overall;
        report.macro[model] = macro;
    }
    return report;
}

namespace {

json counts_to_json(const PRCounts& counts) {
    return {{"precision", counts.precision()},
            {"recall", counts.recall()},
            {"f1", counts.f1()},
            {"entailed_p", counts.entailed_p},
            {"total_p", counts.total_p},
            {"entailed_r", counts.entailed_r},
            {"total_r", counts.total_r}};
}

std::string cell(const PRCounts& counts) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.1f/%.1f/%.1f", counts.precision() * 100.0,
                  counts.recall() * 100.0, counts.f1() * 100.0);
    return buf;
}

}  // namespace

std::string EvalReport::to_json() const {
    json doc;
    doc["pool_threshold"] = pool_threshold;
    doc["record_count"] = record_count;
    for (const auto& [model, counts] : overall) {
        doc["overall"][model] = counts_to_json(counts);
    }
    for (const auto& [model, macro_avg] : macro) {
        doc["macro"][model] = {{"precision", macro_avg.precision},
                               {"recall", macro_avg.recall},
                               {"f1", macro_avg.f1}};
    }
    for (const auto& [model, cats] : by_kp_category) {
        for (const auto& [cat, counts] : cats) {
            doc["by_kp_category"][model][cat] = counts_to_json(counts);
        }
    }
    for (const auto& [model, cats] : by_video_category) {
        for (const auto& [cat, counts] : cats) {
            doc["by_video_category"][model][cat.empty() ? "uncategorized" : cat] =
                counts_to_json(counts);
        }
    }
    for (const auto& [model, frame_counts] : by_frame_count) {
        for (const auto& [frames, counts] : frame_counts) {
            doc["by_frame_count"][model][std::to_string(frames)] = counts_to_json(counts);
        }
    }
    return doc.dump(2);
}

std::string EvalReport::render_table() const {
    // Mirrors the benchmark layout: one row per model, P/R/F1 per category
    // cell plus the overall column.
    static const char* kCategories[] = {"appearance", "action", "environment", "object",
                                        "camera_movement_composition"};
    std::ostringstream out;
    out << "Model";
    for (KpCategory c : {KpCategory::appearance, KpCategory::action, KpCategory::environment,
                         KpCategory::object, KpCategory::camera_movement_composition}) {
        out << " | " << kp_category_name(c);
    }
    out << " | Overall\n";
    for (const auto& [model, counts] : overall) {
        out << model;
        auto cats_it = by_kp_category.find(model);
        for (const char* cat : kCategories) {
            out << " | ";
            if (cats_it != by_kp_category.end()) {
                auto cell_it = cats_it->second.find(cat);
                out << (cell_it != cats_it->second.end() ? cell(cell_it->second) : "-");
            } else {
                out << "-";
            }
        }
        out << " | " << cell(counts) << "\n";
    }
    return out.str();
}

ScreenResult screen_video(const VideoAsset& video, const std::string& caption,
                          ProviderGateway& gateway, const PromptLibrary& prompts,
                          const RolePolicy& roles) {
    ChatRequest req;
    req.role = Role::screener;
    req.user_text =
        PromptLibrary::fill(prompts.get(prompt_names::screen_video), {{"caption", caption}});
    req.images = roles.frames_for(Role::screener, video.frame_paths);
    req.request_key = make_request_key(req);

    ScreenResult result;
    std::string reply;
    try {
        reply = gateway.complete_chat(req).text;
    } catch (const Error&) {
        result.keep = false;
        result.reason = "screener unavailable";
        result.parse_warning = true;
        return result;
    }

    const std::string lowered = lowercase(reply);
    const auto pos = lowered.find("judgment:");
    if (pos == std::string::npos) {
        result.keep = false;  // conservative on malformed output
        result.reason = "unparseable screener reply";
        result.parse_warning = true;
        return result;
    }
    const std::string after = lowered.substr(pos);
    const auto yes_pos = after.find("yes");
    const auto no_pos = after.find("no");
    result.keep = yes_pos != std::string::npos && (no_pos == std::string::npos || yes_pos < no_pos);

    const auto reason_pos = reply.find("Reason:");
    if (reason_pos != std::string::npos) {
        std::string reason = trim(reply.substr(reason_pos + 7));
        if (!reason.empty() && reason.front() == '[') reason.erase(reason.begin());
        if (!reason.empty() && reason.back() == ']') reason.pop_back();
        result.reason = trim(reason);
    }
    return result;
}

std::pair<double, double> mutual_inclusion(const std::vector<std::string>& set_a,
                                           const std::vector<std::string>& set_b,
                                           ProviderGateway& gateway,
                                           const PromptLibrary& prompts) {
    auto ratio = [&](const std::vector<std::string>& items, const std::vector<std::string>& ref) {
        if (items.empty()) return 0.0;
        const auto labels = judge_entailment(items, numbered_block(ref), gateway, prompts);
        std::size_t entailed = 0;
        for (auto label : labels) {
            if (label == EntailmentLabel::entailment) ++entailed;
        }
        return static_cast<double>(entailed) / static_cast<double>(items.size());
    };
    return {ratio(set_a, set_b), ratio(set_b, set_a)};
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) return 1.0;
    long long concordant = 0;
    long long discordant = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            const double product = da * db;
            if (product > 0) ++concordant;
            else if (product < 0) ++discordant;
        }
    }
    const auto n = static_cast<long long>(a.size());
    const double denom = static_cast<double>(n * (n - 1)) / 2.0;
    return (static_cast<double>(concordant) - static_cast<double>(discordant)) / denom;
}

}  // namespace autocap
