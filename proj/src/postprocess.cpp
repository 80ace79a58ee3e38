#include "postprocess.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "util.hpp"

namespace autocap {

namespace {

using nlohmann::json;

constexpr std::size_t kBatchSize = 20;
constexpr int kPoolFormatVersion = 1;

std::string tsv_escape(std::string s) {
    for (char& c : s) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

const std::string& embed_source_text(const PoolEntry& entry) {
    return entry.kp.original_text.empty() ? entry.kp.text : entry.kp.original_text;
}

}  // namespace

bool pool_entry_survives(const PoolEntry& entry) {
    return entry.review_keep && (entry.kp.status == KpStatus::verified ||
                                 entry.kp.status == KpStatus::exported_for_review);
}

std::string KeyPointPool::to_json() const {
    json entries_doc = json::array();
    for (const auto& entry : entries) {
        json q_list = json::array();
        for (const auto& q : entry.kp.questions) {
            q_list.push_back({{"question", q.question_text},
                              {"verdict_a", verdict_name(q.verdict_a)},
                              {"verdict_b", verdict_name(q.verdict_b)},
                              {"rationale_a", q.rationale_a},
                              {"rationale_b", q.rationale_b}});
        }
        json doc = {{"kp_id", entry.kp.kp_id},
                    {"text", entry.kp.text},
                    {"category", kp_category_key(entry.kp.category)},
                    {"status", kp_status_name(entry.kp.status)},
                    {"source_node", entry.source_node},
                    {"review_keep", entry.review_keep},
                    {"questions", std::move(q_list)}};
        if (!entry.kp.original_text.empty()) doc["original_text"] = entry.kp.original_text;
        if (!entry.kp.drop_reason.empty()) doc["drop_reason"] = entry.kp.drop_reason;
        if (entry.embedding) doc["embedding"] = entry.embedding->values;
        entries_doc.push_back(std::move(doc));
    }
    json doc;
    doc["format_version"] = kPoolFormatVersion;
    doc["video_id"] = video_id;
    doc["dedup_threshold"] = dedup_threshold;
    doc["paraphrased"] = paraphrased;
    doc["key_points"] = std::move(entries_doc);
    return doc.dump(2);
}

KeyPointPool KeyPointPool::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
        KeyPointPool pool;
        pool.video_id = doc.at("video_id").get<std::string>();
        pool.dedup_threshold = doc.at("dedup_threshold").get<double>();
        pool.paraphrased = doc.value("paraphrased", false);
        for (const auto& e_doc : doc.at("key_points")) {
            PoolEntry entry;
            entry.kp.kp_id = e_doc.at("kp_id").get<std::string>();
            entry.kp.text = e_doc.at("text").get<std::string>();
            entry.kp.original_text = e_doc.value("original_text", std::string{});
            if (auto cat = kp_category_from_key(e_doc.at("category").get<std::string>())) {
                entry.kp.category = *cat;
            }
            if (auto status = kp_status_from_name(e_doc.at("status").get<std::string>())) {
                entry.kp.status = *status;
            }
            entry.kp.drop_reason = e_doc.value("drop_reason", std::string{});
            entry.source_node = e_doc.value("source_node", 0);
            entry.review_keep = e_doc.value("review_keep", true);
            if (e_doc.contains("questions")) {
                for (const auto& q_doc : e_doc["questions"]) {
                    VerificationQuestion q;
                    q.question_text = q_doc.at("question").get<std::string>();
                    const std::string va = q_doc.at("verdict_a").get<std::string>();
                    const std::string vb = q_doc.at("verdict_b").get<std::string>();
                    q.verdict_a = va == "yes" ? Verdict::yes : va == "no" ? Verdict::no : Verdict::error;
                    q.verdict_b = vb == "yes" ? Verdict::yes : vb == "no" ? Verdict::no : Verdict::error;
                    q.rationale_a = q_doc.value("rationale_a", std::string{});
                    q.rationale_b = q_doc.value("rationale_b", std::string{});
                    entry.kp.questions.push_back(std::move(q));
                }
            }
            if (e_doc.contains("embedding")) {
                EmbeddingVector vec;
                vec.values = e_doc["embedding"].get<std::vector<double>>();
                entry.embedding = std::move(vec);
            }
            pool.entries.push_back(std::move(entry));
        }
        return pool;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io_failure, std::string("bad pool file: ") + e.what());
    }
}

std::vector<const PoolEntry*> KeyPointPool::survivors() const {
    std::vector<const PoolEntry*> out;
    for (const auto& entry : entries) {
        if (pool_entry_survives(entry)) out.push_back(&entry);
    }
    return out;
}

std::vector<const PoolEntry*> KeyPointPool::survivors_at(double threshold) const {
    FallbackEmbedder fallback;
    std::vector<const PoolEntry*> kept;
    std::vector<EmbeddingVector> kept_vecs;
    for (const auto& entry : entries) {
        // Filter-surviving set: everything that was not dropped by the judge
        // or a failed verification, with review decisions honored.
        const bool in_scope = entry.review_keep &&
                              (entry.kp.status == KpStatus::verified ||
                               entry.kp.status == KpStatus::exported_for_review ||
                               entry.kp.status == KpStatus::deduplicated);
        if (!in_scope) continue;
        EmbeddingVector vec =
            entry.embedding ? *entry.embedding : fallback.embed(embed_source_text(entry));
        bool duplicate = false;
        for (const auto& prior : kept_vecs) {
            if (cosine_similarity(prior, vec) >= threshold) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            kept.push_back(&entry);
            kept_vecs.push_back(std::move(vec));
        }
    }
    return kept;
}

std::vector<PoolEntry> collect_verified(const Tree& tree) {
    std::vector<PoolEntry> out;
    for (int id = 1; id < tree.size(); ++id) {
        const SearchNode& node = tree.node(id);
        for (const auto& kp : node.key_points) {
            if (kp.status != KpStatus::verified) continue;
            PoolEntry entry;
            entry.kp = kp;
            entry.source_node = id;
            out.push_back(std::move(entry));
        }
    }
    return out;
}

void filter_subjective(std::vector<PoolEntry>& entries, ProviderGateway& gateway,
                       const PromptLibrary& prompts) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].kp.status == KpStatus::verified) active.push_back(i);
    }

    for (std::size_t start = 0; start < active.size(); start += kBatchSize) {
        const std::size_t count = std::min(kBatchSize, active.size() - start);
        std::vector<std::string> numbered;
        for (std::size_t i = 0; i < count; ++i) {
            numbered.push_back(std::to_string(i + 1) + ". " +
                               entries[active[start + i]].kp.text);
        }
        ChatRequest req;
        req.role = Role::filter_judge;
        req.user_text = PromptLibrary::fill(prompts.get(prompt_names::filter_kp),
                                            {{"key_points", join(numbered, "\n")}});
        req.request_key = make_request_key(req);

        std::string reply;
        try {
            reply = gateway.complete_chat(req).text;
        } catch (const Error&) {
            continue;  // fail open: the human review is the final gate
        }

        // Lines look like: 1. "[No] Speculative."
        std::map<int, std::pair<bool, std::string>> decisions;
        for (const auto& line : split_lines(reply)) {
            auto parsed = parse_numbered_line(line);
            if (!parsed) continue;
            const std::string body = lowercase(parsed->second);
            const auto yes_pos = body.find("[yes]");
            const auto no_pos = body.find("[no]");
            if (no_pos != std::string::npos &&
                (yes_pos == std::string::npos || no_pos < yes_pos)) {
                decisions[parsed->first] = {false, trim(parsed->second)};
            } else if (yes_pos != std::string::npos) {
                decisions[parsed->first] = {true, trim(parsed->second)};
            }
        }
        for (std::size_t i = 0; i < count; ++i) {
            auto it = decisions.find(static_cast<int>(i + 1));
            if (it == decisions.end() || it->second.first) continue;  // keep on parse gaps
            PoolEntry& entry = entries[active[start + i]];
            entry.kp.status = KpStatus::filtered_out;
            entry.kp.drop_reason = it->second.second;
        }
    }
}

void dedup(std::vector<PoolEntry>& entries, double threshold, ProviderGateway& gateway) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw Error(ErrorCode::invalid_argument, "dedup threshold must be in (0,1]");
    }
    std::vector<std::size_t> active;
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].kp.status == KpStatus::verified) {
            active.push_back(i);
            texts.push_back(embed_source_text(entries[i]));
        }
    }
    if (active.empty()) return;
    const auto vecs = gateway.embed_texts(texts);
    for (std::size_t i = 0; i < active.size(); ++i) {
        entries[active[i]].embedding = vecs[i];
    }

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < active.size(); ++i) {
        bool duplicate = false;
        for (std::size_t j : kept) {
            if (cosine_similarity(vecs[j], vecs[i]) >= threshold) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) {
            entries[active[i]].kp.status = KpStatus::deduplicated;
        } else {
            kept.push_back(i);
        }
    }
}

int paraphrase(std::vector<PoolEntry>& entries, ProviderGateway& gateway,
               const PromptLibrary& prompts) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (pool_entry_survives(entries[i])) active.push_back(i);
    }

    int batches_kept_original = 0;
    for (std::size_t start = 0; start < active.size(); start += kBatchSize) {
        const std::size_t count = std::min(kBatchSize, active.size() - start);
        json sentences = json::array();
        for (std::size_t i = 0; i < count; ++i) {
            sentences.push_back(std::to_string(i + 1) + ". " +
                                entries[active[start + i]].kp.text);
        }
        ChatRequest req;
        req.role = Role::paraphraser;
        req.user_text = PromptLibrary::fill(prompts.get(prompt_names::paraphrase_kp),
                                            {{"sentence_num", std::to_string(count)},
                                             {"sentences", sentences.dump()}});
        req.request_key = make_request_key(req);

        std::vector<std::string> rewritten;
        try {
            auto arr = json::parse(gateway.complete_chat(req).text);
            for (const auto& item : arr) {
                if (item.is_string()) rewritten.push_back(item.get<std::string>());
            }
        } catch (const std::exception&) {
            ++batches_kept_original;
            continue;
        }
        if (rewritten.size() != count) {
            ++batches_kept_original;
            continue;
        }
        for (std::size_t i = 0; i < count; ++i) {
            std::string text = rewritten[i];
            if (auto parsed = parse_numbered_line(text)) text = parsed->second;
            PoolEntry& entry = entries[active[start + i]];
            if (text != entry.kp.text) {
                entry.kp.original_text = entry.kp.text;
                entry.kp.text = text;
            }
        }
    }
    return batches_kept_original;
}

KeyPointPool build_pool(const Tree& tree, ProviderGateway& gateway, const PromptLibrary& prompts,
                        double dedup_threshold, bool paraphrase_on) {
    KeyPointPool pool;
    pool.video_id = tree.video().video_id;
    pool.dedup_threshold = dedup_threshold;
    pool.entries = collect_verified(tree);
    filter_subjective(pool.entries, gateway, prompts);
    dedup(pool.entries, dedup_threshold, gateway);
    if (paraphrase_on) {
        paraphrase(pool.entries, gateway, prompts);
        pool.paraphrased = true;
    }
    return pool;
}

void export_review(KeyPointPool& pool, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "kp_id\ttext\tcategory\tsource_node\tverdicts\tkeep\n";
    for (auto& entry : pool.entries) {
        if (!pool_entry_survives(entry)) continue;
        entry.kp.status = KpStatus::exported_for_review;
        std::string verdicts;
        for (std::size_t i = 0; i < entry.kp.questions.size(); ++i) {
            const auto& q = entry.kp.questions[i];
            if (i > 0) verdicts += ";";
            verdicts += "q" + std::to_string(i + 1) + "=" + verdict_name(q.verdict_a) + "/" +
                        verdict_name(q.verdict_b);
        }
        out << tsv_escape(entry.kp.kp_id) << '\t' << tsv_escape(entry.kp.text) << '\t'
            << kp_category_name(entry.kp.category) << '\t' << entry.source_node << '\t'
            << verdicts << "\t\n";
    }
    try {
        atomic_write_file(path, out.str());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::io_failure, e.what());
    }
}

void import_review(KeyPointPool& pool, const std::filesystem::path& path) {
    std::string content;
    try {
        content = read_text_file(path);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::io_failure, e.what());
    }
    std::map<std::string, PoolEntry*> by_id;
    for (auto& entry : pool.entries) by_id[entry.kp.kp_id] = &entry;

    const auto lines = split_lines(content);
    for (std::size_t i = 1; i < lines.size(); ++i) {  // skip header
        if (trim(lines[i]).empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(lines[i]);
        std::string col;
        while (std::getline(ss, col, '\t')) cols.push_back(col);
        if (cols.empty()) continue;
        const std::string& kp_id = cols[0];
        auto it = by_id.find(kp_id);
        if (it == by_id.end()) {
            throw Error(ErrorCode::import_mismatch, "unknown kp_id in review file: " + kp_id);
        }
        const std::string keep = cols.size() >= 6 ? lowercase(trim(cols[5])) : "";
        it->second->review_keep = keep == "yes" || keep == "y" || keep == "1" || keep == "keep";
    }
}

std::string TrainingSample::to_json() const {
    json doc;
    doc["video_id"] = video_id;
    doc["thought_process"] = thought_process;
    doc["final_caption"] = final_caption;
    return doc.dump(2);
}

TrainingSample distill_training_sample(const KeyPointPool& pool, const Tree& tree,
                                       ProviderGateway& gateway, const PromptLibrary& prompts,
                                       const std::vector<std::string>& frames) {
    if (pool.survivors().empty()) {
        throw Error(ErrorCode::invalid_argument, "cannot distill from an empty pool");
    }

    // Overall description: the first A1 child.
    std::string overall = "The video shows a scene.";
    for (int id = 1; id < tree.size(); ++id) {
        if (tree.node(id).action == ActionCode::a1_overall) {
            overall = tree.node(id).description;
            break;
        }
    }

    // (Observation, key points) pairs grouped by source node, in node order.
    std::map<int, std::vector<const PoolEntry*>> by_node;
    for (const PoolEntry* entry : pool.survivors()) {
        by_node[entry->source_node].push_back(entry);
    }
    std::vector<std::string> pairs;
    for (const auto& [node_id, group] : by_node) {
        const SearchNode& node = tree.node(node_id);
        std::string label = node.focus_label;
        if (label.empty() && node.action) label = action_label(*node.action);
        if (label.empty()) label = "Scene";
        std::string block = "Observation: " + label + "\nKey Points:\n";
        for (std::size_t i = 0; i < group.size(); ++i) {
            block += std::to_string(i + 1) + ". " + group[i]->kp.text + "\n";
        }
        pairs.push_back(block);
    }

    ChatRequest thought_req;
    thought_req.role = Role::distiller;
    thought_req.user_text = PromptLibrary::fill(prompts.get(prompt_names::thought_process),
                                                {{"overall_description", overall},
                                                 {"observation_kp_pairs", join(pairs, "\n")}});
    thought_req.request_key = make_request_key(thought_req);
    const std::string thought_reply = gateway.complete_chat(thought_req).text;

    const auto open = thought_reply.find("<thought>");
    const auto close = thought_reply.rfind("</thought>");
    if (open == std::string::npos || close == std::string::npos || close <= open) {
        throw Error(ErrorCode::thought_missing_delimiters,
                    "distiller reply lacks <thought> delimiters");
    }

    TrainingSample sample;
    sample.video_id = pool.video_id;
    sample.thought_process =
        thought_reply.substr(open, close + std::string("</thought>").size() - open);

    ChatRequest caption_req;
    caption_req.role = Role::distiller;
    caption_req.user_text = PromptLibrary::fill(prompts.get(prompt_names::caption_from_thought),
                                                {{"thought", sample.thought_process}});
    caption_req.images = frames;
    caption_req.request_key = make_request_key(caption_req);
    sample.final_caption = gateway.complete_chat(caption_req).text;
    return sample;
}

}  // namespace autocap
