#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prompts.hpp"
#include "provider.hpp"
#include "search_tree.hpp"

namespace autocap {

// One pooled key point with its provenance. Entries are never deleted;
// dropped points keep their status so the pool stays auditable.
struct PoolEntry {
    KeyPoint kp;
    int source_node = 0;
    bool review_keep = true;  // cleared when an annotator rejects the point
    std::optional<EmbeddingVector> embedding;  // of the pre-paraphrase text
};

// The per-video key-point pool: every extracted-and-verified point with its
// lifecycle status, the build threshold, and enough stored state to derive
// views at other thresholds without re-mining.
struct KeyPointPool {
    std::string video_id;
    double dedup_threshold = 0.9;
    bool paraphrased = false;
    std::vector<PoolEntry> entries;

    std::string to_json() const;
    static KeyPointPool from_json(const std::string& text);

    // Points that survived filtering and dedup (and review, if imported).
    std::vector<const PoolEntry*> survivors() const;

    // Derived view: re-runs the greedy dedup pass over the filter-surviving
    // entries at a different threshold, using the stored embeddings.
    std::vector<const PoolEntry*> survivors_at(double threshold) const;
};

bool pool_entry_survives(const PoolEntry& entry);

// Union of verified key points across all non-root nodes, in node-id then
// index order. Duplicates across nodes are kept; dedup happens later.
std::vector<PoolEntry> collect_verified(const Tree& tree);

// Judge labels each point keep/drop. Dropped points become filtered_out,
// never deleted. Unparseable judge output keeps the point (the human review
// is the final gate).
void filter_subjective(std::vector<PoolEntry>& entries, ProviderGateway& gateway,
                       const PromptLibrary& prompts);

// Greedy pass in stable order: a point is marked deduplicated when its
// cosine similarity to any earlier surviving point reaches the threshold.
void dedup(std::vector<PoolEntry>& entries, double threshold, ProviderGateway& gateway);

// Batch rewrite preserving count and order; a miscounted batch keeps its
// originals. Returns the number of batches kept as originals.
int paraphrase(std::vector<PoolEntry>& entries, ProviderGateway& gateway,
               const PromptLibrary& prompts);

// collect -> filter -> dedup -> optional paraphrase, as one pool.
KeyPointPool build_pool(const Tree& tree, ProviderGateway& gateway, const PromptLibrary& prompts,
                        double dedup_threshold, bool paraphrase_on);

// Review file: one surviving point per row with its verdict trail and an
// empty keep-flag column. Round-trippable.
void export_review(KeyPointPool& pool, const std::filesystem::path& path);

// Applies annotator keep-flags back onto the pool. Unknown kp ids fail.
void import_review(KeyPointPool& pool, const std::filesystem::path& path);

struct TrainingSample {
    std::string video_id;
    std::string thought_process;  // wrapped in <thought> delimiters
    std::string final_caption;

    std::string to_json() const;
};

// Two-step distillation: merge the pool into a thought process, then
// caption the video from frames plus that thought.
TrainingSample distill_training_sample(const KeyPointPool& pool, const Tree& tree,
                                       ProviderGateway& gateway, const PromptLibrary& prompts,
                                       const std::vector<std::string>& frames);

}  // namespace autocap
