#pragma once

#include <string_view>
#include <vector>

namespace autocap {

// Fixed-length real vector. dim stays identical across one provider session.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Offline embedder: hashed bag of character 3-grams over the lowercased
// text, L2-normalized. Deterministic, so similarity scoring and dedup
// stay testable without a network embedder.
class FallbackEmbedder {
public:
    static constexpr std::size_t kDim = 512;

    // Bucket index a (lowercased) n-gram accumulates into.
    static std::size_t bucket_of(std::string_view gram);

    EmbeddingVector embed(std::string_view text) const;

    std::vector<EmbeddingVector> embed_all(const std::vector<std::string>& texts) const;
};

}  // namespace autocap
