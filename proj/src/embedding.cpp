#include "embedding.hpp"

#include <cmath>

#include "util.hpp"

namespace autocap {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    const std::size_t n = std::min(a.values.size(), b.values.size());
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += a.values[i] * b.values[i];
    }
    for (double v : a.values) na += v * v;
    for (double v : b.values) nb += v * v;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

// Avalanche finalizer: FNV's low bits are too correlated for power-of-two
// bucketing on short n-grams.
std::uint64_t mix_bits(std::uint64_t h) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ull;
    h ^= h >> 33;
    return h;
}

}  // namespace

std::size_t FallbackEmbedder::bucket_of(std::string_view gram) {
    return mix_bits(fnv1a64(gram)) % kDim;
}

EmbeddingVector FallbackEmbedder::embed(std::string_view text) const {
    EmbeddingVector vec;
    vec.values.assign(kDim, 0.0);
    const std::string lowered = lowercase(text);
    if (lowered.size() >= 3) {
        for (std::size_t i = 0; i + 3 <= lowered.size(); ++i) {
            vec.values[bucket_of(std::string_view(lowered).substr(i, 3))] += 1.0;
        }
    } else if (!lowered.empty()) {
        // Short strings still get a stable nonzero vector.
        vec.values[bucket_of(lowered)] += 1.0;
    }
    double norm = 0.0;
    for (double v : vec.values) norm += v * v;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : vec.values) v /= norm;
    }
    return vec;
}

std::vector<EmbeddingVector> FallbackEmbedder::embed_all(const std::vector<std::string>& texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

}  // namespace autocap
