#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autocap {

// 64-bit FNV-1a. Stable across platforms; used for request keys and
// the fallback embedder buckets.
constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

// splitmix64 step; the basis for every deterministic random stream.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic RNG with explicit seeding so runs are replayable
// (and resumable) without serializing engine state.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    // Uniform in [0, 1).
    double next_unit();

private:
    std::uint64_t state_;
};

// Combines components into a derived seed, e.g. (run seed, video id, iteration).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t counter = 0);

std::string lowercase(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);

// Splits prose into sentences on '.', '!', '?' boundaries, keeping the
// terminator. Quick heuristic, good enough for provider text.
std::vector<std::string> split_sentences(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view text, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);

// Normalization used whenever two sentences are compared for identity:
// lowercase, collapse whitespace, strip leading/trailing punctuation.
std::string normalize_sentence(std::string_view s);

// Parses "3. some text" / "3) some text" into (3, "some text").
std::optional<std::pair<int, std::string>> parse_numbered_line(std::string_view line);

std::string read_text_file(const std::filesystem::path& path);

// Write-temp-then-rename so concurrent readers never see partial files.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace autocap
