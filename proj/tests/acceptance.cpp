// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "autocaption.h"
#include "errors.hpp"
#include "eval.hpp"
#include "mcts.hpp"
#include "pipeline.hpp"
#include "postprocess.hpp"
#include "sim_oracle.hpp"
#include "test_support.hpp"

using namespace autocap;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw Failure(message);
}

void require_close(double got, double expected, double tolerance, const std::string& label) {
    if (std::abs(got - expected) > tolerance) {
        std::ostringstream os;
        os << label << ": got " << got << ", expected " << expected << " +/- " << tolerance;
        throw Failure(os.str());
    }
}

// ---------------------------------------------------------------- criterion 1

struct TableRow {
    const char* model;
    double precision;
    double recall;
    double f1;
};

// Overall Precision/Recall/F1 for the 21 published models.
const TableRow kOverallRows[] = {
    {"InternVL2_5-8B", 69.6, 40.1, 50.8},
    {"InternVL2_5-26B", 70.1, 40.9, 51.7},
    {"InternVL2_5-38B", 70.6, 41.0, 51.8},
    {"InternVL2_5-78B", 70.6, 41.6, 52.4},
    {"LLaVa_OV_Qwen2_7B", 79.6, 51.8, 62.8},
    {"LLaVa_OV_Qwen2_72B", 81.3, 52.9, 64.1},
    {"LLaVa_Video_Qwen2_7B", 79.7, 48.9, 60.6},
    {"LLaVa_Video_Qwen2_72B", 82.1, 51.7, 63.4},
    {"MiniCPM-V-2_6", 77.7, 50.4, 61.2},
    {"PLLaVA-7B", 55.1, 30.4, 39.2},
    {"PLLaVA-13B", 72.5, 38.7, 50.4},
    {"PLLaVA-34B", 74.9, 38.5, 50.9},
    {"Qwen2-VL-7B", 77.8, 50.9, 61.5},
    {"Qwen2-VL-72B", 77.7, 52.1, 62.4},
    {"Tarsier-7B", 76.7, 45.2, 56.9},
    {"Tarsier-34B", 79.6, 45.7, 58.0},
    {"Llama-3-VILA1.5-8B", 75.6, 44.2, 55.8},
    {"VILA1.5-13B", 73.9, 44.4, 55.4},
    {"VILA1.5-40B", 78.3, 47.6, 59.2},
    {"Gemini-1.5-Pro", 80.9, 63.6, 71.2},
    {"GPT-4o", 83.8, 57.5, 68.2},
};

void criterion_f1_regression() {
    int rows = 0;
    for (const TableRow& row : kOverallRows) {
        const double computed = f1_from_pr(row.precision, row.recall);
        require_close(computed, row.f1, 0.15, std::string("F1 for ") + row.model);
        ++rows;
    }
    require(rows == 21, "expected 21 table rows");
    // Spot pins at the tighter tolerance.
    require_close(f1_from_pr(80.9, 63.6), 71.2, 0.05, "Gemini spot pin");
    require_close(f1_from_pr(81.3, 52.9), 64.1, 0.05, "LLaVa_OV_72B spot pin");
}

// ---------------------------------------------------------------- criterion 2

void criterion_value_formula() {
    SearchConfig config;  // alpha = beta = 0.5
    require(q_from_mc_sm(1.0, 0.0, config) == 1.0, "Q(1,0) must be exactly 1");
    require(q_from_mc_sm(0.0, 1.0, config) == 0.25, "Q(0,1) must be exactly 0.25");
    require_close(q_from_mc_sm(0.5, 0.5, config), 0.5, 1e-12, "Q(0.5,0.5)");

    DetRng rng(404);
    for (int i = 0; i < 10000; ++i) {
        const double mc = rng.next_unit();
        const double sm = rng.next_unit();
        const double q = q_from_mc_sm(mc, sm, config);
        require(q >= 0.25 - 1e-12 && q <= 1.0 + 1e-12, "Q out of [0.25, 1]");
        const double d = 1e-3;
        if (mc + d <= 1.0) {
            require(q_from_mc_sm(mc + d, sm, config) > q, "Q not strictly increasing in MC");
        }
        if (sm + d <= 1.0) {
            require(q_from_mc_sm(mc, sm + d, config) < q, "Q not strictly decreasing in SM");
        }
    }
}

// ---------------------------------------------------------------- criterion 3

void criterion_puct_selection() {
    require_close(puct_score(0.5, 1, 4, 0.125), 0.625, 1e-12, "puct hand arithmetic");

    VideoAsset video;
    video.video_id = "puct";
    video.frame_paths = {"f"};
    Tree tree(video);
    SearchConfig config;

    require(select_leaf(tree, config) == 0, "fresh tree must select the root");

    const int a = tree.add_child(0, ActionCode::a3_temporal, "p", "d");
    const int b = tree.add_child(0, ActionCode::a4_spatial, "p", "d");
    tree.node_mut(a).q_value = 0.8;
    tree.node_mut(b).q_value = 0.8;
    require(select_leaf(tree, config) == a, "equal scores must break to the smallest id");

    tree.node_mut(b).q_value = 0.9;
    require(select_leaf(tree, config) == b, "higher Q must win");

    // Fresher leaves beat equally valued visited ones.
    tree.node_mut(a).q_value = 0.9;
    tree.node_mut(a).visit_count = 3;
    tree.node_mut(0).visit_count = 9;
    require(puct_score(tree, b, 0.125) > puct_score(tree, a, 0.125),
            "fresh leaf must outscore the visited leaf");
    require(select_leaf(tree, config) == b, "selection must follow the puct ranking");

    // Selection always lands on a leaf.
    DetRng rng(9);
    int frontier = a;
    for (int i = 0; i < 12; ++i) {
        const int left = tree.add_child(frontier, ActionCode::a2_detail, "p", "d");
        tree.add_child(frontier, ActionCode::a5_background, "p", "d");
        tree.node_mut(left).q_value = rng.next_unit();
        frontier = left;
    }
    const auto leaves = tree.leaves();
    for (int i = 0; i < 50; ++i) {
        const int chosen = select_leaf(tree, config);
        require(std::find(leaves.begin(), leaves.end(), chosen) != leaves.end(),
                "select_leaf returned a non-leaf");
    }
}

// ---------------------------------------------------------------- criterion 4

void criterion_backpropagation() {
    SearchConfig config;
    VideoAsset video;
    video.video_id = "bp";
    video.frame_paths = {"f"};

    {
        // Three nodes: root -> n1 (selected), n1's children evaluated.
        Tree tree(video);
        const int n1 = tree.add_child(0, ActionCode::a1_overall, "p", "d");
        tree.node_mut(n1).q_value = 0.8;
        const int c1 = tree.add_child(n1, ActionCode::a2_detail, "p", "d");
        tree.node_mut(c1).q_value = 0.6;
        backpropagate(tree, n1, config);
        require(tree.node(0).visit_count == 1, "3-node: N(root) must become 1");
        require_close(tree.node(0).q_value, 0.8, 1e-12, "3-node: Q(root) = Q(n1)/1");
        require(tree.node(n1).visit_count == 0, "3-node: selected node excluded");
        require_close(tree.node(n1).q_value, 0.8, 1e-12, "3-node: selected Q untouched");
    }
    {
        // Five nodes: root -> {a, s}; a -> b (selected); b -> {c1, c2}.
        Tree tree(video);
        const int a = tree.add_child(0, ActionCode::a1_overall, "p", "d");
        const int s = tree.add_child(0, ActionCode::a1_overall, "p", "d");
        const int b = tree.add_child(a, ActionCode::a2_detail, "p", "d");
        tree.node_mut(a).q_value = 0.9;
        tree.node_mut(s).q_value = 0.7;
        tree.node_mut(b).q_value = 0.5;
        const int c1 = tree.add_child(b, ActionCode::a3_temporal, "p", "d");
        const int c2 = tree.add_child(b, ActionCode::a4_spatial, "p", "d");
        tree.node_mut(c1).q_value = 0.6;
        tree.node_mut(c2).q_value = 0.2;

        backpropagate(tree, b, config);
        // Pencil trace: a: N=1, Q = 0.5/1; root: N=1, Q = (0.5 + 0.7)/1.
        require(tree.node(a).visit_count == 1, "5-node: N(a)");
        require_close(tree.node(a).q_value, 0.5, 1e-12, "5-node: Q(a)");
        require(tree.node(0).visit_count == 1, "5-node: N(root)");
        require_close(tree.node(0).q_value, 1.2, 1e-12, "5-node: Q(root)");
        require(tree.node(b).visit_count == 0, "5-node: selected excluded");
        require_close(tree.node(b).q_value, 0.5, 1e-12, "5-node: selected Q untouched");

        backpropagate(tree, b, config);
        // Second pass: a: N=2, Q = 0.5/2 = 0.25; root: N=2, Q = (0.25+0.7)/2.
        require(tree.node(a).visit_count == 2, "5-node second pass: N(a)");
        require_close(tree.node(a).q_value, 0.25, 1e-12, "5-node second pass: Q(a)");
        require_close(tree.node(0).q_value, (0.25 + 0.7) / 2.0, 1e-12,
                  "5-node second pass: Q(root)");
    }
}

// ---------------------------------------------------------------- criterion 5

std::string slurp(const fs::path& path) { return read_text_file(path); }

void criterion_determinism() {
    const auto dir = testsupport::fresh_dir("acc5");
    std::vector<ManifestRecord> records;
    for (const char* id : {"det1", "det2", "det3"}) {
        auto oracle = testsupport::standard_oracle(id);
        const auto path = testsupport::write_oracle(dir, oracle);
        records.push_back({id, path.string(), "Home and Living", 12.0});
    }
    const auto manifest = testsupport::write_manifest(dir, records);

    auto mine = [&](const fs::path& out) {
        ac_pipeline* pipeline = nullptr;
        require(ac_pipeline_open(nullptr, &pipeline) == AC_OK, "C API open failed");
        require(ac_pipeline_set(pipeline, "simulated", "1") == AC_OK, "set simulated");
        require(ac_pipeline_set(pipeline, "seed", "2024") == AC_OK, "set seed");
        require(ac_pipeline_set(pipeline, "iterations", "25") == AC_OK, "set iterations");
        const ac_status status =
            ac_mine(pipeline, manifest.string().c_str(), out.string().c_str());
        std::string err = ac_pipeline_last_error(pipeline);
        ac_pipeline_close(pipeline);
        require(status == AC_OK, "mine failed: " + err);
    };

    const auto out1 = dir / "run1";
    const auto out2 = dir / "run2";
    mine(out1);
    mine(out2);

    for (const char* id : {"det1", "det2", "det3"}) {
        const auto tree_name = std::string(id) + ".tree.json";
        const auto pool_name = std::string(id) + ".pool.json";
        require(slurp(out1 / tree_name) == slurp(out2 / tree_name),
                "tree dumps differ for " + std::string(id));
        require(slurp(out1 / pool_name) == slurp(out2 / pool_name),
                "pools differ for " + std::string(id));

        const Tree tree = Tree::deserialize(slurp(out1 / tree_name));
        require(tree.size() == 1 + 2 + 2 * 25,
                "node count must be 1 + bootstrap(2) + 2*25, got " +
                    std::to_string(tree.size()));

        int a1_children = 0;
        for (int node_id = 1; node_id < tree.size(); ++node_id) {
            const SearchNode& node = tree.node(node_id);
            if (node.action == ActionCode::a1_overall) {
                ++a1_children;
                require(*node.parent_id == 0, "A1 nodes must hang off the root");
            }
            const auto& kids = tree.children(node_id);
            require(kids.empty() || kids.size() == 2,
                    "every expansion must yield exactly 2 children");
        }
        require(a1_children == 2, "exactly one dual-endpoint A1 event per tree");
        require(tree.children(0).size() == 2, "the root holds only the bootstrap children");
    }
}

// ---------------------------------------------------------------- criterion 6

void criterion_action_distribution() {
    // Exact enumeration of P(A2 in pair) for weights {2,1,1,1,1}.
    const int weights[] = {2, 1, 1, 1, 1};
    int total = 0;
    for (int w : weights) total += w;
    double p_pair = static_cast<double>(weights[0]) / total;
    for (int first = 1; first < 5; ++first) {
        p_pair += (static_cast<double>(weights[first]) / total) *
                  (static_cast<double>(weights[0]) / (total - weights[first]));
    }

    const std::vector<ActionCode> eligible = {ActionCode::a2_detail, ActionCode::a3_temporal,
                                              ActionCode::a4_spatial, ActionCode::a5_background,
                                              ActionCode::a6_camera};
    DetRng rng(31337);
    const int trials = 100000;
    int hits = 0;
    for (int i = 0; i < trials; ++i) {
        auto [a, b] = sample_two_actions(eligible, rng);
        require(a != b, "sampled pair must be distinct");
        if (a == ActionCode::a2_detail || b == ActionCode::a2_detail) ++hits;
    }
    const double observed = static_cast<double>(hits) / trials;
    const double sigma = std::sqrt(p_pair * (1.0 - p_pair) / trials);
    require_close(observed, p_pair, 3.0 * sigma,
              "P(A2 in pair) vs exact enumeration (3 sigma)");
}

// ---------------------------------------------------------------- criterion 7

void criterion_verification_conjunction() {
    const Verdict verdicts[] = {Verdict::yes, Verdict::no, Verdict::error};
    long long cases = 0;
    for (int question_count = 1; question_count <= 3; ++question_count) {
        const int combos = static_cast<int>(std::pow(9.0, question_count));
        for (int code = 0; code < combos; ++code) {
            int rest = code;
            std::vector<VerificationQuestion> questions;
            bool all_yes = true;
            bool any_error = false;
            for (int q = 0; q < question_count; ++q) {
                VerificationQuestion question;
                question.question_text = "q" + std::to_string(q);
                question.verdict_a = verdicts[rest % 3];
                question.verdict_b = verdicts[(rest / 3) % 3];
                rest /= 9;
                if (question.verdict_a != Verdict::yes || question.verdict_b != Verdict::yes) {
                    all_yes = false;
                }
                if (question.verdict_a == Verdict::error ||
                    question.verdict_b == Verdict::error) {
                    any_error = true;
                }
                questions.push_back(std::move(question));
            }
            const KpStatus status = adjudicate(questions);
            require((status == KpStatus::verified) == all_yes,
                    "verified must equal the all-yes conjunction");
            if (any_error) {
                require(status == KpStatus::failed, "any error verdict must fail the point");
            }
            ++cases;
        }
    }
    require(cases == 9 + 81 + 729, "exhaustive truth table incomplete");
}

// ---------------------------------------------------------------- criterion 8

std::vector<std::string> dedup_pool_texts() {
    std::vector<std::string> texts;
    const char* subjects[] = {"cup", "dog", "tree", "car", "window"};
    const char* colors[] = {"blue", "red", "green"};
    for (int s = 0; s < 5; ++s) {
        for (int c = 0; c < 3; ++c) {
            texts.push_back("The " + std::string(subjects[s]) + " is " + colors[c] + ".");
            texts.push_back("A " + std::string(subjects[s]) + " appears " + colors[c] + ".");
        }
    }
    for (int i = 0; i < 20; ++i) {
        texts.push_back("Extra sentence number " + std::to_string(i) + " about the scene.");
    }
    return texts;
}

std::vector<std::size_t> brute_force_survivors(const std::vector<std::string>& texts,
                                               double threshold) {
    FallbackEmbedder embedder;
    std::vector<EmbeddingVector> vecs;
    for (const auto& t : texts) vecs.push_back(embedder.embed(t));
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        bool dup = false;
        for (std::size_t j : kept) {
            if (cosine_similarity(vecs[j], vecs[i]) >= threshold) {
                dup = true;
                break;
            }
        }
        if (!dup) kept.push_back(i);
    }
    return kept;
}

void criterion_dedup_properties() {
    SimulatedGateway gateway({.seed = 0});
    const auto texts = dedup_pool_texts();
    require(texts.size() == 50, "pool must hold 50 points");

    auto run_dedup = [&](double threshold) {
        std::vector<PoolEntry> entries;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            PoolEntry entry;
            entry.kp.kp_id = "kp" + std::to_string(i);
            entry.kp.text = texts[i];
            entry.kp.status = KpStatus::verified;
            entries.push_back(entry);
        }
        dedup(entries, threshold, gateway);
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].kp.status == KpStatus::verified) kept.push_back(i);
        }
        return std::make_pair(std::move(entries), std::move(kept));
    };

    for (double threshold : {0.8, 0.9}) {
        auto [entries, kept] = run_dedup(threshold);
        const auto expected = brute_force_survivors(texts, threshold);
        require(kept == expected, "dedup disagrees with the brute-force oracle");

        // Determinism: a fresh run reproduces the same survivors.
        auto [entries2, kept2] = run_dedup(threshold);
        require(kept2 == kept, "dedup is not deterministic");

        // Idempotence: re-running over the marked pool changes nothing.
        auto snapshot = entries;
        dedup(entries, threshold, gateway);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            require(entries[i].kp.status == snapshot[i].kp.status, "dedup is not idempotent");
        }
    }

    const auto at_08 = brute_force_survivors(texts, 0.8);
    const auto at_09 = brute_force_survivors(texts, 0.9);
    require(at_08.size() < texts.size(), "the pool must actually contain near-duplicates");
    const std::set<std::size_t> set09(at_09.begin(), at_09.end());
    for (std::size_t i : at_08) {
        require(set09.count(i) == 1, "survivors at 0.9 must include survivors at 0.8");
    }
}

// ---------------------------------------------------------------- criterion 9

void criterion_oracle_recovery() {
    const auto dir = testsupport::fresh_dir("acc9");
    auto oracle = testsupport::standard_oracle("recov");
    require(oracle.facts.size() == 30, "oracle must define 30 ground-truth facts");
    const auto oracle_path = testsupport::write_oracle(dir, oracle);
    const auto manifest =
        testsupport::write_manifest(dir, {{"recov", oracle_path.string(), "Home and Living", 12.0}});

    // Full MCTS mining run.
    auto config = testsupport::sim_config(424242, 25);
    Pipeline pipeline(config);
    const auto out = dir / "mcts";
    require(pipeline.cmd_mine(manifest, out).exit_code() == 0, "mining failed");

    const KeyPointPool pool = KeyPointPool::from_json(slurp(out / "recov.pool.json"));
    const auto survivors = pool.survivors();

    std::set<std::string> fact_set;
    for (const auto& fact : oracle.facts) fact_set.insert(normalize_sentence(fact.text));
    std::set<std::string> covered;
    for (const auto* entry : survivors) {
        const std::string norm = normalize_sentence(entry->kp.text);
        require(fact_set.count(norm) == 1,
                "pool contains a non-oracle (unverified) fact: " + entry->kp.text);
        covered.insert(norm);
    }
    const double coverage = static_cast<double>(covered.size()) / fact_set.size();
    std::fprintf(stderr, "    oracle recovery: %.1f%% of facts covered, %zu pool survivors\n",
                 coverage * 100.0, survivors.size());
    require(coverage >= 0.90, "pool must cover at least 90% of oracle facts, got " +
                                  std::to_string(coverage * 100.0) + "%");

    // Beam-search baseline over the same oracle, same post-processing.
    SimulatedGateway gateway({.seed = 424242});
    gateway.load_oracle(oracle_path);
    PromptLibrary prompts;
    RolePolicy roles;
    SearchConfig search = config.search;
    VideoAsset video;
    video.video_id = "recov";
    video.frame_paths = sample_frames(oracle_path.string(), 64);
    const Tree beam_tree =
        run_beam_search(video, gateway, search, roles, prompts, 2, 25);
    KeyPointPool beam_pool = build_pool(beam_tree, gateway, prompts, 0.9, true);

    std::vector<std::string> kp_mcts;
    for (const auto* entry : survivors) kp_mcts.push_back(entry->kp.text);
    std::vector<std::string> kp_bs;
    for (const auto* entry : beam_pool.survivors()) kp_bs.push_back(entry->kp.text);
    require(!kp_bs.empty(), "beam search produced an empty pool");

    const auto [bs_in_mcts, mcts_in_bs] = mutual_inclusion(kp_bs, kp_mcts, gateway, prompts);
    std::fprintf(stderr,
                 "    mutual inclusion: %.2f%% of KP_bs in KP_mcts, %.2f%% of KP_mcts in KP_bs\n",
                 bs_in_mcts * 100.0, mcts_in_bs * 100.0);
    require(bs_in_mcts >= 0.0 && bs_in_mcts <= 1.0, "ratio out of range");
    require(mcts_in_bs >= 0.0 && mcts_in_bs <= 1.0, "ratio out of range");

    nlohmann::json report;
    report["kp_bs_in_kp_mcts"] = bs_in_mcts;
    report["kp_mcts_in_kp_bs"] = mcts_in_bs;
    report["kp_bs_count"] = kp_bs.size();
    report["kp_mcts_count"] = kp_mcts.size();
    atomic_write_file(dir / "mutual_inclusion.json", report.dump(2));
}

// --------------------------------------------------------------- criterion 10

void criterion_evaluation_roundtrip() {
    const auto dir = testsupport::fresh_dir("acc10");
    auto oracle = testsupport::standard_oracle("ev");
    const auto oracle_path = testsupport::write_oracle(dir, oracle);
    const auto manifest =
        testsupport::write_manifest(dir, {{"ev", oracle_path.string(), "Education", 12.0}});

    const auto pools = dir / "pools";
    {
        Pipeline pipeline(testsupport::sim_config(606, 25));
        require(pipeline.cmd_mine(manifest, pools).exit_code() == 0, "mining failed");
    }
    const KeyPointPool pool = KeyPointPool::from_json(slurp(pools / "ev.pool.json"));

    // Verbatim echo candidate at the default threshold scores exactly 1.
    {
        std::vector<std::string> texts;
        for (const auto* entry : pool.survivors_at(0.8)) texts.push_back(entry->kp.text);
        require(!texts.empty(), "empty reference view");
        auto echo_oracle = testsupport::standard_oracle("ev");
        echo_oracle.candidate_caption = join(texts, " ");
        testsupport::write_oracle(dir, echo_oracle);

        Pipeline pipeline(testsupport::sim_config(606, 25));
        const auto results = dir / "results_echo";
        require(pipeline.cmd_evaluate(manifest, pools, "echo", results).exit_code() == 0,
                "echo evaluation failed");
        const EvalRecord record = EvalRecord::from_json(slurp(results / "ev.echo.record.json"));
        require(record.precision == 1.0, "echo candidate precision must be 1.0");
        require(record.recall == 1.0, "echo candidate recall must be 1.0");
        require(record.f1 == 1.0, "echo candidate F1 must be 1.0");
    }

    // Disjoint candidate scores 0.
    {
        auto disjoint_oracle = testsupport::standard_oracle("ev");
        disjoint_oracle.candidate_caption =
            "A rocket launches from a desert pad. Mars glows red in the distance.";
        testsupport::write_oracle(dir, disjoint_oracle);

        Pipeline pipeline(testsupport::sim_config(606, 25));
        const auto results = dir / "results_disjoint";
        require(pipeline.cmd_evaluate(manifest, pools, "disjoint", results).exit_code() == 0,
                "disjoint evaluation failed");
        const EvalRecord record =
            EvalRecord::from_json(slurp(results / "ev.disjoint.record.json"));
        require(record.precision == 0.0 && record.recall == 0.0 && record.f1 == 0.0,
                "disjoint candidate must score 0");
    }

    // Threshold sweep 0.70..0.90 with two strictly ordered candidates.
    const auto sweep_results = dir / "sweep";
    for (int step = 0; step <= 10; ++step) {
        const double threshold = 0.70 + 0.02 * step;
        std::vector<std::string> texts;
        for (const auto* entry : pool.survivors_at(threshold)) texts.push_back(entry->kp.text);
        require(texts.size() >= 2, "sweep view too small");

        for (const char* model : {"strong", "weak"}) {
            std::vector<std::string> echo = texts;
            if (std::string(model) == "weak") {
                echo.resize(std::max<std::size_t>(1, texts.size() / 2));
            }
            auto sweep_oracle = testsupport::standard_oracle("ev");
            sweep_oracle.candidate_caption = join(echo, " ");
            testsupport::write_oracle(dir, sweep_oracle);

            auto config = testsupport::sim_config(606, 25);
            config.eval_threshold = threshold;
            Pipeline pipeline(config);
            char label[32];
            std::snprintf(label, sizeof(label), "%s_%02d", model, step);
            require(pipeline.cmd_evaluate(manifest, pools, model, sweep_results / label)
                        .exit_code() == 0,
                    "sweep evaluation failed");
        }
    }

    Pipeline reporter(testsupport::sim_config(606, 25));
    const auto report_dir = dir / "report";
    reporter.cmd_report(sweep_results, report_dir);
    const auto doc = nlohmann::json::parse(slurp(report_dir / "report.json"));
    require(doc.contains("rank_stability"), "report lacks the rank-stability section");
    const auto& stability = doc["rank_stability"];
    require(stability.is_array() && stability.size() == 10,
            "expected 10 adjacent-threshold comparisons, got " +
                std::to_string(stability.size()));
    for (const auto& cell : stability) {
        const double tau = cell.at("kendall_tau").get<double>();
        require(tau == 1.0, "rank stability violated: tau = " + std::to_string(tau));
    }

    // The strong model outranks the weak one at every threshold.
    for (const auto& [model, values] : doc["sweep"].items()) {
        require(model == "strong" || model == "weak", "unexpected model in sweep");
    }
    for (const auto& [key, f1_strong] : doc["sweep"]["strong"].items()) {
        const double weak = doc["sweep"]["weak"].at(key).get<double>();
        require(f1_strong.get<double>() > weak, "strong model must beat weak at " + key);
    }
}

// -------------------------------------------------------------------- driver

struct Criterion {
    int id;
    const char* name;
    std::function<void()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "f1-arithmetic-regression", criterion_f1_regression},
        {2, "value-formula-suite", criterion_value_formula},
        {3, "puct-selection-suite", criterion_puct_selection},
        {4, "backpropagation-trace", criterion_backpropagation},
        {5, "end-to-end-determinism", criterion_determinism},
        {6, "action-sampling-distribution", criterion_action_distribution},
        {7, "verification-conjunction", criterion_verification_conjunction},
        {8, "dedup-properties", criterion_dedup_properties},
        {9, "oracle-recovery-end-to-end", criterion_oracle_recovery},
        {10, "evaluation-round-trip", criterion_evaluation_roundtrip},
    };

    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.id != only) continue;
        const auto started = std::chrono::steady_clock::now();
        std::string message;
        bool ok = true;
        try {
            criterion.run();
        } catch (const std::exception& e) {
            ok = false;
            message = e.what();
        }
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        std::printf("%s  %2d  %-32s (%lld ms)%s%s\n", ok ? "PASS" : "FAIL", criterion.id,
                    criterion.name, static_cast<long long>(elapsed), ok ? "" : " -- ",
                    message.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
