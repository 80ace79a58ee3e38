#include <doctest.h>

#include <algorithm>
#include <map>

#include "actions.hpp"
#include "errors.hpp"
#include "search_tree.hpp"
#include "sim_oracle.hpp"
#include "test_support.hpp"

using namespace autocap;

namespace {

Tree small_tree() {
    VideoAsset video;
    video.video_id = "vid";
    video.frame_paths = {"f"};
    return Tree(video);
}

const std::vector<ActionCode> kNonOverall = {ActionCode::a2_detail, ActionCode::a3_temporal,
                                             ActionCode::a4_spatial, ActionCode::a5_background,
                                             ActionCode::a6_camera};

}  // namespace

TEST_CASE("A1 is eligible only at the fresh root") {
    Tree tree = small_tree();
    auto at_root = eligible_actions(tree, 0);
    REQUIRE(at_root.size() == 6);
    CHECK(at_root.front() == ActionCode::a1_overall);

    const int child = tree.add_child(0, ActionCode::a1_overall, "p", "d");
    CHECK(eligible_actions(tree, child) == kNonOverall);
    CHECK(eligible_actions(tree, 0) == kNonOverall);  // A1 runs once per tree
}

TEST_CASE("sampling two actions is weighted and without replacement") {
    DetRng rng(5);
    SUBCASE("forced pair") {
        auto [a, b] = sample_two_actions({ActionCode::a2_detail, ActionCode::a3_temporal}, rng);
        CHECK(a != b);
        CHECK((a == ActionCode::a2_detail || b == ActionCode::a2_detail));
        CHECK((a == ActionCode::a3_temporal || b == ActionCode::a3_temporal));
    }
    SUBCASE("too few actions") {
        CHECK_THROWS_AS(sample_two_actions({ActionCode::a2_detail}, rng), Error);
    }
    SUBCASE("never duplicates") {
        for (int i = 0; i < 2000; ++i) {
            auto [a, b] = sample_two_actions(kNonOverall, rng);
            CHECK(a != b);
        }
    }
}

namespace {

// Exact enumeration of the weighted without-replacement draw over A2..A6.
struct PairEnumeration {
    double p_first_a2 = 0.0;
    double p_a2_in_pair = 0.0;
};

PairEnumeration enumerate_pair_distribution() {
    PairEnumeration out;
    const int weights[] = {2, 1, 1, 1, 1};  // A2..A6
    int total = 0;
    for (int w : weights) total += w;
    for (int first = 0; first < 5; ++first) {
        const double p_first = static_cast<double>(weights[first]) / total;
        if (first == 0) {
            out.p_first_a2 += p_first;
            out.p_a2_in_pair += p_first;
            continue;
        }
        const double p_second_a2 =
            static_cast<double>(weights[0]) / (total - weights[first]);
        out.p_a2_in_pair += p_first * p_second_a2;
    }
    return out;
}

}  // namespace

TEST_CASE("pair distribution matches exact enumeration within 3 sigma") {
    const PairEnumeration expected = enumerate_pair_distribution();
    CHECK(expected.p_first_a2 == doctest::Approx(1.0 / 3.0));

    DetRng rng(123);
    const int trials = 10000;
    int first_a2 = 0;
    int a2_in_pair = 0;
    for (int i = 0; i < trials; ++i) {
        auto [a, b] = sample_two_actions(kNonOverall, rng);
        if (a == ActionCode::a2_detail) ++first_a2;
        if (a == ActionCode::a2_detail || b == ActionCode::a2_detail) ++a2_in_pair;
    }
    const double sigma_first =
        std::sqrt(expected.p_first_a2 * (1 - expected.p_first_a2) / trials);
    const double sigma_pair =
        std::sqrt(expected.p_a2_in_pair * (1 - expected.p_a2_in_pair) / trials);
    CHECK(std::abs(first_a2 / double(trials) - expected.p_first_a2) < 3 * sigma_first);
    CHECK(std::abs(a2_in_pair / double(trials) - expected.p_a2_in_pair) < 3 * sigma_pair);
}

TEST_CASE("prompt assembly follows the templates") {
    PromptLibrary prompts;

    SUBCASE("bare template on empty history") {
        ActionContext empty;
        const std::string p = build_prompt(ActionCode::a3_temporal, empty, prompts);
        CHECK(p.find("new temporal perspective") != std::string::npos);
        CHECK(p.find("previously mentioned perspectives") == std::string::npos);
    }

    SUBCASE("previous descriptions are injected in order") {
        ActionContext ctx;
        ctx.previous_perspectives = {"first view", "second view"};
        const std::string p = build_prompt(ActionCode::a5_background, ctx, prompts);
        const auto i = p.find("first view");
        const auto j = p.find("second view");
        REQUIRE(i != std::string::npos);
        REQUIRE(j != std::string::npos);
        CHECK(i < j);
        CHECK(p.find("previously mentioned perspectives") != std::string::npos);
    }

    SUBCASE("detail focus clause") {
        ActionContext ctx;
        ctx.detail_focus = ActionContext::DetailFocus{"typewriter", "Other Objects",
                                                      "gears, levers"};
        const std::string p = build_prompt(ActionCode::a2_detail, ctx, prompts);
        CHECK(p.find("I want you to focus on the typewriter") != std::string::npos);
        CHECK(p.find("gears, levers") != std::string::npos);
    }

    SUBCASE("verified history key points are injected") {
        ActionContext ctx;
        ctx.verified_history_kps = {"The cup is blue.", "The dog has brown fur."};
        const std::string p = build_prompt(ActionCode::a2_detail, ctx, prompts);
        CHECK(p.find("The cup is blue.") != std::string::npos);
        CHECK(p.find("The dog has brown fur.") != std::string::npos);
    }

    SUBCASE("assembly is pure") {
        ActionContext ctx;
        ctx.previous_perspectives = {"x"};
        CHECK(build_prompt(ActionCode::a4_spatial, ctx, prompts) ==
              build_prompt(ActionCode::a4_spatial, ctx, prompts));
    }
}

TEST_CASE("gather_context collects same-action history only") {
    Tree tree = small_tree();
    const int a = tree.add_child(0, ActionCode::a3_temporal, "p", "temporal one");
    KeyPoint kp;
    kp.text = "Snow falls.";
    kp.status = KpStatus::verified;
    tree.node_mut(a).key_points.push_back(kp);
    KeyPoint failed;
    failed.text = "Wrong thing.";
    failed.status = KpStatus::failed;
    tree.node_mut(a).key_points.push_back(failed);

    const int b = tree.add_child(a, ActionCode::a4_spatial, "p", "spatial one");
    const int c = tree.add_child(b, ActionCode::a3_temporal, "p", "temporal two");

    const ActionContext ctx = gather_context(tree, c, ActionCode::a3_temporal);
    REQUIRE(ctx.previous_perspectives.size() == 2);  // both A3 ancestors, not the A4 one
    CHECK(ctx.previous_perspectives[0] == "temporal one");
    CHECK(ctx.verified_history_kps == std::vector<std::string>{"Snow falls."});

    const ActionContext other = gather_context(tree, c, ActionCode::a5_background);
    CHECK(other.previous_perspectives.empty());
    CHECK(other.verified_history_kps.empty());
}

TEST_CASE("perspectives are truncated to the five most recent") {
    Tree tree = small_tree();
    int frontier = 0;
    for (int i = 0; i < 8; ++i) {
        frontier = tree.add_child(frontier, ActionCode::a6_camera, "p",
                                  "camera view " + std::to_string(i));
    }
    const ActionContext ctx = gather_context(tree, frontier, ActionCode::a6_camera);
    REQUIRE(ctx.previous_perspectives.size() == 5);
    CHECK(ctx.previous_perspectives.front() == "camera view 3");
    CHECK(ctx.previous_perspectives.back() == "camera view 7");
}

TEST_CASE("parse_detail_extraction handles the labeled lines") {
    auto good = parse_detail_extraction(
        "Detail: typewriter\nCategory: Other Objects\nRelevant Describe Aspects: gears");
    REQUIRE(good.has_value());
    CHECK(good->detail == "typewriter");
    CHECK(good->category == "Other Objects");
    CHECK(good->aspects == "gears");

    auto spaced = parse_detail_extraction("  detail:  cup \n CATEGORY: Food\n");
    REQUIRE(spaced.has_value());
    CHECK(spaced->detail == "cup");

    CHECK_FALSE(parse_detail_extraction("I cannot tell.").has_value());
    CHECK_FALSE(parse_detail_extraction("Category: Food").has_value());
}

TEST_CASE("two-stage detail action against the simulated oracle") {
    const auto dir = testsupport::fresh_dir("actions");
    const auto oracle_path = testsupport::write_oracle(dir, testsupport::standard_oracle("vd"));
    SimulatedGateway gateway({.seed = 9});
    PromptLibrary prompts;
    const std::vector<std::string> frames = {oracle_path.string() + "#frame-0"};

    SUBCASE("fresh history digs the first detail group") {
        const DetailOutcome outcome =
            run_detail_action(gateway, prompts, ActionContext{}, frames, 0.7);
        CHECK_FALSE(outcome.extraction_failed);
        CHECK(outcome.focus_label == "typewriter");
        CHECK(outcome.description.find("The typewriter has visible gears.") != std::string::npos);
        CHECK(outcome.prompt.find("I want you to focus on the typewriter") != std::string::npos);
    }

    SUBCASE("history advances to the next unseen group") {
        ActionContext ctx;
        ctx.verified_history_kps = {"The typewriter has visible gears.",
                                    "The typewriter shows signs of wear.",
                                    "The typewriter body is black."};
        const DetailOutcome outcome = run_detail_action(gateway, prompts, ctx, frames, 0.7);
        CHECK(outcome.focus_label == "cup");
        CHECK(outcome.description.find("The cup is blue.") != std::string::npos);
    }

    SUBCASE("malformed stage-2 extraction fails the action") {
        SimulatedGateway broken({.seed = 9, .stage2_malformed = true});
        const DetailOutcome outcome =
            run_detail_action(broken, prompts, ActionContext{}, frames, 0.7);
        CHECK(outcome.extraction_failed);
        CHECK_FALSE(outcome.stage1_text.empty());
        CHECK(outcome.description == outcome.stage1_text);
    }
}

TEST_CASE("template directory overrides replace the built-in prompts") {
    const auto dir = testsupport::fresh_dir("templates");
    atomic_write_file(dir / "a3_temporal.txt", "Custom temporal prompt.");
    PromptLibrary prompts;
    prompts.load_overrides(dir);
    CHECK(build_prompt(ActionCode::a3_temporal, ActionContext{}, prompts) ==
          "Custom temporal prompt.");
    // Untouched templates keep their defaults.
    CHECK(build_prompt(ActionCode::a4_spatial, ActionContext{}, prompts)
              .find("new spatial perspective") != std::string::npos);
}

TEST_CASE("overall action invokes every configured endpoint") {
    const auto dir = testsupport::fresh_dir("actions");
    const auto oracle_path = testsupport::write_oracle(dir, testsupport::standard_oracle("vo"));
    PromptLibrary prompts;
    const std::vector<std::string> frames = {oracle_path.string() + "#frame-0"};

    SimulatedGateway dual({.seed = 1, .dual_overall = true});
    const auto both = run_overall_action(dual, prompts, frames, 0.0);
    REQUIRE(both.size() == 2);
    CHECK(both[0].description != both[1].description);  // reversed wording
    CHECK(both[0].description.find("A child sits on a wooden bench.") != std::string::npos);
    CHECK(both[1].description.find("A child sits on a wooden bench.") != std::string::npos);

    SimulatedGateway single({.seed = 1, .dual_overall = false});
    CHECK(run_overall_action(single, prompts, frames, 0.0).size() == 1);
}
