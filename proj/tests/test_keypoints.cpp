#include <doctest.h>

#include "errors.hpp"
#include "keypoints.hpp"
#include "sim_oracle.hpp"
#include "test_support.hpp"
#include "verification.hpp"

using namespace autocap;
using testsupport::FakeGateway;

TEST_CASE("extraction parses bullet lines into unverified key points") {
    const auto dir = testsupport::fresh_dir("kp");
    auto oracle = testsupport::standard_oracle("ve");
    oracle.extraction_scripts[normalize_sentence("A man in a red coat runs.")] = {
        "A man wears a red coat.", "The man runs."};
    const auto oracle_path = testsupport::write_oracle(dir, oracle);

    SimulatedGateway gateway({.seed = 2});
    gateway.load_oracle(oracle_path);
    PromptLibrary prompts;
    const std::vector<std::string> frames = {oracle_path.string() + "#frame-0"};

    SUBCASE("scripted conjunction split yields two points") {
        const auto kps = extract_key_points("A man in a red coat runs.", "ve", 3, gateway,
                                            prompts, frames);
        REQUIRE(kps.size() == 2);
        CHECK(kps[0].text == "A man wears a red coat.");
        CHECK(kps[1].text == "The man runs.");
        CHECK(kps[0].kp_id == "ve/3/0");
        CHECK(kps[1].kp_id == "ve/3/1");
        for (const auto& kp : kps) CHECK(kp.status == KpStatus::unverified);
    }

    SUBCASE("one-fact sentence yields exactly one point") {
        const auto kps = extract_key_points("The cup is blue.", "ve", 1, gateway, prompts, frames);
        REQUIRE(kps.size() == 1);
        CHECK(kps[0].text == "The cup is blue.");
    }

    SUBCASE("uncertain expressions are dropped") {
        const auto kps = extract_key_points(
            "The cup is blue. These people could be tourists.", "ve", 1, gateway, prompts, frames);
        REQUIRE(kps.size() == 1);
        CHECK(kps[0].text == "The cup is blue.");
    }

    SUBCASE("empty extractor output is an error") {
        FakeGateway empty([](const ChatRequest&) { return ""; });
        try {
            extract_key_points("whatever", "ve", 0, empty, prompts, {});
            FAIL("expected UnparseableExtraction");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::unparseable_extraction);
        }
    }
}

TEST_CASE("categorization maps to the five labels with a soft default") {
    const auto dir = testsupport::fresh_dir("kp");
    const auto oracle_path = testsupport::write_oracle(dir, testsupport::standard_oracle("vc"));
    SimulatedGateway gateway({.seed = 2});
    gateway.load_oracle(oracle_path);
    PromptLibrary prompts;

    SUBCASE("camera motion") {
        KeyPoint kp;
        kp.text = "The camera pans left.";
        categorize_key_point(kp, gateway, prompts);
        CHECK(kp.category == KpCategory::camera_movement_composition);
        CHECK_FALSE(kp.category_defaulted);
    }

    SUBCASE("clothing reads as appearance") {
        KeyPoint kp;
        kp.text = "The man wears a yellow outfit.";
        categorize_key_point(kp, gateway, prompts);
        CHECK(kp.category == KpCategory::appearance);
    }

    SUBCASE("oracle fact categories are authoritative") {
        KeyPoint kp;
        kp.text = "The room glows with warm light.";
        categorize_key_point(kp, gateway, prompts);
        CHECK(kp.category == KpCategory::environment);
    }

    SUBCASE("garbage classifier output falls back to Object with a warning") {
        FakeGateway garbage([](const ChatRequest&) { return "beep boop"; });
        KeyPoint kp;
        kp.text = "Nonsense.";
        categorize_key_point(kp, garbage, prompts);
        CHECK(kp.category == KpCategory::object);
        CHECK(kp.category_defaulted);
        CHECK(garbage.calls == 2);  // one retry
    }
}

TEST_CASE("question generation") {
    const auto dir = testsupport::fresh_dir("kp");
    auto oracle = testsupport::standard_oracle("vq");
    oracle.question_scripts[normalize_sentence("The number 5 is on the jersey.")] = {
        "Is the number on the jersey 5?"};
    oracle.question_scripts[normalize_sentence("A small red car is parked.")] = {
        "Is the car small?", "Is the car red?"};
    const auto oracle_path = testsupport::write_oracle(dir, oracle);
    SimulatedGateway gateway({.seed = 2});
    gateway.load_oracle(oracle_path);
    PromptLibrary prompts;

    SUBCASE("single fact, single question") {
        KeyPoint kp;
        kp.text = "The number 5 is on the jersey.";
        const auto questions = generate_questions(kp, gateway, prompts);
        REQUIRE(questions.size() == 1);
        CHECK(questions[0].question_text == "Is the number on the jersey 5?");
    }

    SUBCASE("multi-fact points get multiple questions") {
        KeyPoint kp;
        kp.text = "A small red car is parked.";
        const auto questions = generate_questions(kp, gateway, prompts);
        CHECK(questions.size() >= 2);
    }

    SUBCASE("empty writer output is an error") {
        FakeGateway empty([](const ChatRequest&) { return "no questions"; });
        KeyPoint kp;
        kp.text = "Anything.";
        try {
            generate_questions(kp, empty, prompts);
            FAIL("expected NoQuestionsGenerated");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::no_questions_generated);
        }
    }
}

TEST_CASE("verifier reply parsing") {
    SUBCASE("json list form") {
        const auto verdicts = parse_verifier_reply(
            R"(["1. Yes, visible.", "2. No, absent."])", 2);
        CHECK(verdicts[0].first == Verdict::yes);
        CHECK(verdicts[1].first == Verdict::no);
    }
    SUBCASE("bracketed judgement tokens") {
        const auto verdicts = parse_verifier_reply("1. [Yes], [clearly shown]\n2. [No], [never]", 2);
        CHECK(verdicts[0].first == Verdict::yes);
        CHECK(verdicts[1].first == Verdict::no);
    }
    SUBCASE("malformed and missing entries become error verdicts") {
        const auto verdicts = parse_verifier_reply("1. Maybe, unclear.", 2);
        CHECK(verdicts[0].first == Verdict::error);
        CHECK(verdicts[1].first == Verdict::error);
    }
}

TEST_CASE("adjudication is the all-yes conjunction") {
    auto question = [](Verdict a, Verdict b) {
        VerificationQuestion q;
        q.question_text = "q";
        q.verdict_a = a;
        q.verdict_b = b;
        return q;
    };

    CHECK(adjudicate({question(Verdict::yes, Verdict::yes)}) == KpStatus::verified);
    CHECK(adjudicate({question(Verdict::yes, Verdict::no)}) == KpStatus::failed);
    CHECK(adjudicate({question(Verdict::error, Verdict::yes)}) == KpStatus::failed);
    CHECK(adjudicate({question(Verdict::yes, Verdict::yes),
                      question(Verdict::yes, Verdict::yes)}) == KpStatus::verified);
    CHECK(adjudicate({question(Verdict::yes, Verdict::yes),
                      question(Verdict::no, Verdict::yes)}) == KpStatus::failed);
    CHECK(adjudicate({}) == KpStatus::failed);

    // Monotonicity: flipping any yes to no can only verify -> fail.
    const Verdict all[] = {Verdict::yes, Verdict::no, Verdict::error};
    for (Verdict a1 : all) {
        for (Verdict b1 : all) {
            const KpStatus base = adjudicate({question(a1, b1)});
            for (Verdict worse : {Verdict::no, Verdict::error}) {
                const KpStatus degraded = adjudicate({question(worse, b1)});
                if (base == KpStatus::failed) CHECK(degraded == KpStatus::failed);
            }
        }
    }
}

TEST_CASE("dual-verifier verification against the oracle") {
    const auto dir = testsupport::fresh_dir("kp");
    const auto oracle_path = testsupport::write_oracle(dir, testsupport::standard_oracle("vv"));
    SimulatedGateway gateway({.seed = 2});
    gateway.load_oracle(oracle_path);
    PromptLibrary prompts;
    const std::vector<std::string> frames = {oracle_path.string() + "#frame-0"};

    SUBCASE("oracle fact verifies") {
        KeyPoint kp;
        kp.kp_id = "vv/1/0";
        kp.text = "The cup is blue.";
        kp.questions = generate_questions(kp, gateway, prompts);
        CHECK(verify_key_point(kp, frames, gateway, prompts) == KpStatus::verified);
        CHECK(kp.questions[0].verdict_a == Verdict::yes);
        CHECK(kp.questions[0].verdict_b == Verdict::yes);
        CHECK_FALSE(kp.questions[0].rationale_a.empty());
    }

    SUBCASE("non-fact fails on both verifiers") {
        KeyPoint kp;
        kp.text = "The cup is green.";
        kp.questions = generate_questions(kp, gateway, prompts);
        CHECK(verify_key_point(kp, frames, gateway, prompts) == KpStatus::failed);
    }

    SUBCASE("provider failure records error verdicts and fails the point") {
        FakeGateway flaky([](const ChatRequest& req) -> std::string {
            if (req.role == Role::verifier_a || req.role == Role::verifier_b) {
                throw Error(ErrorCode::endpoint_unreachable, "verifier down");
            }
            return "> Is it true that x?";
        });
        KeyPoint kp;
        kp.text = "x.";
        VerificationQuestion q;
        q.question_text = "Is it true that x?";
        kp.questions.push_back(q);
        CHECK(verify_key_point(kp, {}, flaky, prompts) == KpStatus::failed);
        CHECK(kp.questions[0].verdict_a == Verdict::error);
    }

    SUBCASE("batches above the per-call cap split and merge in order") {
        std::vector<KeyPoint> kps;
        for (int i = 0; i < 25; ++i) {
            KeyPoint kp;
            kp.text = i % 2 == 0 ? "The cup is blue." : "The cup is green.";
            VerificationQuestion q;
            q.question_text = i % 2 == 0 ? "Is it true that The cup is blue?"
                                         : "Is it true that The cup is green?";
            kp.questions.push_back(q);
            kps.push_back(kp);
        }
        verify_node_key_points(kps, frames, gateway, prompts);
        for (int i = 0; i < 25; ++i) {
            CHECK(kps[static_cast<std::size_t>(i)].status ==
                  (i % 2 == 0 ? KpStatus::verified : KpStatus::failed));
        }
    }
}

TEST_CASE("batch verification equals question-by-question verification") {
    const auto dir = testsupport::fresh_dir("kp");
    const auto oracle_path = testsupport::write_oracle(dir, testsupport::standard_oracle("vb"));
    SimulatedGateway gateway({.seed = 2});
    gateway.load_oracle(oracle_path);
    PromptLibrary prompts;
    const std::vector<std::string> frames = {oracle_path.string() + "#frame-0"};

    std::vector<KeyPoint> batch;
    for (const char* text : {"The cup is blue.", "The cup is green.", "The dog has brown fur.",
                             "A purple whale flies."}) {
        KeyPoint kp;
        kp.text = text;
        kp.questions = generate_questions(kp, gateway, prompts);
        batch.push_back(kp);
    }
    std::vector<KeyPoint> singles = batch;

    verify_node_key_points(batch, frames, gateway, prompts);
    for (auto& kp : singles) {
        verify_key_point(kp, frames, gateway, prompts);
    }
    REQUIRE(batch.size() == singles.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        CHECK(batch[i].status == singles[i].status);
        for (std::size_t q = 0; q < batch[i].questions.size(); ++q) {
            CHECK(batch[i].questions[q].verdict_a == singles[i].questions[q].verdict_a);
            CHECK(batch[i].questions[q].verdict_b == singles[i].questions[q].verdict_b);
        }
    }
}

TEST_CASE("mc value is the verified ratio with a zero degenerate rule") {
    std::vector<KeyPoint> kps(4);
    kps[0].status = KpStatus::verified;
    kps[1].status = KpStatus::verified;
    kps[2].status = KpStatus::verified;
    kps[3].status = KpStatus::failed;
    CHECK(mc_from_keypoints(kps) == doctest::Approx(0.75));

    CHECK(mc_from_keypoints({}) == 0.0);

    for (auto& kp : kps) kp.status = KpStatus::verified;
    CHECK(mc_from_keypoints(kps) == 1.0);
}

TEST_CASE("status lattice only moves forward") {
    CHECK(kp_status_transition_allowed(KpStatus::unverified, KpStatus::verified));
    CHECK(kp_status_transition_allowed(KpStatus::unverified, KpStatus::failed));
    CHECK(kp_status_transition_allowed(KpStatus::verified, KpStatus::filtered_out));
    CHECK(kp_status_transition_allowed(KpStatus::verified, KpStatus::deduplicated));
    CHECK(kp_status_transition_allowed(KpStatus::verified, KpStatus::exported_for_review));
    CHECK_FALSE(kp_status_transition_allowed(KpStatus::failed, KpStatus::verified));
    CHECK_FALSE(kp_status_transition_allowed(KpStatus::filtered_out, KpStatus::verified));
    CHECK_FALSE(kp_status_transition_allowed(KpStatus::deduplicated, KpStatus::verified));
    CHECK_FALSE(kp_status_transition_allowed(KpStatus::exported_for_review, KpStatus::unverified));
}
