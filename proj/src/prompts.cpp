#include "prompts.hpp"

#include <stdexcept>

#include "util.hpp"

namespace autocap {

namespace {

const char* kA1Overall =
    "Please describe the video in detail. Focus on providing a comprehensive overview of the "
    "entire video content, including the main subjects, actions, and settings.";

const char* kA2Stage1 =
    "Next, I think you should carefully observe the details of the page, I think there are these "
    "details to consider, People or Animals, Plants, Food, Buildings, Vehicles, Other Objects and "
    "so on. Please ouput only one detail you want to focus on.";

const char* kA2FocusClause =
    " I want you to focus on the {detail} in the video and describe it in the following detail: "
    "{relevant_detail_attributes}";

const char* kA2Stage2Extract = R"(For MLLMs, generating video content description is a very important task, which is called "video caption" task. At the same time, it is hoped that the model can pay more attention to the details of the video when describing the video.
To do that, I'll start by giving the model the video to determine the details that need attention.
Then I will give you the "MODEL ANSWER" (what the model think itself should focus on) and need you to extract the following information from this "MODEL ANSWER":
1. What video detail does the model need to focus on?
2. What category does this detail fall into?
3. What describe aspects can model focus on for this detail?
Here are some categories of details and describe aspects to focus on under the category, if the details extracted from the answer can not be classified into the following categories, you can think of your own:
1. People or Animals: Describe their expressions, facial features, postures, clothing, age, and quantity. Please include any notable actions or interactions they are involved in.
2. Plants: Describe the quantity, types, size, color, and any notable features such as flowers or fruits.
3. Food: Describe the quantity, types, colors, and presentation (e.g., plated, packaged).
4. Buildings: Describe the quantity, types, architectural style, appearance, shapes, and any distinctive features (e.g., windows, doors, decorations).
5. Vehicles: Describe the types, appearance, quantity, color, and any notable features (e.g., brand, model, condition).
Please answer in this format:
Detail: [the detail what the model think itself should focus on in MODEL ANSWER.]
Category: [What category does this detail fall into. Can either pick from the above categories or thick by yourself.]
Relevant Describe Aspects: [The possible describe aspects when focusing on the detail.]
Here is the MODEL ANSWER: {model_answer}
Output:
)";

const char* kA3Temporal =
    "Please describe the video from a new temporal perspective. Focus on changes that occur "
    "before and after a specific camera transition or time point in the video.";

const char* kA4Spatial =
    "Please describe the video from a new spatial perspective. Focus on different areas of the "
    "frame, such as the left side, right side, foreground, or background.";

const char* kA5Background =
    "Please provide a detailed description of the background in the video. Focus on the setting, "
    "environment, and any contextual elements that contribute to the overall scene.";

const char* kA6Camera =
    "Please describe the changes in camera shots and movements throughout the video. Focus on "
    "different types of shots, camera movements, angles, transitions, and any special effects "
    "used.";

const char* kReferenceBlock =
    "\n\nHere are the previously mentioned perspectives for reference:\n{previous_perspectives}";

const char* kHistoryKpsBlock =
    "\n\nHere are the correct key points already extracted from previous descriptions. Please "
    "pay attention to new details that are not covered by them:\n{history_key_points}";

const char* kExtractKp = R"(Please break down the following video caption into individual key points. A sentence in the video caption should be split to individual key points if it cantains much information.

Requirement:
1. Make sure to substitute pronouns in split individual sentences by the nouns they refer to.
2. If a individual sentence contains uncertain expressions, these expressions should not be included as key points.

For clarity, consider these examples:

## Example 1
### Video Description:
The video showcases a man in a blue jacket walking a brown dog along a beach at sunset.
### Result:
> A man wears a blue jacket.
> The man walks a dog.
> The dog is brown.
> The scene takes place on a beach at sunset.

## Example 2
### Video Description:
A chef chops onions quickly in a bright kitchen.
### Result:
> A chef chops onions.
> The chef chops quickly.
> The kitchen is bright.

With these examples in mind, please help me break down the following video caption into individual key points.

### Video Description:
{description}
### Result:)";

const char* kCategorizeKp = R"(Please classify the following video key point into exactly one of these five categories:
1. Appearance Description
2. Action Description
3. Environment Description
4. Object Description
5. Camera Movement and Composition

Please answer with the category name only.

### Key Point
{key_point}
### Category:)";

const char* kGenerateQuestions = R"(You are given a key point extracted from a video description.
Your task is to identify the key information within the given key point and construct yes/no questions according to the identified key information.
If the key point has more than one key information, you need to generate more than one question.

For clarity, consider these examples:

## Example 1
### Key Point
The man wears a red coat.
### Output
> Is the coat the man wears red?

## Example 2
### Key Point
Two small boats float on the lake.
### Output
> Are there two boats on the lake?
> Are the boats small?

With these examples in mind, please help me construct yes/no questions for the following key point.

### Key Point
{key_point}
### Output)";

const char* kAnswerQuestions = R"(You are provided with several frames extracted from a video and {ques_num} yes/no questions related to the content of the video.
Your task is to analysis the frames carefully and provide a clear and concise judgement (yes/no) to each question based on the video frames.
For, each question, please provide a single sentence answer (format like "[Judgement], [Reason]") to the question based on the video frames' content.
All answers should be put in a list.
Please only output the list!

## Example 1
### Questions
1. Is the sky blue?
2. Is a dog visible?
### Output
["1. Yes, the sky is clearly blue in every frame.", "2. No, no dog appears in any frame."]

### Questions
{question_list}
### Output)";

const char* kJudgeEntailment = R"(Please objectively classify the relationship between each video caption breakdown and provided human-generated key points.
Analyze each breakdown point individually to determine its relationship with the human-generated key points.

For each breakdown point, classify the relationship into one of the following categories:
1. "entailment" means that the breakdown point is accurately reflected within one or more of the human-generated key points.
2. "contradiction" means that some detail in the breakdown point contradicts with the infomation mentioned human-generated key points.
3. "neutral" means that the relationship is neither "entailment" nor "contradiction".

For each breakdown point, provide a brief analysis explaining the reasoning behind your judgment.

Please present the result in a JSON dict format: {"breakdown_point_1": {"judgement": judgement_1, "analysis": analysis_1}, ..., "breakdown_point_n": {"judgement": judgement_n, "analysis": analysis_n}}.

### Human-Generated Video Key Points:
{key_points}

### LMM Caption Breakdown Point to Evaluate:
{breakdown_points}

### Result:)";

const char* kFilterKp = R"(You are given a list of key points describing a video.
Your task is to filter out key points that are too subjective, too minor, too general, or express speculation.
Additionally, any key points related to the historical background or cultural context of the video should also be filtered out, as they are not directly relevant to the video content.

For each key point, output the judgement "yes" if it should be kept, or "no" if it should be filtered out. Also output a reason for your judgement.

Criteria for filtering:
1. Subjective: Key points that rely heavily on personal feelings or interpretations.
2. Minor: Key points that are overly detailed and do not add significant value to the overall description.
3. General: Key points that are too broad and do not provide specific information about the video.
4. Speculative: Key points that express guesses or assumptions rather than concrete information.
5. Historical/Cultural: Key points that relate to the historical background or cultural context of the video.

For clarity, consider these examples:

## Example 1
### Key Points
1. These people could be tourists or travelers visiting the site.
2. A red kite flies above the beach.
### Output
1. "[No] Speculative."
2. "[Yes] Concrete visual fact."

With these examples in mind, please help me filter out key points that are too subjective, too minor, too general, or express speculation.

### Key Points
{key_points}
### Output)";

const char* kParaphraseKp = R"(You are an experienced linguist, please help me rewrite the {sentence_num} sentences, requiring the semantics to remain unchanged, and not adding or removing any details.
All rewrited sentences should be put in a list. Please only output the list!

## Sentences:
["1. sentence1","2. sentence2","3. sentence3"]
## Output:
["1. rewrited sentence1","2. rewrited sentence2","3. rewrited sentence3"]

## Sentences:
{sentences}
## Output:)";

const char* kScreenVideo = R"(Please evaluate the given video according to the given video content and corresponding caption to determine if it meets the following criteria:

1. The video must have a clear subject (e.g., person, animal, object, etc.).
2. The video should not contain a lot of special effects.
3. The video cannot contain long still clips.
4. The video must not be confused, unclear meaning.

If the video meets all the criteria, output [yes]; if it fails to meet any of the criteria, output [no]. The input format is:
"Judgment: [yes/no] Reason: [Brief explanation]"

Please provide your judgment and briefly explain the reason.

### Caption
{caption})";

const char* kThoughtProcess = R"(You are tasked with generating a structured internal thought process that explains how you analyze and describe a video. The goal is to demonstrate a step-by-step reasoning process, gradually refining the observations based on provided key points.

Formatting Requirements:
1. Your thought process should be enclosed within <thought> ... </thought> tags.
2. Your thought should contain the provided "Overall Description" and all (Observation,Key Point) pairs.
3. The reasoning should be sequential and structured, mimicking a natural process of observation and refinement.

Now, please help me integrate the following 'Overall Description' and multiple 'Observation - Key Point' pairs into a complete internal thought process.

### Input:
Overall Description:
{overall_description}

{observation_kp_pairs}

### Expected Output:)";

const char* kCaptionFromThought =
    "According to the reasoning thought, describe the video in detail.\n{thought}";

const char* kEvalCaptionDefault = "Please describe the video in detail.";

const char* kEvalCaptionVila =
    "Elaborate on the visual and narrative elements of the video in detail.";

const char* kEvalCaptionPllava = R"(You are to assist me in accomplishing a task about the input video. Reply to me with a precise yet detailed response. For how you would succeed in the recaptioning task, read the following Instructions section and Then, make your response with a elaborate paragraph.
# Instructions
1. Avoid providing over detailed information such as color, counts of any objects as you are terrible regarding observing these details
2. Instead, you should carefully go over the provided video and reason about key information about the overall video
3. If you are not sure about something, do not include it in you response.
# Task
Describe the background, characters and the actions in the provided video.
)";

}  // namespace

PromptLibrary::PromptLibrary() {
    using namespace prompt_names;
    templates_ = {
        {a1_overall, kA1Overall},
        {a2_stage1, kA2Stage1},
        {a2_focus_clause, kA2FocusClause},
        {a2_stage2_extract, kA2Stage2Extract},
        {a3_temporal, kA3Temporal},
        {a4_spatial, kA4Spatial},
        {a5_background, kA5Background},
        {a6_camera, kA6Camera},
        {reference_block, kReferenceBlock},
        {history_kps_block, kHistoryKpsBlock},
        {extract_kp, kExtractKp},
        {categorize_kp, kCategorizeKp},
        {generate_questions, kGenerateQuestions},
        {answer_questions, kAnswerQuestions},
        {judge_entailment, kJudgeEntailment},
        {filter_kp, kFilterKp},
        {paraphrase_kp, kParaphraseKp},
        {screen_video, kScreenVideo},
        {thought_process, kThoughtProcess},
        {caption_from_thought, kCaptionFromThought},
        {eval_caption_default, kEvalCaptionDefault},
        {eval_caption_vila, kEvalCaptionVila},
        {eval_caption_pllava, kEvalCaptionPllava},
    };
}

void PromptLibrary::load_overrides(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (dir.empty() || !fs::exists(dir)) return;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        const std::string name = entry.path().stem().string();
        if (templates_.count(name)) {
            templates_[name] = read_text_file(entry.path());
        }
    }
}

const std::string& PromptLibrary::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw std::runtime_error("unknown prompt template: " + std::string(name));
    }
    return it->second;
}

std::string PromptLibrary::fill(std::string templ,
                                const std::vector<std::pair<std::string, std::string>>& slots) {
    for (const auto& [name, value] : slots) {
        const std::string token = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = templ.find(token, pos)) != std::string::npos) {
            templ.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return templ;
}

}  // namespace autocap
