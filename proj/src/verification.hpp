#pragma once

#include <string>
#include <vector>

#include "keypoints.hpp"
#include "prompts.hpp"
#include "provider.hpp"

namespace autocap {

// Breaks a description into atomic key points: parses the "> point" lines
// of the extractor response. Points arrive with status unverified and ids
// video_id/node_id/index.
std::vector<KeyPoint> extract_key_points(const std::string& description,
                                         const std::string& video_id, int node_id,
                                         ProviderGateway& gateway, const PromptLibrary& prompts,
                                         const std::vector<std::string>& frames);

// Exactly one of the five labels. Unparseable classifier output retries
// once, then defaults to Object with the warning flag set.
void categorize_key_point(KeyPoint& kp, ProviderGateway& gateway, const PromptLibrary& prompts);

// At least one yes/no question per key point; multi-fact points yield more.
std::vector<VerificationQuestion> generate_questions(const KeyPoint& kp, ProviderGateway& gateway,
                                                     const PromptLibrary& prompts);

// Answers one node's questions in batches (both verifiers per batch, run
// concurrently) and adjudicates each key point. Provider errors become
// error verdicts, which fail the point.
void verify_node_key_points(std::vector<KeyPoint>& kps, const std::vector<std::string>& frames,
                            ProviderGateway& gateway, const PromptLibrary& prompts);

// Single-point convenience over the batch path.
KpStatus verify_key_point(KeyPoint& kp, const std::vector<std::string>& frames,
                          ProviderGateway& gateway, const PromptLibrary& prompts);

// Parses one verifier reply ("i. [Judgement], [Reason]" items, usually in a
// list) into per-question verdicts; anything malformed is an error verdict.
std::vector<std::pair<Verdict, std::string>> parse_verifier_reply(const std::string& reply,
                                                                  std::size_t question_count);

}  // namespace autocap
