// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "audioqa/backend.hpp"
#include "audioqa/evidence.hpp"
#include "audioqa/prompts.hpp"

namespace audioqa {

enum class Sufficiency { Sufficient, Insufficient };

struct SufficiencyVerdict {
    Sufficiency status = Sufficiency::Insufficient;
    std::string gap_analysis; // required when Insufficient, empty when Sufficient

    [[nodiscard]] nlohmann::json to_json() const;
};

enum class ToolAction { AudioQA, GuidedRecaption, ASR };

std::string to_string(ToolAction a);

struct Segment {
    double start_s = 0;
    double end_s = 0;
};

struct AugmentationPlan {
    ToolAction action = ToolAction::ASR;
    std::string query;               // AudioQA only
    std::string focus;               // GuidedRecaption only
    std::optional<Segment> segment;  // ASR only
    std::string rationale;

    [[nodiscard]] nlohmann::json to_json() const;
};

struct FinalAnswer {
    int selected_index = 0;
    double confidence = 0.0;
    std::string rationale;
    bool degraded = false;
    // the text scored by the eval harness: the chosen option when parsing
    // succeeded, the raw model reply otherwise
    std::string raw_text;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// The model backends one pipeline talks to. In mock mode all three may
/// point at the same scripted instance.
struct BackendSet {
    std::shared_ptr<Backend> llm;  // planning / interaction / answering
    std::shared_ptr<Backend> allm; // captioning and audio QA
    std::shared_ptr<Backend> asr;  // transcription
};

struct PlanResult {
    SufficiencyVerdict verdict;
    AnalysisHistory history;
    int attempts = 1;
};

struct InteractResult {
    AugmentationPlan plan;
    int attempts = 1;
};

struct AnswerResult {
    FinalAnswer answer;
    std::string raw_reply;
    std::vector<std::string> notes; // e.g. confidence clamping
    int attempts = 1;
};

/// Finds the first JSON object embedded in a model reply (code fences and
/// surrounding prose are tolerated). Empty optional when none parses.
std::optional<nlohmann::json> extract_json_object(const std::string& text);

std::string format_choices(const std::vector<std::string>& choices);
char choice_letter(int index);

EvidenceItem caption_agent(Backend& allm, const AudioRef& audio);

/// Throws PlanParseFailure after re-asks are exhausted; the orchestrator
/// maps that to Sufficient-by-default and flags the trace.
PlanResult plan_agent(Backend& llm, const PromptLibrary& prompts, const Question& q,
                      const EvidenceDocument& doc, const AnalysisHistory& hist, int iteration);

/// Throws InteractParseFailure after re-asks are exhausted; the
/// orchestrator falls back to an ASR plan.
InteractResult interact_agent(Backend& llm, const PromptLibrary& prompts,
                              const EvidenceDocument& doc, const AnalysisHistory& hist);

EvidenceItem augment_agent(const BackendSet& backends, const AugmentationPlan& plan,
                           const AudioRef& audio, int iteration);

/// Total: parse failures and backend errors fall back to the first choice
/// with confidence 0 and degraded = true. `hist` is normally null; passing
/// it appends the gap-analysis history to the evidence shown to the agent.
AnswerResult answer_agent(Backend& llm, const PromptLibrary& prompts, const EvidenceDocument& doc,
                          const Question& q, const AnalysisHistory* hist = nullptr);

constexpr int kAgentParseReasks = 2; // re-asks after the first attempt

} // namespace audioqa
