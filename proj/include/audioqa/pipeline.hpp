// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "audioqa/agents.hpp"

namespace audioqa {

struct PipelineConfig {
    int max_iterations = 3;
    bool write_traces = false;
    std::filesystem::path trace_dir;
    // experiment knobs, both off by default: whether the answering agent
    // sees the gap-analysis history, and whether a Sufficient verdict may
    // still extend it
    bool answer_sees_history = false;

    void validate() const;
};

struct IterationRecord {
    int iteration = 0; // 1-based loop index
    SufficiencyVerdict verdict;
    bool plan_parse_failed = false;
    std::optional<AugmentationPlan> plan;
    bool interact_fallback = false;
    std::optional<EvidenceItem> evidence;
    bool tool_failed = false;

    [[nodiscard]] nlohmann::json to_json() const;
};

struct PipelineTrace {
    std::string sample_id;
    std::string initial_caption;
    bool caption_failed = false;
    std::vector<IterationRecord> iterations;
    std::optional<EvidenceDocument> final_document;
    FinalAnswer final_answer;
    bool degraded = false;
    std::vector<std::string> degradations;
    std::vector<std::string> notes; // non-degrading observations, e.g. confidence clamping
    int plan_calls = 0;
    int interact_calls = 0;
    int augment_calls = 0;
    std::vector<BackendCallRecord> backend_calls;
    double wall_ms = 0.0;

    [[nodiscard]] nlohmann::json to_json() const;
};

struct PipelineResult {
    FinalAnswer answer;
    PipelineTrace trace;
};

/// One refinement run: caption, then up to max_iterations plan/interact/
/// augment cycles with break-on-sufficient, then the answering agent over
/// the final document. Total by construction: every failure mode degrades
/// into a valid FinalAnswer.
PipelineResult run_pipeline(const AudioRef& audio, const Question& q, const BackendSet& backends,
                            const PromptLibrary& prompts, const PipelineConfig& cfg,
                            const std::string& sample_id = "sample");

/// Strips timing fields (latency_ms, wall_ms) everywhere in a trace JSON,
/// for replay comparisons.
nlohmann::json redact_timing(nlohmann::json j);

void write_trace_file(const PipelineTrace& trace, const std::filesystem::path& dir);

} // namespace audioqa
