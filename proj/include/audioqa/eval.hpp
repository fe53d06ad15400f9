// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "audioqa/pipeline.hpp"

namespace audioqa {

struct BenchmarkSample {
    std::string id;
    AudioRef audio;
    Question question;
    std::string ground_truth;
    int ground_truth_index = 0;
    std::string category;   // sound | music | speech | sound-music | ...
    std::string difficulty; // easy | medium | hard | empty

    [[nodiscard]] nlohmann::json to_json() const;
};

struct RejectedLine {
    int line_number = 0;
    std::string reason;
};

struct DatasetLoadResult {
    std::vector<BenchmarkSample> samples;
    std::vector<RejectedLine> rejected;
};

/// JSONL loader: one sample object per line with fields
/// {id, audio, media_type, question, choices, answer, category, difficulty}.
/// Invalid lines go to the rejection report; duplicate ids are an error.
DatasetLoadResult load_dataset(const std::filesystem::path& path);

struct SampleResult {
    std::string id;
    std::string raw;
    std::optional<int> matched_index;
    std::optional<int> normalized_index;
    bool correct = false;
    bool degraded = false;
    int iterations_used = 0;

    [[nodiscard]] nlohmann::json to_json() const;
    static SampleResult from_json(const nlohmann::json& j);
};

/// Deterministic matching cascade over a raw model answer:
///   1. exact case-insensitive match against a choice
///   2. a unique choice contained in the raw text as a whole phrase
///      (two or more contained choices is ambiguous: no match)
///   3. a trailing option-letter pattern ("answer is C", "(C)", "C." at end)
/// Never guesses: anything else is no-match.
std::optional<int> match_answer(const std::string& raw, const std::vector<std::string>& choices);

/// LLM post-processing of a raw answer onto the choice list; applied only
/// when match_answer fails. Backend errors and out-of-range letters map to
/// no-match.
std::optional<int> normalize_with_llm(Backend& chat, const PromptLibrary& prompts,
                                      const std::string& raw,
                                      const std::vector<std::string>& choices);

struct Cell {
    int total = 0;
    int raw_correct = 0;
    int post_correct = 0;

    [[nodiscard]] std::optional<double> raw_accuracy() const;
    [[nodiscard]] std::optional<double> post_accuracy() const;
};

struct AggregateReport {
    Cell overall;
    std::map<std::string, Cell> by_category;
    std::map<std::string, Cell> by_difficulty;

    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] std::string to_markdown() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Folds results into per-category/per-difficulty raw and post-processed
/// accuracies. Categories present in `samples` appear even with no results
/// (0/0 cells). A result whose id has no sample is an IdMismatch.
AggregateReport score(const std::vector<SampleResult>& results,
                      const std::vector<BenchmarkSample>& samples);

struct EvalOptions {
    PipelineConfig pipeline;
    int workers = 4;
    bool normalize = true; // LLM post-processing of unmatched answers
};

/// Runs the pipeline over every sample (bounded worker pool) and scores
/// the answers. Per-sample failures degrade, they never abort the batch.
std::vector<SampleResult> evaluate_samples(const std::vector<BenchmarkSample>& samples,
                                           const BackendSet& backends,
                                           const PromptLibrary& prompts, const EvalOptions& opts);

struct BaselineReport {
    AggregateReport report;
    double analytic_expectation_pct = 0.0; // mean over samples of 100 / |choices|
    double empirical_pct = 0.0;
};

/// Seeded uniform random guessing over each sample's choice list.
BaselineReport random_baseline(const std::vector<BenchmarkSample>& samples, uint64_t seed);

/// Full-pipeline evaluation at each iteration budget. The factory supplies
/// fresh backends per budget so scripted mocks replay from the start.
std::vector<std::pair<int, AggregateReport>> sweep_iterations(
    const std::vector<BenchmarkSample>& samples, const std::function<BackendSet()>& make_backends,
    const PromptLibrary& prompts, const EvalOptions& base_opts, const std::vector<int>& budgets);

void write_results_file(const std::vector<SampleResult>& results,
                        const std::filesystem::path& path);
std::vector<SampleResult> read_results_file(const std::filesystem::path& path);

} // namespace audioqa
