// SPDX-License-Identifier: Apache-2.0
#include "audioqa/pipeline.hpp"

#include <chrono>
#include <fstream>

namespace audioqa {

void PipelineConfig::validate() const {
    if (max_iterations < 0 || max_iterations > 16)
        throw Error("max_iterations must be in [0, 16]");
}

nlohmann::json IterationRecord::to_json() const {
    return nlohmann::json{
        {"iteration", iteration},
        {"verdict", verdict.to_json()},
        {"plan_parse_failed", plan_parse_failed},
        {"plan", plan ? plan->to_json() : nlohmann::json(nullptr)},
        {"interact_fallback", interact_fallback},
        {"evidence", evidence ? audioqa::to_json(*evidence) : nlohmann::json(nullptr)},
        {"tool_failed", tool_failed},
    };
}

nlohmann::json PipelineTrace::to_json() const {
    nlohmann::json its = nlohmann::json::array();
    for (const auto& it : iterations) its.push_back(it.to_json());
    nlohmann::json calls = nlohmann::json::array();
    for (const auto& c : backend_calls) calls.push_back(c.to_json());
    return nlohmann::json{
        {"sample_id", sample_id},
        {"initial_caption", initial_caption},
        {"caption_failed", caption_failed},
        {"iterations", std::move(its)},
        {"final_document", final_document ? final_document->to_json() : nlohmann::json(nullptr)},
        {"final_answer", final_answer.to_json()},
        {"degraded", degraded},
        {"degradations", degradations},
        {"notes", notes},
        {"counts",
         {{"plan_calls", plan_calls},
          {"interact_calls", interact_calls},
          {"augment_calls", augment_calls}}},
        {"backend_calls", std::move(calls)},
        {"wall_ms", wall_ms},
    };
}

nlohmann::json redact_timing(nlohmann::json j) {
    if (j.is_object()) {
        j.erase("latency_ms");
        j.erase("wall_ms");
        for (auto& [key, value] : j.items()) value = redact_timing(std::move(value));
    } else if (j.is_array()) {
        for (auto& value : j) value = redact_timing(std::move(value));
    }
    return j;
}

namespace {

std::string tool_capability(ToolAction a) {
    switch (a) {
        case ToolAction::AudioQA: return "audio_qa";
        case ToolAction::GuidedRecaption: return "audio_caption";
        case ToolAction::ASR: return "transcribe";
    }
    return "unknown";
}

} // namespace

PipelineResult run_pipeline(const AudioRef& audio, const Question& q, const BackendSet& backends,
                            const PromptLibrary& prompts, const PipelineConfig& cfg,
                            const std::string& sample_id) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    PipelineTrace trace;
    trace.sample_id = sample_id;
    Backend::CallCapture capture(trace.backend_calls);

    auto degrade = [&](std::string note) {
        trace.degraded = true;
        trace.degradations.push_back(std::move(note));
    };
    auto finish = [&](FinalAnswer answer) {
        trace.final_answer = answer;
        trace.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                  t0)
                            .count();
        if (cfg.write_traces) write_trace_file(trace, cfg.trace_dir);
        return PipelineResult{std::move(answer), std::move(trace)};
    };

    EvidenceItem caption;
    try {
        caption = caption_agent(*backends.allm, audio);
    } catch (const Error& e) {
        trace.caption_failed = true;
        degrade(std::string("caption failed: ") + e.what());
        FinalAnswer fallback;
        fallback.selected_index = 0;
        fallback.confidence = 0.0;
        fallback.rationale = "(captioning failed; no evidence was gathered)";
        fallback.degraded = true;
        fallback.raw_text = q.choices.at(0);
        return finish(std::move(fallback));
    }

    trace.initial_caption = caption.content;
    EvidenceDocument doc = EvidenceDocument::from_caption(caption.content);
    AnalysisHistory hist;

    for (int i = 1; i <= cfg.max_iterations; ++i) {
        IterationRecord rec;
        rec.iteration = i;

        ++trace.plan_calls;
        bool sufficient = false;
        try {
            PlanResult pr = plan_agent(*backends.llm, prompts, q, doc, hist, i);
            rec.verdict = pr.verdict;
            hist = pr.history;
            sufficient = pr.verdict.status == Sufficiency::Sufficient;
        } catch (const PlanParseFailure& e) {
            rec.plan_parse_failed = true;
            rec.verdict.status = Sufficiency::Sufficient; // proceed-to-answer default
            degrade(std::string("plan parse failure at iteration ") + std::to_string(i) + ": " +
                    e.what());
            sufficient = true;
        }
        if (sufficient) {
            trace.iterations.push_back(std::move(rec));
            break;
        }

        ++trace.interact_calls;
        AugmentationPlan plan;
        try {
            plan = interact_agent(*backends.llm, prompts, doc, hist).plan;
        } catch (const InteractParseFailure& e) {
            plan.action = ToolAction::ASR;
            plan.rationale = "(fallback after interaction parse failure)";
            rec.interact_fallback = true;
            degrade(std::string("interact parse failure at iteration ") + std::to_string(i) +
                    ": " + e.what());
        }
        rec.plan = plan;

        ++trace.augment_calls;
        EvidenceItem item;
        try {
            item = augment_agent(backends, plan, audio, i);
        } catch (const Error& e) {
            item.source = plan.action == ToolAction::AudioQA        ? EvidenceSource::AudioQA
                          : plan.action == ToolAction::GuidedRecaption
                              ? EvidenceSource::GuidedRecaption
                              : EvidenceSource::ASR;
            item.iteration = i;
            item.content = "(tool failed: " + tool_capability(plan.action) + ")";
            item.provenance = "error: " + std::string(e.what());
            rec.tool_failed = true;
            degrade(std::string("tool failure at iteration ") + std::to_string(i) + ": " +
                    e.what());
        }
        doc = doc.integrate(item);
        rec.evidence = doc.items().back();
        trace.iterations.push_back(std::move(rec));
    }

    trace.final_document = doc;
    AnswerResult ar = answer_agent(*backends.llm, prompts, doc, q,
                                   cfg.answer_sees_history ? &hist : nullptr);
    for (const auto& n : ar.notes) trace.notes.push_back(n);
    if (ar.answer.degraded) degrade("answer fallback engaged");
    return finish(std::move(ar.answer));
}

void write_trace_file(const PipelineTrace& trace, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (trace.sample_id + ".trace.json");
    std::ofstream out(path);
    if (!out) throw Error("cannot write trace file: " + path.string());
    out << trace.to_json().dump(2) << "\n";
}

} // namespace audioqa
