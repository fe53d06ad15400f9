// SPDX-License-Identifier: Apache-2.0
#include "audioqa/agents.hpp"

#include <algorithm>
#include <cctype>

namespace audioqa {

nlohmann::json SufficiencyVerdict::to_json() const {
    return nlohmann::json{
        {"status", status == Sufficiency::Sufficient ? "sufficient" : "insufficient"},
        {"gap_analysis", gap_analysis},
    };
}

std::string to_string(ToolAction a) {
    switch (a) {
        case ToolAction::AudioQA: return "audio_qa";
        case ToolAction::GuidedRecaption: return "recaption";
        case ToolAction::ASR: return "asr";
    }
    throw Error("unknown tool action");
}

nlohmann::json AugmentationPlan::to_json() const {
    nlohmann::json j{{"action", to_string(action)}, {"rationale", rationale}};
    if (action == ToolAction::AudioQA) j["query"] = query;
    if (action == ToolAction::GuidedRecaption) j["focus"] = focus;
    if (segment) j["segment"] = {{"start_s", segment->start_s}, {"end_s", segment->end_s}};
    return j;
}

nlohmann::json FinalAnswer::to_json() const {
    return nlohmann::json{
        {"selected_index", selected_index},
        {"confidence", confidence},
        {"rationale", rationale},
        {"degraded", degraded},
        {"raw_text", raw_text},
    };
}

std::optional<nlohmann::json> extract_json_object(const std::string& text) {
    const auto start = text.find('{');
    if (start == std::string::npos) return std::nullopt;
    // balanced-brace scan from each candidate opening brace
    for (size_t open = start; open != std::string::npos; open = text.find('{', open + 1)) {
        int depth = 0;
        bool in_string = false;
        for (size_t i = open; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    const auto candidate = text.substr(open, i - open + 1);
                    auto parsed = nlohmann::json::parse(candidate, nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

char choice_letter(int index) {
    if (index < 0 || index >= 26) throw Error("choice index out of letter range");
    return static_cast<char>('A' + index);
}

std::string format_choices(const std::vector<std::string>& choices) {
    std::string out;
    for (size_t i = 0; i < choices.size(); ++i) {
        if (i > 0) out += "\n";
        out += choice_letter(static_cast<int>(i));
        out += ". ";
        out += choices[i];
    }
    return out;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

ChatRequest make_request(const PromptTemplate& tpl,
                         const std::map<std::string, std::string>& bindings) {
    ChatRequest req;
    req.messages.push_back({"system", tpl.system_text});
    req.messages.push_back({"user", tpl.render_user(bindings)});
    req.want_json = true;
    return req;
}

std::optional<SufficiencyVerdict> parse_verdict(const std::string& reply) {
    const auto j = extract_json_object(reply);
    if (!j || !j->contains("status") || !(*j)["status"].is_string()) return std::nullopt;
    const std::string status = lower(trim((*j)["status"].get<std::string>()));
    SufficiencyVerdict v;
    if (status == "sufficient") {
        v.status = Sufficiency::Sufficient;
        return v;
    }
    if (status == "insufficient") {
        v.status = Sufficiency::Insufficient;
        if (!j->contains("gap_analysis") || !(*j)["gap_analysis"].is_string()) return std::nullopt;
        v.gap_analysis = trim((*j)["gap_analysis"].get<std::string>());
        if (v.gap_analysis.empty()) return std::nullopt;
        return v;
    }
    return std::nullopt;
}

std::optional<AugmentationPlan> parse_plan(const std::string& reply) {
    const auto j = extract_json_object(reply);
    if (!j || !j->contains("action") || !(*j)["action"].is_string()) return std::nullopt;
    const std::string action = lower(trim((*j)["action"].get<std::string>()));
    AugmentationPlan p;
    p.rationale = j->value("rationale", "");
    if (action == "audio_qa") {
        p.action = ToolAction::AudioQA;
        p.query = trim(j->value("query", ""));
        if (p.query.empty()) return std::nullopt;
    } else if (action == "recaption" || action == "guided_recaption") {
        p.action = ToolAction::GuidedRecaption;
        p.focus = trim(j->value("focus", ""));
        if (p.focus.empty()) return std::nullopt;
    } else if (action == "asr") {
        p.action = ToolAction::ASR;
        if (j->contains("segment") && (*j)["segment"].is_object()) {
            const auto& s = (*j)["segment"];
            if (!s.contains("start_s") || !s.contains("end_s")) return std::nullopt;
            Segment seg{s["start_s"].get<double>(), s["end_s"].get<double>()};
            if (seg.start_s < 0 || seg.start_s >= seg.end_s) return std::nullopt;
            p.segment = seg;
        }
    } else {
        return std::nullopt;
    }
    return p;
}

} // namespace

EvidenceItem caption_agent(Backend& allm, const AudioRef& audio) {
    const std::string caption = trim(allm.audio_caption(audio, std::nullopt));
    return EvidenceItem{
        .ordinal = 0,
        .source = EvidenceSource::InitialCaption,
        .content = caption,
        .iteration = 0,
        .provenance = "",
    };
}

PlanResult plan_agent(Backend& llm, const PromptLibrary& prompts, const Question& q,
                      const EvidenceDocument& doc, const AnalysisHistory& hist, int iteration) {
    const auto req = make_request(prompts.get("plan"), {
                                                           {"question", q.text},
                                                           {"choices", format_choices(q.choices)},
                                                           {"document", doc.render()},
                                                           {"history", hist.render()},
                                                       });
    for (int attempt = 0; attempt <= kAgentParseReasks; ++attempt) {
        const std::string reply = llm.chat(req);
        if (auto verdict = parse_verdict(reply)) {
            PlanResult out;
            out.verdict = std::move(*verdict);
            out.attempts = attempt + 1;
            out.history = out.verdict.status == Sufficiency::Insufficient
                              ? hist.append(iteration, out.verdict.gap_analysis)
                              : hist;
            return out;
        }
    }
    throw PlanParseFailure("planning agent produced no parseable verdict");
}

InteractResult interact_agent(Backend& llm, const PromptLibrary& prompts,
                              const EvidenceDocument& doc, const AnalysisHistory& hist) {
    if (hist.empty()) throw Error("interact_agent requires at least one gap analysis");
    const auto req = make_request(prompts.get("interact"), {
                                                               {"document", doc.render()},
                                                               {"history", hist.render()},
                                                           });
    for (int attempt = 0; attempt <= kAgentParseReasks; ++attempt) {
        const std::string reply = llm.chat(req);
        if (auto plan = parse_plan(reply)) {
            return InteractResult{std::move(*plan), attempt + 1};
        }
    }
    throw InteractParseFailure("interaction agent produced no parseable plan");
}

EvidenceItem augment_agent(const BackendSet& backends, const AugmentationPlan& plan,
                           const AudioRef& audio, int iteration) {
    EvidenceItem item;
    item.iteration = iteration;
    switch (plan.action) {
        case ToolAction::AudioQA:
            item.source = EvidenceSource::AudioQA;
            item.provenance = "query: " + plan.query;
            item.content = trim(backends.allm->audio_qa(audio, plan.query));
            break;
        case ToolAction::GuidedRecaption:
            item.source = EvidenceSource::GuidedRecaption;
            item.provenance = "focus: " + plan.focus;
            item.content = trim(backends.allm->audio_caption(audio, plan.focus));
            break;
        case ToolAction::ASR: {
            item.source = EvidenceSource::ASR;
            item.provenance = plan.segment
                                  ? "segment: [" + std::to_string(plan.segment->start_s) + ", " +
                                        std::to_string(plan.segment->end_s) + "]"
                                  : "full clip";
            std::string transcript = trim(backends.asr->transcribe(audio));
            // an empty transcript is a valid result for speech-free audio
            item.content = transcript.empty() ? "(no speech detected)" : std::move(transcript);
            break;
        }
    }
    return item;
}

AnswerResult answer_agent(Backend& llm, const PromptLibrary& prompts, const EvidenceDocument& doc,
                          const Question& q, const AnalysisHistory* hist) {
    AnswerResult out;
    std::string document = doc.render();
    if (hist && !hist->empty()) document += "\n\nGap-analysis history:\n" + hist->render();
    const auto req = make_request(prompts.get("answer"), {
                                                             {"question", q.text},
                                                             {"choices", format_choices(q.choices)},
                                                             {"document", std::move(document)},
                                                         });
    for (int attempt = 0; attempt <= kAgentParseReasks; ++attempt) {
        std::string reply;
        try {
            reply = llm.chat(req);
        } catch (const Error& e) {
            out.notes.push_back(std::string("answer backend error: ") + e.what());
            break;
        }
        out.raw_reply = reply;
        out.attempts = attempt + 1;
        const auto j = extract_json_object(reply);
        if (!j || !j->contains("answer_letter") || !(*j)["answer_letter"].is_string()) continue;
        const std::string letter_text = trim((*j)["answer_letter"].get<std::string>());
        if (letter_text.empty()) continue;
        const int index = std::toupper(static_cast<unsigned char>(letter_text[0])) - 'A';
        if (index < 0 || index >= static_cast<int>(q.choices.size())) continue;

        double confidence = 0.0;
        if (j->contains("confidence") && (*j)["confidence"].is_number())
            confidence = (*j)["confidence"].get<double>();
        if (confidence < 0.0 || confidence > 1.0) {
            out.notes.push_back("confidence clamped from " + std::to_string(confidence));
            confidence = std::clamp(confidence, 0.0, 1.0);
        }

        out.answer.selected_index = index;
        out.answer.confidence = confidence;
        out.answer.rationale = j->value("rationale", "");
        out.answer.degraded = false;
        out.answer.raw_text = q.choices[index];
        return out;
    }

    // fallback: first choice, zero confidence, visibly degraded
    out.answer.selected_index = 0;
    out.answer.confidence = 0.0;
    out.answer.rationale = "(answering agent output unparseable; fell back to first choice)";
    out.answer.degraded = true;
    out.answer.raw_text = out.raw_reply.empty() ? q.choices[0] : out.raw_reply;
    return out;
}

} // namespace audioqa
