// SPDX-License-Identifier: Apache-2.0
#include "audioqa/evidence.hpp"

#include <sstream>

namespace audioqa {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string to_string(EvidenceSource s) {
    switch (s) {
        case EvidenceSource::InitialCaption: return "InitialCaption";
        case EvidenceSource::AudioQA: return "AudioQA";
        case EvidenceSource::GuidedRecaption: return "GuidedRecaption";
        case EvidenceSource::ASR: return "ASR";
    }
    throw Error("unknown evidence source");
}

EvidenceSource evidence_source_from_string(const std::string& s) {
    if (s == "InitialCaption") return EvidenceSource::InitialCaption;
    if (s == "AudioQA") return EvidenceSource::AudioQA;
    if (s == "GuidedRecaption") return EvidenceSource::GuidedRecaption;
    if (s == "ASR") return EvidenceSource::ASR;
    throw Error("unknown evidence source: " + s);
}

EvidenceDocument EvidenceDocument::from_caption(std::string caption) {
    if (trim(caption).empty()) throw EmptyCaption{};
    EvidenceDocument doc;
    doc.items_.push_back(EvidenceItem{
        .ordinal = 0,
        .source = EvidenceSource::InitialCaption,
        .content = std::move(caption),
        .iteration = 0,
        .provenance = "",
    });
    return doc;
}

EvidenceDocument EvidenceDocument::integrate(EvidenceItem item) const {
    if (item.source == EvidenceSource::InitialCaption) throw InvalidSource{};
    if (trim(item.content).empty()) throw EmptyEvidence{};
    EvidenceDocument out = *this;
    item.ordinal = static_cast<int>(out.items_.size());
    out.items_.push_back(std::move(item));
    return out;
}

std::string EvidenceDocument::render() const {
    std::ostringstream os;
    for (size_t k = 0; k < items_.size(); ++k) {
        if (k > 0) os << "\n\n";
        const auto& e = items_[k];
        os << "[" << e.ordinal << " | " << to_string(e.source) << " | iter " << e.iteration << "] "
           << e.content;
    }
    return os.str();
}

nlohmann::json EvidenceDocument::to_json() const {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& e : items_) items.push_back(audioqa::to_json(e));
    return nlohmann::json{{"items", std::move(items)}};
}

EvidenceDocument EvidenceDocument::from_json(const nlohmann::json& j) {
    EvidenceDocument doc;
    for (const auto& e : j.at("items")) doc.items_.push_back(evidence_item_from_json(e));
    if (doc.items_.empty()) throw Error("document has no items");
    if (doc.items_[0].source != EvidenceSource::InitialCaption)
        throw Error("document must start with an InitialCaption item");
    for (size_t k = 0; k < doc.items_.size(); ++k)
        if (doc.items_[k].ordinal != static_cast<int>(k)) throw Error("ordinal mismatch in document");
    return doc;
}

AnalysisHistory AnalysisHistory::append(int iteration, std::string gap_analysis) const {
    if (!entries_.empty() && iteration <= entries_.back().iteration)
        throw Error("history iterations must be strictly increasing");
    AnalysisHistory out = *this;
    out.entries_.push_back(AnalysisEntry{iteration, std::move(gap_analysis)});
    return out;
}

std::string AnalysisHistory::render() const {
    if (entries_.empty()) return "(no prior analysis)";
    std::ostringstream os;
    for (size_t k = 0; k < entries_.size(); ++k) {
        if (k > 0) os << "\n";
        os << "iteration " << entries_[k].iteration << ": " << entries_[k].gap_analysis;
    }
    return os.str();
}

nlohmann::json AnalysisHistory::to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : entries_)
        entries.push_back({{"iteration", e.iteration}, {"gap_analysis", e.gap_analysis}});
    return nlohmann::json{{"entries", std::move(entries)}};
}

AnalysisHistory AnalysisHistory::from_json(const nlohmann::json& j) {
    AnalysisHistory h;
    for (const auto& e : j.at("entries"))
        h.entries_.push_back(
            AnalysisEntry{e.at("iteration").get<int>(), e.at("gap_analysis").get<std::string>()});
    return h;
}

nlohmann::json to_json(const AudioRef& a) {
    nlohmann::json j{{"uri", a.uri}, {"media_type", a.media_type}};
    if (a.duration_s) j["duration_s"] = *a.duration_s;
    return j;
}

AudioRef audio_ref_from_json(const nlohmann::json& j) {
    AudioRef a;
    a.uri = j.at("uri").get<std::string>();
    a.media_type = j.value("media_type", "");
    if (j.contains("duration_s") && !j["duration_s"].is_null())
        a.duration_s = j["duration_s"].get<double>();
    if (a.uri.empty()) throw Error("AudioRef.uri is empty");
    if (a.duration_s && *a.duration_s < 0) throw Error("AudioRef.duration_s is negative");
    return a;
}

nlohmann::json to_json(const Question& q) {
    return nlohmann::json{{"text", q.text}, {"choices", q.choices}, {"metadata", q.metadata}};
}

Question question_from_json(const nlohmann::json& j) {
    Question q;
    q.text = j.at("text").get<std::string>();
    q.choices = j.at("choices").get<std::vector<std::string>>();
    if (j.contains("metadata")) q.metadata = j["metadata"].get<std::map<std::string, std::string>>();
    if (q.choices.size() < 2) throw Error("question needs at least 2 choices");
    for (size_t a = 0; a < q.choices.size(); ++a)
        for (size_t b = a + 1; b < q.choices.size(); ++b)
            if (trim(q.choices[a]) == trim(q.choices[b])) throw Error("duplicate choices");
    return q;
}

nlohmann::json to_json(const EvidenceItem& e) {
    return nlohmann::json{
        {"ordinal", e.ordinal},
        {"source", to_string(e.source)},
        {"content", e.content},
        {"iteration", e.iteration},
        {"provenance", e.provenance},
    };
}

EvidenceItem evidence_item_from_json(const nlohmann::json& j) {
    EvidenceItem e;
    e.ordinal = j.at("ordinal").get<int>();
    e.source = evidence_source_from_string(j.at("source").get<std::string>());
    e.content = j.at("content").get<std::string>();
    e.iteration = j.at("iteration").get<int>();
    e.provenance = j.value("provenance", "");
    if (e.content.empty()) throw Error("evidence content is empty");
    return e;
}

} // namespace audioqa
