// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "audioqa/errors.hpp"

namespace audioqa {

struct AudioRef {
    std::string uri;
    std::string media_type;
    std::optional<double> duration_s;
};

struct Question {
    std::string text;
    std::vector<std::string> choices;
    std::map<std::string, std::string> metadata;
};

enum class EvidenceSource { InitialCaption, AudioQA, GuidedRecaption, ASR };

std::string to_string(EvidenceSource s);
EvidenceSource evidence_source_from_string(const std::string& s);

struct EvidenceItem {
    int ordinal = 0;
    EvidenceSource source = EvidenceSource::InitialCaption;
    std::string content;
    int iteration = 0;
    // the tool request that produced this item (query / focus / segment spec);
    // empty for the initial caption
    std::string provenance;

    bool operator==(const EvidenceItem&) const = default;
};

/// The evolving evidence chain. Append-only: items are never reordered,
/// edited, or removed; ordinals are assigned on append.
class EvidenceDocument {
  public:
    static EvidenceDocument from_caption(std::string caption);

    /// Returns a new document with `item` appended at the next ordinal.
    /// The receiver is left untouched.
    [[nodiscard]] EvidenceDocument integrate(EvidenceItem item) const;

    /// Canonical textual form fed into agent prompts. Deterministic;
    /// appending an item appends exactly one section to the rendering.
    [[nodiscard]] std::string render() const;

    [[nodiscard]] const std::vector<EvidenceItem>& items() const { return items_; }
    [[nodiscard]] size_t size() const { return items_.size(); }

    bool operator==(const EvidenceDocument&) const = default;

    [[nodiscard]] nlohmann::json to_json() const;
    static EvidenceDocument from_json(const nlohmann::json& j);

  private:
    EvidenceDocument() = default;
    std::vector<EvidenceItem> items_;
};

struct AnalysisEntry {
    int iteration = 0;
    std::string gap_analysis;

    bool operator==(const AnalysisEntry&) const = default;
};

/// Gap-analysis history accumulated by the planning agent. Append-only,
/// iteration values strictly increasing.
class AnalysisHistory {
  public:
    AnalysisHistory() = default;

    [[nodiscard]] AnalysisHistory append(int iteration, std::string gap_analysis) const;

    [[nodiscard]] const std::vector<AnalysisEntry>& entries() const { return entries_; }
    [[nodiscard]] bool empty() const { return entries_.empty(); }

    [[nodiscard]] std::string render() const;

    bool operator==(const AnalysisHistory&) const = default;

    [[nodiscard]] nlohmann::json to_json() const;
    static AnalysisHistory from_json(const nlohmann::json& j);

  private:
    std::vector<AnalysisEntry> entries_;
};

nlohmann::json to_json(const AudioRef& a);
AudioRef audio_ref_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Question& q);
Question question_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvidenceItem& e);
EvidenceItem evidence_item_from_json(const nlohmann::json& j);

std::string trim(const std::string& s);

} // namespace audioqa
