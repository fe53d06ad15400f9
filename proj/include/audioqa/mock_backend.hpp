// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>

#include "audioqa/backend.hpp"

namespace audioqa {

/// Deterministic scripted backend for tests and offline runs.
///
/// The script is a JSON list of entries:
///   { "capability": "chat" | "audio_caption" | "audio_qa" | "transcribe",
///     "match_keys": ["substring", ...],      // all must occur in the request summary
///     "response":  "text" or ["first", "second", ...],  // list is consumed in order,
///                                                        // last element repeats
///     "fail_times": 2,                        // transient failures before succeeding
///     "error": "audio_unavailable" | "auth" | "transport" }  // always fail this way
///
/// The first entry whose capability and match_keys fit the call is used.
/// A call no entry matches is an error; scripts are meant to be exhaustive.
class MockBackend : public Backend {
  public:
    explicit MockBackend(BackendConfig cfg, const nlohmann::json& script);
    static std::shared_ptr<MockBackend> from_file(BackendConfig cfg,
                                                  const std::filesystem::path& script_path);

  protected:
    std::string chat_once(const ChatRequest& req) override;
    std::string audio_caption_once(const AudioRef& audio,
                                   const std::optional<std::string>& instruction) override;
    std::string audio_qa_once(const AudioRef& audio, const std::string& query) override;
    std::string transcribe_once(const AudioRef& audio) override;

  private:
    struct Entry {
        std::string capability;
        std::vector<std::string> match_keys;
        std::vector<std::string> responses;
        int fail_remaining = 0;
        std::string error; // empty = none
        size_t cursor = 0;
    };

    std::string serve(const std::string& capability, const std::string& key);

    std::vector<Entry> entries_;
    std::mutex script_mu_;
};

} // namespace audioqa
