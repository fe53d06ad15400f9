// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "audioqa/backend.hpp"

namespace audioqa {

/// OpenAI-compatible HTTP client. chat/audio_caption/audio_qa go through
/// POST {endpoint}/chat/completions; audio calls attach the file as a
/// base64 input_audio content part. transcribe uploads the file to
/// POST {endpoint}/audio/transcriptions.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(BackendConfig cfg);

  protected:
    std::string chat_once(const ChatRequest& req) override;
    std::string audio_caption_once(const AudioRef& audio,
                                   const std::optional<std::string>& instruction) override;
    std::string audio_qa_once(const AudioRef& audio, const std::string& query) override;
    std::string transcribe_once(const AudioRef& audio) override;

  private:
    std::string post_json(const std::string& path, const nlohmann::json& body);
    std::string audio_chat(const AudioRef& audio, const std::string& prompt);
    std::string api_key() const;

    std::string base_url_; // scheme://host[:port]
    std::string path_prefix_;
};

} // namespace audioqa
