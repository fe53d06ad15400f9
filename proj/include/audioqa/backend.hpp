// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <condition_variable>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "audioqa/evidence.hpp"

namespace audioqa {

struct ChatMessage {
    std::string role; // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.2;
    int max_tokens = 1024;
    bool want_json = false;
};

struct BackendConfig {
    std::string endpoint_url;
    std::string model_id;
    std::string api_key_env;
    double timeout_s = 60.0;
    int max_retries = 3;
    int backoff_base_ms = 250;
    int max_concurrent_requests = 8;

    void validate() const;
};

struct BackendCallRecord {
    std::string capability; // chat | audio_caption | audio_qa | transcribe
    std::string request_summary;
    std::string response;
    double latency_ms = 0.0;
    int attempts = 0;
    std::string error;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Uniform access to the three external model capabilities. One
/// BackendCallRecord is appended to the call log per top-level call,
/// whatever the outcome. Transient failures (timeout, 429, 5xx) are
/// retried up to max_retries with exponential backoff and jitter.
class Backend {
  public:
    explicit Backend(BackendConfig cfg);
    virtual ~Backend() = default;

    std::string chat(const ChatRequest& req);
    std::string audio_caption(const AudioRef& audio, const std::optional<std::string>& instruction);
    std::string audio_qa(const AudioRef& audio, const std::string& query);
    std::string transcribe(const AudioRef& audio);

    [[nodiscard]] const std::vector<BackendCallRecord>& call_log() const { return call_log_; }
    [[nodiscard]] const BackendConfig& config() const { return cfg_; }

    /// Mirrors every record produced on the current thread into `sink`
    /// while alive. Lets a pipeline run attribute calls to its own trace
    /// even when backends are shared across threads.
    class CallCapture {
      public:
        explicit CallCapture(std::vector<BackendCallRecord>& sink);
        ~CallCapture();
        CallCapture(const CallCapture&) = delete;
        CallCapture& operator=(const CallCapture&) = delete;

      private:
        std::vector<BackendCallRecord>* previous_;
    };

  protected:
    // single attempts; throw TransientError to request a retry
    virtual std::string chat_once(const ChatRequest& req) = 0;
    virtual std::string audio_caption_once(const AudioRef& audio,
                                           const std::optional<std::string>& instruction) = 0;
    virtual std::string audio_qa_once(const AudioRef& audio, const std::string& query) = 0;
    virtual std::string transcribe_once(const AudioRef& audio) = 0;

    BackendConfig cfg_;

  private:
    template <typename Fn>
    std::string call_with_retry(const std::string& capability, const std::string& summary, Fn&& fn);

    void acquire_slot();
    void release_slot();

    std::mutex mu_;
    std::condition_variable slot_cv_;
    int in_flight_ = 0;
    std::vector<BackendCallRecord> call_log_;
};

BackendConfig backend_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BackendConfig& cfg);

} // namespace audioqa
