// SPDX-License-Identifier: Apache-2.0
#include "audioqa/backend.hpp"

#include <chrono>
#include <random>
#include <thread>

namespace audioqa {

void BackendConfig::validate() const {
    if (timeout_s <= 0) throw Error("timeout_s must be positive");
    if (max_retries < 0 || max_retries > 10) throw Error("max_retries must be in [0, 10]");
    if (backoff_base_ms < 0) throw Error("backoff_base_ms must be non-negative");
    if (max_concurrent_requests < 1) throw Error("max_concurrent_requests must be positive");
}

nlohmann::json BackendCallRecord::to_json() const {
    return nlohmann::json{
        {"capability", capability}, {"request_summary", request_summary}, {"response", response},
        {"latency_ms", latency_ms}, {"attempts", attempts},              {"error", error},
    };
}

namespace {
thread_local std::vector<BackendCallRecord>* tls_capture_sink = nullptr;
} // namespace

Backend::CallCapture::CallCapture(std::vector<BackendCallRecord>& sink)
    : previous_(tls_capture_sink) {
    tls_capture_sink = &sink;
}

Backend::CallCapture::~CallCapture() { tls_capture_sink = previous_; }

Backend::Backend(BackendConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void Backend::acquire_slot() {
    std::unique_lock lk(mu_);
    slot_cv_.wait(lk, [&] { return in_flight_ < cfg_.max_concurrent_requests; });
    ++in_flight_;
}

void Backend::release_slot() {
    {
        std::lock_guard lk(mu_);
        --in_flight_;
    }
    slot_cv_.notify_one();
}

template <typename Fn>
std::string Backend::call_with_retry(const std::string& capability, const std::string& summary,
                                     Fn&& fn) {
    BackendCallRecord rec;
    rec.capability = capability;
    rec.request_summary = summary;
    const auto t0 = std::chrono::steady_clock::now();

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        rec.attempts = attempt + 1;
        acquire_slot();
        try {
            std::string out = fn();
            release_slot();
            rec.response = out;
            rec.latency_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
            if (tls_capture_sink) tls_capture_sink->push_back(rec);
            std::lock_guard lk(mu_);
            call_log_.push_back(rec);
            return out;
        } catch (const TransientError& e) {
            release_slot();
            last_error = e.what();
            if (attempt < cfg_.max_retries && cfg_.backoff_base_ms > 0) {
                static thread_local std::mt19937 jitter_rng{std::random_device{}()};
                const int base = cfg_.backoff_base_ms * (1 << std::min(attempt, 6));
                std::uniform_int_distribution<int> jitter(0, base);
                std::this_thread::sleep_for(std::chrono::milliseconds(base + jitter(jitter_rng)));
            }
        } catch (const Error& e) {
            release_slot();
            rec.error = e.what();
            rec.latency_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
            if (tls_capture_sink) tls_capture_sink->push_back(rec);
            {
                std::lock_guard lk(mu_);
                call_log_.push_back(rec);
            }
            throw;
        }
    }

    rec.error = "retries exhausted: " + last_error;
    rec.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (tls_capture_sink) tls_capture_sink->push_back(rec);
    {
        std::lock_guard lk(mu_);
        call_log_.push_back(rec);
    }
    throw TransportError(rec.error);
}

std::string Backend::chat(const ChatRequest& req) {
    if (req.messages.empty()) throw Error("chat request has no messages");
    if (req.messages.back().role != "user") throw Error("last chat message must be from user");
    const std::string summary = "chat: " + req.messages.back().content;
    return call_with_retry("chat", summary, [&] {
        std::string out = chat_once(req);
        if (trim(out).empty()) throw MalformedResponse("empty chat response");
        return out;
    });
}

std::string Backend::audio_caption(const AudioRef& audio,
                                   const std::optional<std::string>& instruction) {
    std::string summary = "audio_caption: " + audio.uri;
    if (instruction) summary += " | " + *instruction;
    return call_with_retry("audio_caption", summary, [&] {
        std::string out = audio_caption_once(audio, instruction);
        if (trim(out).empty()) throw MalformedResponse("empty caption response");
        return out;
    });
}

std::string Backend::audio_qa(const AudioRef& audio, const std::string& query) {
    if (trim(query).empty()) throw Error("audio_qa query is empty");
    const std::string summary = "audio_qa: " + audio.uri + " | " + query;
    return call_with_retry("audio_qa", summary, [&] {
        std::string out = audio_qa_once(audio, query);
        if (trim(out).empty()) throw MalformedResponse("empty audio_qa response");
        return out;
    });
}

std::string Backend::transcribe(const AudioRef& audio) {
    const std::string summary = "transcribe: " + audio.uri;
    return call_with_retry("transcribe", summary, [&] { return transcribe_once(audio); });
}

BackendConfig backend_config_from_json(const nlohmann::json& j) {
    BackendConfig cfg;
    cfg.endpoint_url = j.value("endpoint_url", "");
    cfg.model_id = j.value("model_id", "");
    cfg.api_key_env = j.value("api_key_env", "");
    cfg.timeout_s = j.value("timeout_s", 60.0);
    cfg.max_retries = j.value("max_retries", 3);
    cfg.backoff_base_ms = j.value("backoff_base_ms", 250);
    cfg.max_concurrent_requests = j.value("max_concurrent_requests", 8);
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const BackendConfig& cfg) {
    return nlohmann::json{
        {"endpoint_url", cfg.endpoint_url},
        {"model_id", cfg.model_id},
        {"api_key_env", cfg.api_key_env},
        {"timeout_s", cfg.timeout_s},
        {"max_retries", cfg.max_retries},
        {"backoff_base_ms", cfg.backoff_base_ms},
        {"max_concurrent_requests", cfg.max_concurrent_requests},
    };
}

} // namespace audioqa
