// SPDX-License-Identifier: Apache-2.0
#include "audioqa/mock_backend.hpp"

#include <fstream>

namespace audioqa {

MockBackend::MockBackend(BackendConfig cfg, const nlohmann::json& script)
    : Backend(std::move(cfg)) {
    if (!script.is_array()) throw Error("mock script must be a JSON array");
    for (const auto& j : script) {
        Entry e;
        e.capability = j.at("capability").get<std::string>();
        if (j.contains("match_keys") && !j["match_keys"].is_null())
            e.match_keys = j["match_keys"].get<std::vector<std::string>>();
        if (j.contains("response")) {
            if (j["response"].is_array())
                e.responses = j["response"].get<std::vector<std::string>>();
            else
                e.responses.push_back(j["response"].get<std::string>());
        }
        e.fail_remaining = j.value("fail_times", 0);
        e.error = j.value("error", "");
        if (e.error.empty() && e.responses.empty())
            throw Error("mock script entry needs a response or an error");
        entries_.push_back(std::move(e));
    }
}

std::shared_ptr<MockBackend> MockBackend::from_file(BackendConfig cfg,
                                                    const std::filesystem::path& script_path) {
    std::ifstream in(script_path);
    if (!in) throw Error("cannot open mock script: " + script_path.string());
    return std::make_shared<MockBackend>(std::move(cfg), nlohmann::json::parse(in));
}

std::string MockBackend::serve(const std::string& capability, const std::string& key) {
    std::lock_guard lk(script_mu_);
    for (auto& e : entries_) {
        if (e.capability != capability) continue;
        bool all = true;
        for (const auto& k : e.match_keys)
            if (key.find(k) == std::string::npos) {
                all = false;
                break;
            }
        if (!all) continue;

        if (e.error == "audio_unavailable") throw AudioUnavailable("mock: audio unavailable");
        if (e.error == "auth") throw AuthError("mock: auth rejected");
        if (e.error == "transport") throw TransientError("mock: transport failure");
        if (!e.error.empty()) throw Error("mock: unknown scripted error: " + e.error);

        if (e.fail_remaining > 0) {
            --e.fail_remaining;
            throw TransientError("mock: scripted transient failure");
        }
        const std::string& out = e.responses[std::min(e.cursor, e.responses.size() - 1)];
        ++e.cursor;
        return out;
    }
    throw Error("mock: no script entry matches " + capability + " call: " + key);
}

std::string MockBackend::chat_once(const ChatRequest& req) {
    return serve("chat", req.messages.back().content);
}

std::string MockBackend::audio_caption_once(const AudioRef& audio,
                                            const std::optional<std::string>& instruction) {
    return serve("audio_caption", audio.uri + (instruction ? " | " + *instruction : ""));
}

std::string MockBackend::audio_qa_once(const AudioRef& audio, const std::string& query) {
    return serve("audio_qa", audio.uri + " | " + query);
}

std::string MockBackend::transcribe_once(const AudioRef& audio) {
    return serve("transcribe", audio.uri);
}

} // namespace audioqa
