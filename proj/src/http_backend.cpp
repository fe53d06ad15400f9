// SPDX-License-Identifier: Apache-2.0
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "audioqa/http_backend.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace audioqa {

namespace {

std::string base64_encode(const std::string& in) {
    static const char tbl[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 2 < in.size(); i += 3) {
        const unsigned v = (static_cast<unsigned char>(in[i]) << 16) |
                           (static_cast<unsigned char>(in[i + 1]) << 8) |
                           static_cast<unsigned char>(in[i + 2]);
        out += tbl[(v >> 18) & 63];
        out += tbl[(v >> 12) & 63];
        out += tbl[(v >> 6) & 63];
        out += tbl[v & 63];
    }
    if (i + 1 == in.size()) {
        const unsigned v = static_cast<unsigned char>(in[i]) << 16;
        out += tbl[(v >> 18) & 63];
        out += tbl[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == in.size()) {
        const unsigned v = (static_cast<unsigned char>(in[i]) << 16) |
                           (static_cast<unsigned char>(in[i + 1]) << 8);
        out += tbl[(v >> 18) & 63];
        out += tbl[(v >> 12) & 63];
        out += tbl[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw AudioUnavailable("cannot open audio file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

HttpBackend::HttpBackend(BackendConfig cfg) : Backend(std::move(cfg)) {
    const auto& url = cfg_.endpoint_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("endpoint_url must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        base_url_ = url;
    } else {
        base_url_ = url.substr(0, path_start);
        path_prefix_ = url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

std::string HttpBackend::api_key() const {
    if (cfg_.api_key_env.empty()) return "";
    const char* v = std::getenv(cfg_.api_key_env.c_str());
    if (!v || !*v) throw AuthError("credential env var not set: " + cfg_.api_key_env);
    return v;
}

std::string HttpBackend::post_json(const std::string& path, const nlohmann::json& body) {
    httplib::Client cli(base_url_);
    cli.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    cli.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    httplib::Headers headers;
    const std::string key = api_key();
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

    auto res = cli.Post(path_prefix_ + path, headers, body.dump(), "application/json");
    if (!res) throw TransientError("no response from " + base_url_ + path);
    if (res->status == 401 || res->status == 403)
        throw AuthError("backend rejected credentials (HTTP " + std::to_string(res->status) + ")");
    if (res->status == 429 || res->status >= 500)
        throw TransientError("HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);

    try {
        const auto j = nlohmann::json::parse(res->body);
        if (j.contains("choices"))
            return j["choices"].at(0).at("message").at("content").get<std::string>();
        if (j.contains("text")) return j["text"].get<std::string>();
        throw MalformedResponse("response lacks choices/text: " + res->body);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponse(std::string("unparseable response body: ") + e.what());
    }
}

std::string HttpBackend::chat_once(const ChatRequest& req) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : req.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});
    nlohmann::json body{
        {"model", cfg_.model_id},
        {"messages", std::move(messages)},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
    };
    if (req.want_json) body["response_format"] = {{"type", "json_object"}};
    return post_json("/chat/completions", body);
}

std::string HttpBackend::audio_chat(const AudioRef& audio, const std::string& prompt) {
    const std::string data = read_file(audio.uri);
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", prompt}});
    content.push_back({{"type", "input_audio"},
                       {"input_audio",
                        {{"data", base64_encode(data)},
                         {"format", audio.media_type.empty() ? "wav" : audio.media_type}}}});
    nlohmann::json body{
        {"model", cfg_.model_id},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::move(content)}}})},
        {"temperature", 0.2},
    };
    return post_json("/chat/completions", body);
}

std::string HttpBackend::audio_caption_once(const AudioRef& audio,
                                            const std::optional<std::string>& instruction) {
    std::string prompt = "Describe this audio clip in detail: the acoustic scene, events in "
                         "order, speech, music, and notable sounds.";
    if (instruction) prompt += " Pay particular attention to the following: " + *instruction;
    return audio_chat(audio, prompt);
}

std::string HttpBackend::audio_qa_once(const AudioRef& audio, const std::string& query) {
    return audio_chat(audio, "Answer this question about the audio clip: " + query);
}

std::string HttpBackend::transcribe_once(const AudioRef& audio) {
    const std::string data = read_file(audio.uri);
    httplib::Client cli(base_url_);
    cli.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    cli.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    httplib::Headers headers;
    const std::string key = api_key();
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

    httplib::MultipartFormDataItems items = {
        {"model", cfg_.model_id, "", ""},
        {"file", data, "audio." + (audio.media_type.empty() ? "wav" : audio.media_type),
         "application/octet-stream"},
    };
    auto res = cli.Post(path_prefix_ + "/audio/transcriptions", headers, items);
    if (!res) throw TransientError("no response from " + base_url_);
    if (res->status == 401 || res->status == 403) throw AuthError("backend rejected credentials");
    if (res->status == 429 || res->status >= 500)
        throw TransientError("HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
        return nlohmann::json::parse(res->body).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedResponse(std::string("unparseable transcription body: ") + e.what());
    }
}

} // namespace audioqa
