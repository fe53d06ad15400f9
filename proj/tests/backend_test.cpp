// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "test_helpers.hpp"

using namespace audioqa;
using namespace audioqa::testing;

namespace {

ChatRequest simple_chat(const std::string& text) {
    ChatRequest req;
    req.messages.push_back({"user", text});
    return req;
}

} // namespace

TEST_CASE("mock chat passthrough records one attempt") {
    auto mock = make_mock(nlohmann::json::array({script_entry("chat", {"ping"}, "OK")}));
    CHECK(mock->chat(simple_chat("ping")) == "OK");
    REQUIRE(mock->call_log().size() == 1);
    CHECK(mock->call_log()[0].attempts == 1);
    CHECK(mock->call_log()[0].capability == "chat");
    CHECK(mock->call_log()[0].error.empty());
}

TEST_CASE("two scripted failures then success cost three attempts") {
    auto mock = make_mock(nlohmann::json::array({script_entry("chat", {"ping"}, "OK", 2)}), 3);
    CHECK(mock->chat(simple_chat("ping")) == "OK");
    REQUIRE(mock->call_log().size() == 1);
    CHECK(mock->call_log()[0].attempts == 3);
}

TEST_CASE("max_retries 0 turns a single failure into TransportError") {
    auto mock = make_mock(nlohmann::json::array({script_entry("chat", {"ping"}, "OK", 1)}), 0);
    CHECK_THROWS_AS(mock->chat(simple_chat("ping")), TransportError);
    REQUIRE(mock->call_log().size() == 1);
    CHECK(mock->call_log()[0].attempts == 1);
    CHECK_FALSE(mock->call_log()[0].error.empty());
}

TEST_CASE("attempts never exceed max_retries + 1") {
    for (int retries : {0, 1, 2, 5}) {
        auto mock =
            make_mock(nlohmann::json::array({script_entry("chat", {"ping"}, "OK", 100)}), retries);
        CHECK_THROWS_AS(mock->chat(simple_chat("ping")), TransportError);
        CHECK(mock->call_log().back().attempts == retries + 1);
    }
}

TEST_CASE("auth errors are not retried") {
    auto script = nlohmann::json::array(
        {nlohmann::json{{"capability", "chat"}, {"match_keys", {"ping"}}, {"error", "auth"}}});
    auto mock = make_mock(script, 5);
    CHECK_THROWS_AS(mock->chat(simple_chat("ping")), AuthError);
    CHECK(mock->call_log().back().attempts == 1);
}

TEST_CASE("guided caption is keyed separately from the coarse one") {
    auto mock = make_mock(nlohmann::json::array({
        script_entry("audio_caption", {"clip-001.wav", "background music"},
                     "a string quartet plays softly behind the narration"),
        script_entry("audio_caption", {"clip-001.wav"}, "a person narrates over faint music"),
    }));
    const auto coarse = mock->audio_caption(test_audio(), std::nullopt);
    const auto focused = mock->audio_caption(test_audio(), std::string("background music"));
    CHECK(coarse == "a person narrates over faint music");
    CHECK(focused == "a string quartet plays softly behind the narration");
    CHECK(coarse != focused);
}

TEST_CASE("unresolvable audio raises AudioUnavailable") {
    auto script = nlohmann::json::array({nlohmann::json{
        {"capability", "audio_caption"}, {"match_keys", {"missing.wav"}}, {"error",
        "audio_unavailable"}}});
    auto mock = make_mock(script);
    CHECK_THROWS_AS(mock->audio_caption(test_audio("missing.wav"), std::nullopt),
                    AudioUnavailable);
}

TEST_CASE("audio_qa rejects empty queries and empty replies") {
    auto mock = make_mock(nlohmann::json::array({
        script_entry("audio_qa", {"how many speakers"}, "two speakers"),
        script_entry("audio_qa", {"empty"}, ""),
    }));
    CHECK(mock->audio_qa(test_audio(), "how many speakers?") == "two speakers");
    CHECK_THROWS_AS(mock->audio_qa(test_audio(), "   "), Error);
    CHECK_THROWS_AS(mock->audio_qa(test_audio(), "empty please"), MalformedResponse);
}

TEST_CASE("empty transcript is a valid result") {
    auto mock = make_mock(nlohmann::json::array({script_entry("transcribe", {}, "")}));
    CHECK(mock->transcribe(test_audio()) == "");
    CHECK(mock->call_log().back().error.empty());
}

TEST_CASE("identical call sequences produce identical logs") {
    const auto script = nlohmann::json::array({
        script_entry("chat", {"seq"}, nlohmann::json::array({"first", "second", "third"})),
        script_entry("transcribe", {}, "hello world"),
    });
    auto run = [&] {
        auto mock = make_mock(script);
        std::vector<std::string> out;
        out.push_back(mock->chat(simple_chat("seq")));
        out.push_back(mock->transcribe(test_audio()));
        out.push_back(mock->chat(simple_chat("seq")));
        out.push_back(mock->chat(simple_chat("seq")));
        out.push_back(mock->chat(simple_chat("seq"))); // last response repeats
        for (const auto& rec : mock->call_log()) {
            out.push_back(rec.capability);
            out.push_back(rec.response);
        }
        return out;
    };
    CHECK(run() == run());
    CHECK(run()[2] == "second");
    CHECK(run()[4] == "third");
}

TEST_CASE("every call writes exactly one record, success or not") {
    auto mock = make_mock(nlohmann::json::array({
        script_entry("chat", {"ok"}, "fine"),
        script_entry("chat", {"bad"}, "x", 100),
    }),
                          1);
    mock->chat(simple_chat("ok"));
    CHECK_THROWS_AS(mock->chat(simple_chat("bad")), TransportError);
    mock->chat(simple_chat("ok"));
    CHECK(mock->call_log().size() == 3);
}

TEST_CASE("config validation bounds") {
    BackendConfig cfg = test_backend_config();
    cfg.max_retries = 11;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = test_backend_config();
    cfg.timeout_s = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("unmatched mock calls fail loudly") {
    auto mock = make_mock(nlohmann::json::array({script_entry("chat", {"expected"}, "ok")}));
    CHECK_THROWS_AS(mock->chat(simple_chat("some other request")), Error);
}
