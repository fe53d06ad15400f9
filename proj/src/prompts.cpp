// SPDX-License-Identifier: Apache-2.0
#include "audioqa/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "audioqa/errors.hpp"

namespace audioqa {

std::string substitute_placeholders(const std::string& text,
                                    const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(text.size());
    for (size_t i = 0; i < text.size();) {
        const char c = text[i];
        if (c == '{' && i + 1 < text.size() && text[i + 1] == '{') {
            out += '{';
            i += 2;
        } else if (c == '}' && i + 1 < text.size() && text[i + 1] == '}') {
            out += '}';
            i += 2;
        } else if (c == '{') {
            const auto end = text.find('}', i + 1);
            if (end == std::string::npos) throw Error("unterminated placeholder in template");
            const std::string name = text.substr(i + 1, end - i - 1);
            for (char nc : name)
                if (!std::isalnum(static_cast<unsigned char>(nc)) && nc != '_')
                    throw Error("bad placeholder name: {" + name + "}");
            const auto it = bindings.find(name);
            if (it == bindings.end()) throw Error("unbound placeholder: {" + name + "}");
            out += it->second;
            i = end + 1;
        } else {
            out += c;
            ++i;
        }
    }
    return out;
}

std::string PromptTemplate::render_user(const std::map<std::string, std::string>& bindings) const {
    return substitute_placeholders(user_text, bindings);
}

namespace {

// Built-in prompt set. A prompt directory overrides these per file.
const char* kPlanSystem =
    "You are the planning agent of an audio question-answering pipeline. You never hear the "
    "audio yourself; you judge an evidence document that describes it. Decide whether the "
    "document already contains enough information to answer the question confidently.";

const char* kPlanUser =
    "Question:\n{question}\n\n"
    "Answer choices:\n{choices}\n\n"
    "Evidence document:\n{document}\n\n"
    "Previous gap analyses:\n{history}\n\n"
    "If the evidence is sufficient to pick one choice with confidence, reply with JSON "
    "{{\"status\": \"sufficient\", \"gap_analysis\": \"\"}}. Otherwise reply with JSON "
    "{{\"status\": \"insufficient\", \"gap_analysis\": \"<one or two sentences naming the "
    "specific missing information>\"}}. Reply with the JSON object only.";

const char* kInteractSystem =
    "You are the interaction agent of an audio question-answering pipeline. Given the evidence "
    "document and the latest gap analysis, choose exactly one tool action to acquire the "
    "missing information.";

const char* kInteractUser =
    "Evidence document:\n{document}\n\n"
    "Gap analyses so far (most recent last):\n{history}\n\n"
    "Available actions:\n"
    "- audio_qa: ask the audio model a targeted question about the clip\n"
    "- recaption: re-describe the audio with attention on a stated focus\n"
    "- asr: transcribe the speech in the clip\n\n"
    "Reply with one JSON object only:\n"
    "{{\"action\": \"audio_qa\", \"query\": \"<question for the audio model>\", "
    "\"rationale\": \"...\"}} or\n"
    "{{\"action\": \"recaption\", \"focus\": \"<aspect to attend to>\", \"rationale\": \"...\"}} "
    "or\n"
    "{{\"action\": \"asr\", \"rationale\": \"...\"}} (optionally with "
    "\"segment\": {{\"start_s\": <number>, \"end_s\": <number>}}).";

const char* kAnswerSystem =
    "You are the answering agent of an audio question-answering pipeline. Answer the "
    "multiple-choice question using only the evidence document.";

const char* kAnswerUser =
    "Evidence document:\n{document}\n\n"
    "Question:\n{question}\n\n"
    "Choices:\n{choices}\n\n"
    "Reply with one JSON object only: {{\"answer_letter\": \"<letter of the chosen option>\", "
    "\"confidence\": <number between 0 and 1>, \"rationale\": \"<step-by-step reasoning from "
    "the evidence to the answer>\"}}.";

const char* kNormalizeSystem =
    "You map a model's free-form answer onto a fixed choice list.";

const char* kNormalizeUser =
    "Choices:\n{choices}\n\n"
    "Model output:\n{raw}\n\n"
    "Which single choice does the output select? Reply with exactly one option letter "
    "(for example: B). If the output selects none of them, or more than one, reply NONE.";

} // namespace

PromptLibrary::PromptLibrary() {
    templates_["plan"] = PromptTemplate{"plan", kPlanSystem, kPlanUser};
    templates_["interact"] = PromptTemplate{"interact", kInteractSystem, kInteractUser};
    templates_["answer"] = PromptTemplate{"answer", kAnswerSystem, kAnswerUser};
    templates_["normalize"] = PromptTemplate{"normalize", kNormalizeSystem, kNormalizeUser};
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
    PromptLibrary lib;
    if (!std::filesystem::is_directory(dir)) throw Error("prompt directory not found: " + dir.string());
    for (auto& [name, tpl] : lib.templates_) {
        const auto path = dir / (name + ".txt");
        if (!std::filesystem::exists(path)) continue;
        std::ifstream in(path);
        std::ostringstream system_part, user_part;
        std::string line;
        bool in_user = false;
        while (std::getline(in, line)) {
            if (!in_user && line == "---") {
                in_user = true;
                continue;
            }
            (in_user ? user_part : system_part) << line << "\n";
        }
        if (!in_user) throw Error("prompt file lacks '---' separator: " + path.string());
        tpl.system_text = system_part.str();
        tpl.user_text = user_part.str();
    }
    return lib;
}

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
    const auto it = templates_.find(name);
    if (it == templates_.end()) throw Error("unknown prompt template: " + name);
    return it->second;
}

} // namespace audioqa
