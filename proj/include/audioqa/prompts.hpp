// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace audioqa {

struct PromptTemplate {
    std::string name;
    std::string system_text;
    std::string user_text;

    /// Substitutes {placeholder} occurrences from `bindings`. "{{" and "}}"
    /// escape literal braces. An unbound placeholder is an error.
    [[nodiscard]] std::string render_user(const std::map<std::string, std::string>& bindings) const;
};

/// Holds the prompt set for the agent suite. Built-in defaults can be
/// overridden per template by files in a directory: <name>.txt, with the
/// system text first, a line containing only "---", then the user text.
class PromptLibrary {
  public:
    PromptLibrary(); // built-in defaults
    static PromptLibrary from_directory(const std::filesystem::path& dir);

    [[nodiscard]] const PromptTemplate& get(const std::string& name) const;

  private:
    std::map<std::string, PromptTemplate> templates_;
};

std::string substitute_placeholders(const std::string& text,
                                    const std::map<std::string, std::string>& bindings);

} // namespace audioqa
