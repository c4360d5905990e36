#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "incharacter/scales.hpp"

namespace incharacter {

/// Interviewer prompt templates loaded from text files. Placeholders are
/// written {like this}; only known variable names are substituted, so literal
/// braces (e.g. JSON skeletons) pass through untouched.
class PromptLibrary {
public:
    static PromptLibrary load(const std::filesystem::path& dir);

    bool has(const std::string& name) const;
    const std::string& raw(const std::string& name) const;
    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& vars) const;

    static std::string substitute(const std::string& text,
                                  const std::map<std::string, std::string>& vars);

private:
    std::map<std::string, std::string> templates_;
};

/// "1 denotes 'strongly disagree', 2 denotes ..., and 5 denotes 'strongly
/// agree'" built from the scale's option labels (lowercased). When a
/// dimension id is given and the scale is d-OC capable, the dimension's
/// descriptive labels replace the generic ones.
std::string options_clause(const LikertScale& scale, const std::string& dimension_id = "");

std::string format_score(double value);

/// First complete JSON object embedded in free-form model output, tolerating
/// surrounding prose and code fences. nullopt when none parses.
std::optional<nlohmann::json> extract_first_json(const std::string& raw);

}  // namespace incharacter
