#include "incharacter/prompts.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "incharacter/io.hpp"

namespace incharacter {

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("prompt template directory not found: " + dir.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") {
            continue;
        }
        std::string text = read_file(entry.path());
        // Template files end with a newline; the prompt itself does not.
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
            text.pop_back();
        }
        lib.templates_[entry.path().stem().string()] = std::move(text);
    }
    return lib;
}

bool PromptLibrary::has(const std::string& name) const {
    return templates_.count(name) > 0;
}

const std::string& PromptLibrary::raw(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw std::runtime_error("unknown prompt template: " + name);
    }
    return it->second;
}

std::string PromptLibrary::substitute(const std::string& text,
                                      const std::map<std::string, std::string>& vars) {
    std::string result;
    result.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find('{', pos);
        if (open == std::string::npos) {
            result.append(text, pos, std::string::npos);
            break;
        }
        const auto close = text.find('}', open + 1);
        if (close == std::string::npos) {
            result.append(text, pos, std::string::npos);
            break;
        }
        const std::string name = text.substr(open + 1, close - open - 1);
        auto it = vars.find(name);
        if (it == vars.end()) {
            // Not a known placeholder (JSON braces, sample skeletons, ...).
            result.append(text, pos, open + 1 - pos);
            pos = open + 1;
            continue;
        }
        result.append(text, pos, open - pos);
        result.append(it->second);
        pos = close + 1;
    }
    return result;
}

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& vars) const {
    return substitute(raw(name), vars);
}

std::string options_clause(const LikertScale& scale, const std::string& dimension_id) {
    std::string clause;
    const std::size_t n = scale.options.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& option = scale.options[i];
        std::string label = option.label;
        if (!dimension_id.empty()) {
            auto it = option.doc_labels.find(dimension_id);
            if (it == option.doc_labels.end()) {
                throw ScaleError("scale '" + scale.name + "' lacks a descriptive label for code " +
                                 std::to_string(option.code) + " on dimension '" + dimension_id +
                                 "'");
            }
            label = it->second;
        }
        if (i > 0) {
            clause += (i + 1 == n) ? ", and " : ", ";
        }
        clause += std::to_string(option.code) + " denotes '" + to_lower(label) + "'";
    }
    return clause;
}

std::string format_score(double value) {
    if (std::abs(value - std::round(value)) < 1e-9) {
        return std::to_string(static_cast<long long>(std::llround(value)));
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", value);
    return buf;
}

std::optional<nlohmann::json> extract_first_json(const std::string& raw) {
    for (std::size_t start = 0; start < raw.size(); ++start) {
        if (raw[start] != '{') {
            continue;
        }
        int depth = 0;
        bool in_string = false;
        for (std::size_t pos = start; pos < raw.size(); ++pos) {
            const char c = raw[pos];
            if (in_string) {
                if (c == '\\') {
                    ++pos;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
                if (depth == 0) {
                    const std::string candidate = raw.substr(start, pos - start + 1);
                    try {
                        return nlohmann::json::parse(candidate);
                    } catch (const nlohmann::json::parse_error&) {
                        break;  // scan on from the next brace
                    }
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace incharacter
