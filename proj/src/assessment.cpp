#include "incharacter/assessment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "incharacter/io.hpp"

namespace incharacter {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kParticipant = "the participant";
constexpr const char* kRegenNudge =
    "Your previous response could not be used. Please regenerate it, strictly following the "
    "required output format.";

}  // namespace

Method parse_method(const std::string& name) {
    if (name == "SR") return Method::SR;
    if (name == "SR-CoT") return Method::SR_CoT;
    if (name == "SR-ICL") return Method::SR_ICL;
    if (name == "OC") return Method::OC;
    if (name == "d-OC") return Method::DOC;
    if (name == "ER_all") return Method::ER_All;
    if (name == "ER_batch") return Method::ER_Batch;
    throw AssessmentError("unknown method '" + name + "'");
}

std::string method_name(Method method) {
    switch (method) {
        case Method::SR: return "SR";
        case Method::SR_CoT: return "SR-CoT";
        case Method::SR_ICL: return "SR-ICL";
        case Method::OC: return "OC";
        case Method::DOC: return "d-OC";
        case Method::ER_All: return "ER_all";
        case Method::ER_Batch: return "ER_batch";
    }
    throw AssessmentError("unknown method");
}

bool method_uses_transcript(Method method) {
    return method == Method::OC || method == Method::DOC || method == Method::ER_All ||
           method == Method::ER_Batch;
}

bool method_has_item_codes(Method method) {
    return method != Method::ER_All && method != Method::ER_Batch;
}

std::string language_name(const std::string& tag) {
    if (tag == "en") return "English";
    if (tag == "zh") return "Chinese";
    return tag;
}

std::string anonymize(std::string text, const std::vector<std::string>& aliases) {
    std::vector<std::string> ordered = aliases;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const std::string& a, const std::string& b) {
                         return a.size() > b.size();
                     });
    auto is_word_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0;
    };
    for (const auto& alias : ordered) {
        if (alias.empty()) {
            continue;
        }
        const std::string needle = to_lower(alias);
        std::string lowered = to_lower(text);
        std::string result;
        std::size_t pos = 0;
        while (pos < text.size()) {
            const auto found = lowered.find(needle, pos);
            if (found == std::string::npos) {
                result.append(text, pos, std::string::npos);
                break;
            }
            const bool left_ok = found == 0 || !is_word_char(text[found - 1]);
            const std::size_t after = found + needle.size();
            const bool right_ok = after >= text.size() || !is_word_char(text[after]);
            result.append(text, pos, found - pos);
            if (left_ok && right_ok) {
                result.append(kParticipant);
            } else {
                result.append(text, found, needle.size());
            }
            pos = after;
        }
        if (pos >= text.size() && result.empty() && !text.empty()) {
            // no occurrence at all
            result = text;
        }
        text = std::move(result);
    }
    return text;
}

namespace {

bool looks_numeric(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) {
        return false;
    }
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    bool digit = false, dot = false;
    for (; i < t.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(t[i]))) {
            digit = true;
        } else if (t[i] == '.' && !dot) {
            dot = true;
        } else {
            return false;
        }
    }
    return digit;
}

double numeric_value(const json& value) {
    if (value.is_number()) {
        return value.get<double>();
    }
    if (value.is_string()) {
        std::string t = trim(value.get<std::string>());
        if (!t.empty() && t.back() == '%') {
            t.pop_back();
            t = trim(t);
        }
        if (looks_numeric(t)) {
            return std::stod(t);
        }
    }
    throw AssessmentError("expected a numeric value");
}

}  // namespace

json parse_llm_json(const std::string& raw, const std::map<std::string, std::string>& expected) {
    const auto doc = extract_first_json(raw);
    if (!doc || !doc->is_object()) {
        throw AssessmentError("no JSON object found in interviewer output");
    }
    for (const auto& [key, type] : expected) {
        if (!doc->contains(key)) {
            throw AssessmentError("interviewer JSON lacks key '" + key + "'");
        }
        const json& value = (*doc)[key];
        if (type == "number") {
            if (!value.is_number() &&
                !(value.is_string() && looks_numeric(value.get<std::string>()))) {
                throw AssessmentError("interviewer JSON key '" + key + "' is not a number");
            }
        } else if (type == "string") {
            if (!value.is_string()) {
                throw AssessmentError("interviewer JSON key '" + key + "' is not a string");
            }
        } else if (type == "object") {
            if (!value.is_object()) {
                throw AssessmentError("interviewer JSON key '" + key + "' is not an object");
            }
        }
    }
    return *doc;
}

namespace {

/// Initial request at the policy's base temperature, then regenerations with
/// the previous output and a nudge appended, at the retry temperature.
template <typename T>
std::optional<T> request_with_regen(
    const Interviewer& interviewer, const std::vector<ChatMessage>& base,
    const std::function<std::optional<T>(const std::string&)>& parse) {
    std::string last;
    const int attempts = 1 + std::max(1, interviewer.policy.max_regenerations);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        ChatRequest request;
        request.messages = base;
        request.max_tokens = interviewer.max_tokens;
        if (attempt == 0) {
            request.temperature = interviewer.policy.initial_temperature;
        } else {
            request.messages.push_back({"assistant", last});
            request.messages.push_back({"user", kRegenNudge});
            request.temperature = interviewer.policy.retry_temperature;
        }
        try {
            last = interviewer.backend->complete(request);
        } catch (const ChatError&) {
            continue;
        }
        if (auto value = parse(last)) {
            return value;
        }
    }
    return std::nullopt;
}

std::optional<int> bare_code(const std::string& text, const LikertScale& scale) {
    std::string t = trim(text);
    while (!t.empty() && (t.back() == '.' || t.back() == '!')) {
        t.pop_back();
        t = trim(t);
    }
    if (t.empty() || t.size() > 4) {
        return std::nullopt;
    }
    std::size_t i = (t[0] == '-') ? 1 : 0;
    if (i >= t.size()) {
        return std::nullopt;
    }
    for (std::size_t j = i; j < t.size(); ++j) {
        if (!std::isdigit(static_cast<unsigned char>(t[j]))) {
            return std::nullopt;
        }
    }
    const int code = std::stoi(t);
    if (code < scale.scoring.min_code || code > scale.scoring.max_code) {
        return std::nullopt;
    }
    return code;
}

int midpoint_code(const LikertScale& scale) {
    // Round half up when the range has no exact midpoint code.
    return static_cast<int>(std::floor(
        (scale.scoring.min_code + scale.scoring.max_code) / 2.0 + 0.5));
}

std::string sr_vars_clause(const LikertScale& scale, std::map<std::string, std::string>& vars) {
    vars["lowest score"] = std::to_string(scale.scoring.min_code);
    vars["highest score"] = std::to_string(scale.scoring.max_code);
    vars["options clause"] = options_clause(scale);
    return vars["options clause"];
}

}  // namespace

std::optional<int> extract_choice(const std::string& response, const LikertScale& scale,
                                  const Interviewer& interviewer) {
    std::map<std::string, std::string> vars;
    sr_vars_clause(scale, vars);
    vars["response"] = response;
    const std::string prompt = interviewer.prompts->render("extract", vars);

    using Extracted = std::optional<int>;  // nullopt = refusal marker
    auto parse = [&](const std::string& reply) -> std::optional<Extracted> {
        const std::string t = trim(reply);
        if (t == "x" || t == "X" || t == "\"x\"" || t == "'x'") {
            return Extracted{std::nullopt};
        }
        if (auto code = bare_code(t, scale)) {
            return Extracted{*code};
        }
        return std::nullopt;  // unparseable, regenerate
    };
    const auto outcome = request_with_regen<Extracted>(interviewer, {{"user", prompt}}, parse);
    if (!outcome) {
        return std::nullopt;  // budget exhausted counts as refusal
    }
    return *outcome;
}

AnswerSheet sr_collect(const CharacterProfile& character, const LikertScale& scale,
                       const RolePlayConfig& config, ChatBackend& rpa, SrVariant variant,
                       const Interviewer& interviewer, int run_id, const SrOptions& options) {
    std::map<std::string, std::string> vars;
    sr_vars_clause(scale, vars);
    std::string icl_prefix;
    if (variant == SrVariant::Icl) {
        std::map<std::string, std::string> icl_vars;
        icl_vars["high_score"] = std::to_string(scale.scoring.max_code);
        icl_vars["high_score-1"] = std::to_string(scale.scoring.max_code - 1);
        icl_vars["low_score"] = std::to_string(scale.scoring.min_code);
        icl_vars["low_score+1"] = std::to_string(scale.scoring.min_code + 1);
        icl_prefix = interviewer.prompts->render("sr_icl_examples", icl_vars) + "\n\n";
    }
    const std::string template_name = (variant == SrVariant::CoT) ? "sr_cot" : "sr";

    AnswerSheet sheet;
    sheet.character_id = character.id;
    sheet.run_id = run_id;
    std::vector<std::optional<int>> codes(scale.items.size());

    parallel_for(scale.items.size(), options.parallelism, [&](std::size_t index) {
        const auto& item = scale.items[index];
        auto item_vars = vars;
        item_vars["item"] = item.statement;
        const std::string user = icl_prefix + interviewer.prompts->render(template_name, item_vars);

        ChatRequest request;
        const std::string system = build_system_prompt(character, config, item.statement);
        if (!system.empty()) {
            request.messages.push_back({"system", system});
        }
        request.messages.push_back({"user", user});
        request.temperature = options.rpa_temperature;
        request.max_tokens = options.max_tokens;
        request.salt = "run:" + std::to_string(run_id);

        std::string reply;
        try {
            reply = rpa.complete(request);
        } catch (const ChatError&) {
            codes[index] = std::nullopt;  // backend failure -> REFUSED
            return;
        }
        if (auto code = bare_code(reply, scale)) {
            codes[index] = *code;
            return;
        }
        const auto extracted = extract_choice(reply, scale, interviewer);
        // Refusals are imputed as the midpoint option ("Neutral").
        codes[index] = extracted ? *extracted : std::optional<int>(midpoint_code(scale));
    });

    for (std::size_t i = 0; i < scale.items.size(); ++i) {
        sheet.entries[scale.items[i].id] = codes[i];
    }
    return sheet;
}

namespace {

struct Chunk {
    std::size_t begin = 0;
    std::size_t end = 0;
};

std::vector<Chunk> split_by_budget(std::size_t n, const RegenPolicy& policy) {
    std::vector<Chunk> chunks;
    const std::size_t budget =
        (policy.token_limit_split && policy.batch_sample_budget > 0)
            ? static_cast<std::size_t>(policy.batch_sample_budget)
            : n;
    for (std::size_t begin = 0; begin < n; begin += budget) {
        chunks.push_back({begin, std::min(n, begin + budget)});
    }
    return chunks;
}

/// Shared OC / d-OC machinery; `dimension_id` empty means plain OC.
void convert_chunk(const std::vector<QaPair>& pairs, const Chunk& chunk,
                   const LikertScale& scale, const std::string& shown_name,
                   const std::string& dimension_id, const std::vector<std::string>& aliases,
                   const Interviewer& interviewer, AnswerSheet& sheet) {
    ordered_json input = ordered_json::object();
    std::vector<std::string> keys;
    for (std::size_t i = chunk.begin; i < chunk.end; ++i) {
        const auto& pair = pairs[i];
        const ScaleItem* item = scale.find_item(pair.item_id);
        const std::string key = std::to_string(i);
        keys.push_back(key);
        input[key] = {{"statement", item->statement},
                      {"conversation", {pair.question, pair.response}}};
    }

    std::map<std::string, std::string> vars{{"character name", shown_name}};
    std::map<std::string, std::string> choice_vars = vars;
    choice_vars["lowest score"] = std::to_string(scale.scoring.min_code);
    choice_vars["highest score"] = std::to_string(scale.scoring.max_code);
    choice_vars["options clause"] = options_clause(scale, dimension_id);

    std::string prompt = interviewer.prompts->render("oc", vars) + "\n\n" +
                         interviewer.prompts->render("oc_choice", choice_vars) +
                         "\n\n===INPUT===\n" + input.dump(2);
    if (!dimension_id.empty()) {
        prompt = anonymize(prompt, aliases);
    }

    using ChoiceMap = std::map<std::string, std::optional<int>>;
    auto parse = [&](const std::string& reply) -> std::optional<ChoiceMap> {
        json doc;
        try {
            doc = parse_llm_json(reply, {});
        } catch (const AssessmentError&) {
            return std::nullopt;
        }
        ChoiceMap choices;
        for (const auto& key : keys) {
            if (!doc.contains(key)) {
                return std::nullopt;  // missing sample, regenerate
            }
            const json& value = doc[key];
            if (value.is_string()) {
                const std::string s = trim(value.get<std::string>());
                if (s == "x" || s == "X") {
                    choices[key] = std::nullopt;
                    continue;
                }
                if (!looks_numeric(s)) {
                    return std::nullopt;
                }
                const int code = static_cast<int>(std::llround(std::stod(s)));
                if (code < scale.scoring.min_code || code > scale.scoring.max_code) {
                    return std::nullopt;
                }
                choices[key] = code;
            } else if (value.is_number()) {
                const int code = static_cast<int>(std::llround(value.get<double>()));
                if (code < scale.scoring.min_code || code > scale.scoring.max_code) {
                    return std::nullopt;
                }
                choices[key] = code;
            } else {
                return std::nullopt;
            }
        }
        return choices;
    };

    const auto choices =
        request_with_regen<ChoiceMap>(interviewer, {{"user", prompt}}, parse);
    for (std::size_t i = chunk.begin; i < chunk.end; ++i) {
        const std::string key = std::to_string(i);
        if (choices && choices->count(key)) {
            sheet.entries[pairs[i].item_id] = choices->at(key);
        } else {
            sheet.entries[pairs[i].item_id] = std::nullopt;  // persistent failure -> REFUSED
        }
    }
}

}  // namespace

AnswerSheet oc_convert(const std::vector<QaPair>& pairs, const LikertScale& scale,
                       const CharacterProfile& character, const Interviewer& interviewer) {
    for (const auto& pair : pairs) {
        if (scale.find_item(pair.item_id) == nullptr) {
            throw AssessmentError("OC pair references unknown item '" + pair.item_id + "'");
        }
    }
    AnswerSheet sheet;
    sheet.character_id = character.id;
    const std::string name = character.aliases.empty() ? character.id : character.aliases.front();
    for (const auto& chunk : split_by_budget(pairs.size(), interviewer.policy)) {
        convert_chunk(pairs, chunk, scale, name, "", {}, interviewer, sheet);
    }
    return sheet;
}

AnswerSheet doc_convert(const std::vector<QaPair>& pairs, const LikertScale& scale,
                        const CharacterProfile& character, const Interviewer& interviewer) {
    if (!scale.doc_capable()) {
        throw AssessmentError("scale '" + scale.name +
                              "' lacks descriptive option labels required for d-OC");
    }
    AnswerSheet sheet;
    sheet.character_id = character.id;
    for (const auto& dim : scale.dimensions) {
        std::vector<QaPair> dim_pairs;
        for (const auto& pair : pairs) {
            const ScaleItem* item = scale.find_item(pair.item_id);
            if (item == nullptr) {
                throw AssessmentError("d-OC pair references unknown item '" + pair.item_id + "'");
            }
            if (item->dimension == dim.id) {
                dim_pairs.push_back(pair);
            }
        }
        if (dim_pairs.empty()) {
            continue;
        }
        AnswerSheet dim_sheet;
        for (const auto& chunk : split_by_budget(dim_pairs.size(), interviewer.policy)) {
            convert_chunk(dim_pairs, chunk, scale, kParticipant, dim.id, character.aliases,
                          interviewer, dim_sheet);
        }
        for (const auto& [item_id, code] : dim_sheet.entries) {
            sheet.entries[item_id] = code;
        }
    }
    return sheet;
}

std::vector<int> er_batch_sizes(int n) {
    if (n <= 0) {
        return {};
    }
    if (n < 3) {
        return {n};
    }
    if (n == 5) {
        return {3, 2};  // 5 cannot be written with sizes in {3,4}
    }
    const int fours = n % 3;
    const int threes = (n - 4 * fours) / 3;
    std::vector<int> sizes(fours, 4);
    sizes.insert(sizes.end(), threes, 3);
    return sizes;
}

std::vector<DimScoreJudgment> er_rate(const std::string& dimension_id,
                                      const std::vector<QaPair>& pairs, const LikertScale& scale,
                                      const CharacterProfile& character,
                                      const Interviewer& interviewer, ErMode mode,
                                      const std::string& experimenter,
                                      const std::string& language) {
    const DimensionSpec* dim = scale.find_dimension(dimension_id);
    if (dim == nullptr) {
        throw AssessmentError("er_rate: unknown dimension '" + dimension_id + "'");
    }
    if (pairs.empty()) {
        throw AssessmentError("er_rate: dimension '" + dimension_id + "' has no pairs");
    }

    std::vector<Chunk> chunks;
    if (mode == ErMode::Batch) {
        std::size_t begin = 0;
        for (int size : er_batch_sizes(static_cast<int>(pairs.size()))) {
            chunks.push_back({begin, begin + static_cast<std::size_t>(size)});
            begin += static_cast<std::size_t>(size);
        }
    } else {
        chunks = split_by_budget(pairs.size(), interviewer.policy);
    }

    const ScoreRange range = scale.score_range(dimension_id);
    const bool percentage = scale.scoring.percentage_mode;

    std::map<std::string, std::string> vars;
    vars["scale name"] = scale.name;
    vars["dimension name"] = dim->name;
    vars["dimension description"] = dim->description;
    vars["experimenter name"] = experimenter;
    vars["character name"] = kParticipant;
    vars["language"] = language;
    vars["lowest score"] = format_score(range.lo);
    vars["middle score"] = format_score(range.midpoint());
    vars["highest score"] = format_score(range.hi);
    vars["highest"] = vars["highest score"];
    vars["type1"] = dim->positive_pole;
    vars["type2"] = dim->negative_pole;

    const std::string head =
        interviewer.prompts->render(percentage ? "er_percentage" : "er", vars);

    std::vector<DimScoreJudgment> judgments;
    for (std::size_t chunk_index = 0; chunk_index < chunks.size(); ++chunk_index) {
        const auto& chunk = chunks[chunk_index];
        std::string conversations = "\n\n===CONVERSATIONS===";
        for (std::size_t i = chunk.begin; i < chunk.end; ++i) {
            conversations += "\n" + experimenter + ": " + pairs[i].question;
            conversations += "\n" + std::string(kParticipant) + ": " + pairs[i].response;
        }
        const std::string prompt = anonymize(head + conversations, character.aliases);

        auto parse = [&](const std::string& reply) -> std::optional<DimScoreJudgment> {
            json doc;
            try {
                doc = parse_llm_json(
                    reply, {{"analysis", "string"},
                            {"result", percentage ? std::string("object") : std::string("number")}});
            } catch (const AssessmentError&) {
                return std::nullopt;
            }
            DimScoreJudgment judgment;
            judgment.dimension_id = dimension_id;
            judgment.analysis = doc["analysis"].get<std::string>();
            judgment.batch_index = static_cast<int>(chunk_index);
            try {
                if (percentage) {
                    const json& result = doc["result"];
                    if (!result.contains(dim->positive_pole) ||
                        !result.contains(dim->negative_pole)) {
                        return std::nullopt;
                    }
                    const double positive = numeric_value(result[dim->positive_pole]);
                    const double negative = numeric_value(result[dim->negative_pole]);
                    if (std::abs(positive + negative - 100.0) > 0.5) {
                        return std::nullopt;
                    }
                    judgment.score = positive;
                } else {
                    judgment.score = numeric_value(doc["result"]);
                }
            } catch (const AssessmentError&) {
                return std::nullopt;
            }
            if (judgment.score < range.lo || judgment.score > range.hi) {
                return std::nullopt;  // out-of-range judgment, regenerate
            }
            return judgment;
        };

        const auto judgment =
            request_with_regen<DimScoreJudgment>(interviewer, {{"user", prompt}}, parse);
        if (judgment) {
            judgments.push_back(*judgment);
        }
    }
    return judgments;
}

namespace {

std::vector<QaPair> pairs_for_run(const Transcript& transcript, const LikertScale& scale,
                                  int run_id, std::vector<std::string>* failed_items) {
    std::map<std::string, const InterviewRecord*> by_item;
    for (const auto* record : transcript.run_records(run_id)) {
        by_item[record->item_id] = record;
    }
    std::vector<QaPair> pairs;
    for (const auto& item : scale.items) {
        auto it = by_item.find(item.id);
        if (it == by_item.end() || it->second->failed) {
            if (failed_items != nullptr) {
                failed_items->push_back(item.id);
            }
            continue;
        }
        pairs.push_back({item.id, it->second->question, it->second->response});
    }
    return pairs;
}

PersonalityReport report_skeleton(const Transcript& transcript, const LikertScale& scale,
                                  Method method, int run_id, const Interviewer& interviewer) {
    PersonalityReport report;
    report.character_id = transcript.character_id;
    report.scale_id = scale.name;
    report.run_id = run_id;
    report.method = method;
    report.interviewer_id = interviewer.backend->id();
    const auto records = transcript.run_records(run_id);
    if (!records.empty()) {
        report.rpa_backend_id = records.front()->backend_id;
    }
    return report;
}

void fill_from_sheet(PersonalityReport& report, const LikertScale& scale,
                     const AnswerSheet& sheet) {
    report.item_codes.clear();
    for (const auto& item : scale.items) {
        auto it = sheet.entries.find(item.id);
        report.item_codes[item.id] = (it == sheet.entries.end()) ? std::nullopt : it->second;
    }
    report.dim_scores = apply_scoring(scale, sheet);
}

}  // namespace

std::vector<PersonalityReport> assess_transcript(const Transcript& transcript,
                                                 const CharacterProfile& character,
                                                 Method method, const LikertScale& scale,
                                                 const Interviewer& interviewer,
                                                 const AssessOptions& options) {
    if (!method_uses_transcript(method)) {
        throw AssessmentError("method " + method_name(method) + " does not consume transcripts");
    }
    std::vector<PersonalityReport> reports;
    const int runs = transcript.runs();
    for (int run = 1; run <= runs; ++run) {
        std::vector<std::string> failed_items;
        const auto pairs = pairs_for_run(transcript, scale, run, &failed_items);
        PersonalityReport report = report_skeleton(transcript, scale, method, run, interviewer);

        if (method == Method::OC || method == Method::DOC) {
            AnswerSheet sheet = (method == Method::OC)
                                    ? oc_convert(pairs, scale, character, interviewer)
                                    : doc_convert(pairs, scale, character, interviewer);
            sheet.run_id = run;
            for (const auto& item : failed_items) {
                sheet.entries[item] = std::nullopt;  // FAILED propagates as REFUSED
            }
            fill_from_sheet(report, scale, sheet);
        } else {
            const ErMode mode = (method == Method::ER_All) ? ErMode::All : ErMode::Batch;
            std::vector<std::optional<double>> scores(scale.dimensions.size());
            std::vector<std::vector<std::string>> analyses(scale.dimensions.size());
            parallel_for(scale.dimensions.size(), options.parallelism, [&](std::size_t d) {
                const auto& dim = scale.dimensions[d];
                std::vector<QaPair> dim_pairs;
                for (const auto& pair : pairs) {
                    if (scale.find_item(pair.item_id)->dimension == dim.id) {
                        dim_pairs.push_back(pair);
                    }
                }
                if (dim_pairs.empty()) {
                    scores[d] = std::nullopt;
                    return;
                }
                const auto judgments =
                    er_rate(dim.id, dim_pairs, scale, character, interviewer, mode,
                            options.experimenter, options.language);
                if (judgments.empty()) {
                    scores[d] = std::nullopt;  // every batch exhausted regeneration
                    return;
                }
                double total = 0.0;
                for (const auto& judgment : judgments) {
                    total += judgment.score;
                    analyses[d].push_back(judgment.analysis);
                }
                scores[d] = total / static_cast<double>(judgments.size());
            });
            for (std::size_t d = 0; d < scale.dimensions.size(); ++d) {
                report.dim_scores[scale.dimensions[d].id] = scores[d];
                if (!analyses[d].empty()) {
                    report.dim_analyses[scale.dimensions[d].id] = analyses[d];
                }
            }
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

std::vector<PersonalityReport> assess_sr(const CharacterProfile& character, Method method,
                                         const LikertScale& scale, const RolePlayConfig& config,
                                         ChatBackend& rpa, const Interviewer& interviewer,
                                         int runs, const SrOptions& sr_options,
                                         const AssessOptions& options) {
    (void)options;
    SrVariant variant;
    switch (method) {
        case Method::SR: variant = SrVariant::Plain; break;
        case Method::SR_CoT: variant = SrVariant::CoT; break;
        case Method::SR_ICL: variant = SrVariant::Icl; break;
        default:
            throw AssessmentError("method " + method_name(method) + " is not a self-report method");
    }
    std::vector<PersonalityReport> reports;
    for (int run = 1; run <= runs; ++run) {
        AnswerSheet sheet =
            sr_collect(character, scale, config, rpa, variant, interviewer, run, sr_options);
        PersonalityReport report;
        report.character_id = character.id;
        report.scale_id = scale.name;
        report.run_id = run;
        report.method = method;
        report.rpa_backend_id = rpa.id();
        report.interviewer_id = interviewer.backend->id();
        fill_from_sheet(report, scale, sheet);
        reports.push_back(std::move(report));
    }
    return reports;
}

void save_report(const PersonalityReport& report, const std::filesystem::path& path) {
    ordered_json doc;
    doc["character"] = report.character_id;
    doc["scale"] = report.scale_id;
    doc["run"] = report.run_id;
    doc["method"] = method_name(report.method);
    doc["rpa_backend"] = report.rpa_backend_id;
    doc["interviewer"] = report.interviewer_id;
    ordered_json scores = ordered_json::object();
    for (const auto& [dim, score] : report.dim_scores) {
        if (score) {
            scores[dim] = *score;
        } else {
            scores[dim] = nullptr;
        }
    }
    doc["dim_scores"] = std::move(scores);
    if (!report.item_codes.empty()) {
        ordered_json codes = ordered_json::object();
        for (const auto& [item, code] : report.item_codes) {
            if (code) {
                codes[item] = *code;
            } else {
                codes[item] = "REFUSED";
            }
        }
        doc["item_codes"] = std::move(codes);
    }
    if (!report.dim_analyses.empty()) {
        doc["dim_analyses"] = report.dim_analyses;
    }
    write_file_atomic(path, doc.dump(2) + "\n");
}

PersonalityReport load_report(const std::filesystem::path& path) {
    const json doc = json::parse(read_file(path));
    PersonalityReport report;
    report.character_id = doc.at("character").get<std::string>();
    report.scale_id = doc.at("scale").get<std::string>();
    report.run_id = doc.at("run").get<int>();
    report.method = parse_method(doc.at("method").get<std::string>());
    report.rpa_backend_id = doc.value("rpa_backend", "");
    report.interviewer_id = doc.value("interviewer", "");
    for (auto it = doc.at("dim_scores").begin(); it != doc.at("dim_scores").end(); ++it) {
        if (it.value().is_null()) {
            report.dim_scores[it.key()] = std::nullopt;
        } else {
            report.dim_scores[it.key()] = it.value().get<double>();
        }
    }
    if (doc.contains("item_codes")) {
        for (auto it = doc["item_codes"].begin(); it != doc["item_codes"].end(); ++it) {
            if (it.value().is_string()) {
                report.item_codes[it.key()] = std::nullopt;
            } else {
                report.item_codes[it.key()] = it.value().get<int>();
            }
        }
    }
    if (doc.contains("dim_analyses")) {
        for (auto it = doc["dim_analyses"].begin(); it != doc["dim_analyses"].end(); ++it) {
            report.dim_analyses[it.key()] = it.value().get<std::vector<std::string>>();
        }
    }
    return report;
}

}  // namespace incharacter
