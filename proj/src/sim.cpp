#include "incharacter/sim.hpp"

#include <algorithm>
#include <cmath>

#include "incharacter/io.hpp"
#include "incharacter/metrics.hpp"

namespace incharacter {

using nlohmann::json;
using nlohmann::ordered_json;

void PersonaSpec::validate() const {
    if (id.empty()) {
        throw std::runtime_error("persona has empty id");
    }
    for (const auto& [dim, level] : levels) {
        if (level < 0.0 || level > 1.0) {
            throw std::runtime_error("persona '" + id + "' level on '" + dim +
                                     "' outside [0,1]");
        }
    }
    if (refusal_rate < 0.0 || refusal_rate > 1.0) {
        throw std::runtime_error("persona '" + id + "' refusal rate outside [0,1]");
    }
}

std::vector<PersonaSpec> load_persona_suite(const std::filesystem::path& path) {
    const json doc = json::parse(read_file(path));
    std::vector<PersonaSpec> personas;
    for (const auto& p : doc.at("personas")) {
        PersonaSpec persona;
        persona.id = p.at("id").get<std::string>();
        for (auto it = p.at("levels").begin(); it != p.at("levels").end(); ++it) {
            persona.levels[it.key()] = it.value().get<double>();
        }
        persona.style = p.value("style", "verbose");
        persona.refusal_rate = p.value("refusal_rate", 0.0);
        persona.seed = p.value("seed", 0ull);
        persona.validate();
        personas.push_back(std::move(persona));
    }
    return personas;
}

void save_persona_suite(const std::vector<PersonaSpec>& personas,
                        const std::filesystem::path& path) {
    ordered_json doc;
    doc["personas"] = json::array();
    for (const auto& persona : personas) {
        ordered_json p;
        p["id"] = persona.id;
        p["levels"] = persona.levels;
        p["style"] = persona.style;
        p["refusal_rate"] = persona.refusal_rate;
        p["seed"] = persona.seed;
        doc["personas"].push_back(std::move(p));
    }
    write_file_atomic(path, doc.dump(2) + "\n");
}

CharacterProfile persona_profile(const PersonaSpec& persona) {
    CharacterProfile profile;
    profile.id = persona.id;
    profile.aliases = {persona.id};
    profile.description = "You are " + persona.id +
                          ", a study participant who answers every question plainly and in full "
                          "sentences, always staying true to your own temperament.";
    profile.language = "en";
    profile.source = "sim";
    return profile;
}

namespace {

// Nine intensity tiers from strongest disagreement to strongest agreement,
// three phrasings each. No phrase is a substring of another.
const std::vector<std::vector<std::string>>& tier_lexicon() {
    static const std::vector<std::vector<std::string>> tiers = {
        {"Absolutely not; nothing about that rings true for me.",
         "I reject that idea completely, it is the opposite of who I am.",
         "No, emphatically no, that never happens with me."},
        {"No, that is largely untrue of me.",
         "That hardly ever applies to me.",
         "For the most part I would say no to that."},
        {"Not really; it is mostly unlike me.",
         "I lean toward no on that question.",
         "More often than not, that is not how I am."},
        {"Somewhat no, though there are exceptions.",
         "Slightly against, on balance, I suppose.",
         "A shade more no than yes, if pressed."},
        {"I am genuinely torn; sometimes yes, sometimes no.",
         "It depends on the day, honestly, I sit right in the middle.",
         "Neither yes nor no feels right; call it even."},
        {"Somewhat yes, though not in every case.",
         "Slightly in favor, taking everything together.",
         "A shade more yes than no, I would say."},
        {"More often than not, yes, that is me.",
         "I lean clearly toward yes on that.",
         "Mostly true of me, on the whole."},
        {"Yes, that is true of me in nearly every case.",
         "That describes me well, I agree.",
         "Quite so; it is very much my way."},
        {"Without any doubt, that captures me perfectly.",
         "Completely and utterly yes, through and through.",
         "I could not agree more strongly with that."},
    };
    return tiers;
}

const std::vector<std::string>& refusal_lexicon() {
    static const std::vector<std::string> refusals = {
        "I decline to entertain such questioning.",
        "This interrogation is beneath me, and I will not answer.",
        "No answer shall you have from me on that matter.",
    };
    return refusals;
}

int round_half_up(double value) {
    return static_cast<int>(std::floor(value + 0.5));
}

}  // namespace

StancePhraseBank StancePhraseBank::for_range(int min_code, int max_code) {
    if (max_code - min_code + 1 > 9 || max_code <= min_code) {
        throw std::runtime_error("phrase bank supports 2..9 option codes");
    }
    StancePhraseBank bank;
    bank.min_code_ = min_code;
    bank.max_code_ = max_code;
    bank.refusals_ = refusal_lexicon();
    const auto& tiers = tier_lexicon();
    for (int code = min_code; code <= max_code; ++code) {
        const double t = static_cast<double>(code - min_code) / (max_code - min_code);
        bank.phrases_[code] = tiers[static_cast<std::size_t>(round_half_up(t * 8.0))];
    }
    return bank;
}

const std::vector<std::string>& StancePhraseBank::phrases(int code) const {
    auto it = phrases_.find(code);
    if (it == phrases_.end()) {
        throw std::runtime_error("phrase bank has no code " + std::to_string(code));
    }
    return it->second;
}

const std::vector<std::string>& StancePhraseBank::refusal_phrases() const {
    return refusals_;
}

std::optional<int> StancePhraseBank::invert(const std::string& text) const {
    for (const auto& [code, phrases] : phrases_) {
        for (const auto& phrase : phrases) {
            if (text.find(phrase) != std::string::npos) {
                return code;
            }
        }
    }
    return std::nullopt;
}

bool StancePhraseBank::is_refusal(const std::string& text) const {
    for (const auto& phrase : refusals_) {
        if (text.find(phrase) != std::string::npos) {
            return true;
        }
    }
    return false;
}

ScriptedRpaBackend::ScriptedRpaBackend(PersonaSpec persona, const LikertScale& scale)
    : persona_(std::move(persona)),
      scale_(scale),
      bank_(StancePhraseBank::for_range(scale.scoring.min_code, scale.scoring.max_code)) {
    persona_.validate();
    for (const auto& dim : scale_.dimensions) {
        if (!persona_.levels.count(dim.id)) {
            throw std::runtime_error("persona '" + persona_.id +
                                     "' lacks a level for dimension '" + dim.id + "'");
        }
    }
}

std::string ScriptedRpaBackend::id() const {
    return "sim-rpa:" + persona_.id;
}

std::string ScriptedRpaBackend::model() const {
    return "scripted-rpa:" + persona_.id;
}

int ScriptedRpaBackend::planted_code(const ScaleItem& item) const {
    const double level = persona_.levels.at(item.dimension);
    const int positive_code =
        scale_.scoring.min_code +
        round_half_up(level * (scale_.scoring.max_code - scale_.scoring.min_code));
    if (item.polarity == Polarity::Positive) {
        return positive_code;
    }
    return scale_.scoring.min_code + scale_.scoring.max_code - positive_code;
}

std::string ScriptedRpaBackend::complete(const ChatRequest& request) {
    std::string user;
    for (const auto& message : request.messages) {
        if (message.role == "user") {
            user = message.content;
        }
    }
    if (user.empty()) {
        throw ChatError("scripted RPA: request carries no user message");
    }

    // Locate the item: self-report prompts embed the statement, interview
    // requests are the bare open question.
    const ScaleItem* matched = nullptr;
    const bool is_sr = user.find("Do you think that the statement") != std::string::npos;
    if (is_sr) {
        std::size_t best_len = 0;
        for (const auto& item : scale_.items) {
            if (item.statement.size() > best_len &&
                user.find(item.statement) != std::string::npos) {
                matched = &item;
                best_len = item.statement.size();
            }
        }
    } else {
        const std::string question = trim(user);
        for (const auto& item : scale_.items) {
            if (question == item.open_question) {
                matched = &item;
                break;
            }
        }
    }
    if (matched == nullptr) {
        throw ChatError("scripted RPA for '" + persona_.id +
                        "' cannot map the request to a scale item: " + user.substr(0, 120));
    }

    const std::string key = matched->id + "|" + request.salt;
    const std::uint64_t hash =
        fnv1a64(key, fnv1a64(persona_.id, persona_.seed + 0x9e3779b97f4a7c15ull));
    if (persona_.refusal_rate > 0.0 &&
        hash_unit(fnv1a64("refuse", hash)) < persona_.refusal_rate) {
        const auto& refusals = bank_.refusal_phrases();
        return refusals[fnv1a64("rvar", hash) % refusals.size()];
    }

    const int code = planted_code(*matched);
    if (is_sr && persona_.style == "terse") {
        return std::to_string(code);
    }
    const auto& phrases = bank_.phrases(code);
    return phrases[fnv1a64("var", hash) % phrases.size()];
}

ScriptedInterviewerBackend::ScriptedInterviewerBackend(const LikertScale& scale, std::string id)
    : scale_(scale),
      id_(std::move(id)),
      bank_(StancePhraseBank::for_range(scale.scoring.min_code, scale.scoring.max_code)) {}

std::string ScriptedInterviewerBackend::id() const {
    return id_;
}

std::string ScriptedInterviewerBackend::model() const {
    return "scripted-interviewer";
}

std::string ScriptedInterviewerBackend::complete(const ChatRequest& request) {
    std::string prompt;
    for (const auto& message : request.messages) {
        if (message.role == "user") {
            prompt = message.content;
            break;  // the original prompt, not a regeneration nudge
        }
    }

    if (prompt.find("===INPUT===") != std::string::npos) {
        // OC / d-OC: one stance code per sample.
        const auto start = prompt.find("===INPUT===");
        const auto doc = extract_first_json(prompt.substr(start));
        if (!doc) {
            return "x";
        }
        ordered_json reply = ordered_json::object();
        for (auto it = doc->begin(); it != doc->end(); ++it) {
            const std::string response = it.value().at("conversation").at(1).get<std::string>();
            if (bank_.is_refusal(response)) {
                reply[it.key()] = "x";
                continue;
            }
            const auto code = bank_.invert(response);
            reply[it.key()] = code ? json(*code) : json("x");
        }
        return reply.dump();
    }

    if (prompt.find("===CONVERSATIONS===") != std::string::npos) {
        // ER: polarity-corrected mean stance mapped into the requested range.
        std::vector<double> levels;
        const auto lines = split_lines(prompt.substr(prompt.find("===CONVERSATIONS===")));
        std::string pending_question;
        for (const auto& line : lines) {
            const auto sep = line.find(": ");
            if (sep == std::string::npos) {
                continue;
            }
            const std::string speaker = line.substr(0, sep);
            const std::string text = line.substr(sep + 2);
            if (speaker == "the participant") {
                if (bank_.is_refusal(text)) {
                    pending_question.clear();
                    continue;
                }
                const auto code = bank_.invert(text);
                const ScaleItem* matched = nullptr;
                for (const auto& item : scale_.items) {
                    if (pending_question.find(item.open_question) != std::string::npos) {
                        matched = &item;
                        break;
                    }
                }
                if (code && matched != nullptr) {
                    const double corrected =
                        item_score(*code, matched->polarity, scale_.scoring);
                    levels.push_back((corrected - scale_.scoring.min_code) /
                                     (scale_.scoring.max_code - scale_.scoring.min_code));
                }
                pending_question.clear();
            } else {
                pending_question = text;
            }
        }
        if (levels.empty()) {
            return "x";
        }
        double mean = 0.0;
        for (double level : levels) {
            mean += level;
        }
        mean /= static_cast<double>(levels.size());

        const DimensionSpec* dim = nullptr;
        for (const auto& candidate : scale_.dimensions) {
            if (prompt.find("the " + candidate.name + " dimension") != std::string::npos) {
                dim = &candidate;
                break;
            }
        }
        ordered_json reply;
        reply["analysis"] = "Scripted inversion of the planted stances.";
        if (prompt.find("percentage of each category") != std::string::npos && dim != nullptr) {
            const double positive = mean * 100.0;
            reply["result"] = {{dim->positive_pole, format_score(positive) + "%"},
                               {dim->negative_pole, format_score(100.0 - positive) + "%"}};
        } else {
            ScoreRange range{static_cast<double>(scale_.scoring.min_code),
                             static_cast<double>(scale_.scoring.max_code)};
            if (dim != nullptr) {
                range = scale_.score_range(dim->id);
            }
            reply["result"] = range.lo + mean * range.length();
        }
        return reply.dump();
    }

    if (prompt.find("===REPLY===") != std::string::npos) {
        const auto start = prompt.find("===REPLY===\n") + 12;
        auto end = prompt.find("\n===", start);
        if (end == std::string::npos) {
            end = prompt.size();
        }
        const std::string reply = prompt.substr(start, end - start);
        if (bank_.is_refusal(reply)) {
            return "x";
        }
        const auto code = bank_.invert(reply);
        return code ? std::to_string(*code) : "x";
    }

    if (prompt.find("needs_adaptation") != std::string::npos) {
        return R"({"needs_adaptation": false, "adapted_question": ""})";
    }

    throw ChatError("scripted interviewer cannot recognize the prompt kind");
}

std::vector<GroundTruthLabel> planted_labels(const std::vector<PersonaSpec>& personas,
                                             const LikertScale& scale) {
    std::vector<PDbLabelRecord> records;
    for (const auto& persona : personas) {
        for (const auto& dim : scale.dimensions) {
            records.push_back({persona.id, scale.name, dim.id, persona.levels.at(dim.id)});
        }
    }
    return import_pdb(records);
}

nlohmann::ordered_json RoundTripReport::to_json() const {
    ordered_json doc;
    doc["scale"] = scale_id;
    doc["method"] = method_name(method);
    doc["acc_dim"] = acc_dim ? json(*acc_dim) : json(nullptr);
    doc["mae"] = mae ? json(*mae) : json(nullptr);
    doc["std_score"] = std_score ? json(*std_score) : json(nullptr);
    ordered_json rec = ordered_json::object();
    for (const auto& [persona, dims] : recovered) {
        ordered_json row = ordered_json::object();
        for (const auto& [dim, score] : dims) {
            row[dim] = score ? json(*score) : json(nullptr);
        }
        rec[persona] = std::move(row);
    }
    doc["recovered"] = std::move(rec);
    return doc;
}

RoundTripReport round_trip_check(const std::vector<PersonaSpec>& personas,
                                 const LikertScale& scale, Method method,
                                 const PromptLibrary& prompts,
                                 const RoundTripOptions& options) {
    RoundTripReport result;
    result.scale_id = scale.name;
    result.method = method;

    ScoreTensor tensor;
    tensor.runs = options.runs;
    for (const auto& dim : scale.dimensions) {
        tensor.dimensions.push_back(dim.id);
        tensor.dim_ranges[dim.id] = scale.score_range(dim.id);
    }

    ScriptedInterviewerBackend interviewer_backend(scale);
    Interviewer interviewer;
    interviewer.backend = &interviewer_backend;
    interviewer.prompts = &prompts;
    interviewer.policy = options.policy;

    RolePlayConfig config;
    config.experimenter = options.experimenter;
    config.use_memory = false;

    const auto questions = build_question_list(scale);
    for (const auto& persona : personas) {
        tensor.characters.push_back(persona.id);
        const CharacterProfile profile = persona_profile(persona);
        ScriptedRpaBackend rpa(persona, scale);

        std::vector<PersonalityReport> reports;
        if (method_uses_transcript(method)) {
            InterviewOptions interview_options;
            interview_options.parallelism = options.parallelism;
            const Transcript transcript = run_interview(profile, scale, questions, config, rpa,
                                                        options.runs, interview_options);
            AssessOptions assess_options;
            assess_options.experimenter = options.experimenter;
            assess_options.parallelism = options.parallelism;
            reports = assess_transcript(transcript, profile, method, scale, interviewer,
                                        assess_options);
        } else {
            SrOptions sr_options;
            sr_options.parallelism = options.parallelism;
            reports = assess_sr(profile, method, scale, config, rpa, interviewer, options.runs,
                                sr_options);
        }
        for (const auto& report : reports) {
            for (const auto& [dim, score] : report.dim_scores) {
                tensor.set(persona.id, dim, report.run_id, score);
            }
        }
    }

    const auto labels = planted_labels(personas, scale);
    result.mae = mae_metric(tensor, labels);
    const auto accuracy = accuracy_metrics(tensor, labels);
    result.acc_dim = accuracy.acc_dim;
    result.std_score = std_score_metric(tensor);
    const auto averaged = run_average(tensor);
    for (const auto& persona : personas) {
        for (const auto& dim : tensor.dimensions) {
            result.recovered[persona.id][dim] = averaged.at({persona.id, dim});
        }
    }
    return result;
}

}  // namespace incharacter
