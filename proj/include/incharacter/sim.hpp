#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incharacter/assessment.hpp"
#include "incharacter/chat.hpp"
#include "incharacter/persona.hpp"
#include "incharacter/scales.hpp"

namespace incharacter {

struct PersonaSpec {
    std::string id;
    std::map<std::string, double> levels;  // dimension id -> ground truth in [0,1]
    std::string style = "verbose";         // verbose: phrase replies; terse: bare codes in SR
    double refusal_rate = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

std::vector<PersonaSpec> load_persona_suite(const std::filesystem::path& path);
void save_persona_suite(const std::vector<PersonaSpec>& personas,
                        const std::filesystem::path& path);

CharacterProfile persona_profile(const PersonaSpec& persona);

/// Canonical stance phrasings per option code with an exact inverse lookup.
/// Phrase sets are disjoint across codes by construction.
class StancePhraseBank {
public:
    static StancePhraseBank for_range(int min_code, int max_code);

    const std::vector<std::string>& phrases(int code) const;
    const std::vector<std::string>& refusal_phrases() const;

    /// Finds a known stance phrase inside free text; nullopt when none (or a
    /// refusal phrase) is present.
    std::optional<int> invert(const std::string& text) const;
    bool is_refusal(const std::string& text) const;

    int min_code() const { return min_code_; }
    int max_code() const { return max_code_; }

private:
    int min_code_ = 0;
    int max_code_ = 0;
    std::map<int, std::vector<std::string>> phrases_;
    std::vector<std::string> refusals_;
};

/// Deterministic RPA: maps each question or self-report statement to its item,
/// plants the option code round(min + level * (max - min)) (reflected for
/// negative items) and replies with a phrase-bank stance. Questions that do
/// not map to a known item raise an error.
class ScriptedRpaBackend : public ChatBackend {
public:
    ScriptedRpaBackend(PersonaSpec persona, const LikertScale& scale);
    std::string id() const override;
    std::string model() const override;
    std::string complete(const ChatRequest& request) override;

    int planted_code(const ScaleItem& item) const;

private:
    PersonaSpec persona_;
    const LikertScale& scale_;
    StancePhraseBank bank_;
};

/// Deterministic interviewer: inverts the phrase bank. OC/d-OC prompts get
/// exact stance codes as a JSON map, ER prompts the polarity-corrected mean
/// stance mapped into the requested score range, extraction prompts the bare
/// code. Refusals and unrecognized phrases surface as "x".
class ScriptedInterviewerBackend : public ChatBackend {
public:
    explicit ScriptedInterviewerBackend(const LikertScale& scale, std::string id = "sim-interviewer");
    std::string id() const override;
    std::string model() const override;
    std::string complete(const ChatRequest& request) override;

private:
    const LikertScale& scale_;
    std::string id_;
    StancePhraseBank bank_;
};

struct RoundTripOptions {
    int runs = 3;
    int parallelism = 1;
    RegenPolicy policy;
    std::string experimenter = "Experimenter";
};

struct RoundTripReport {
    std::string scale_id;
    Method method = Method::OC;
    std::optional<double> acc_dim;
    std::optional<double> mae;
    std::optional<double> std_score;
    // persona -> dimension -> run-averaged recovered score (null = MISSING)
    std::map<std::string, std::map<std::string, std::optional<double>>> recovered;
    nlohmann::ordered_json to_json() const;
};

/// Interview -> assess -> metrics end to end with scripted backends.
RoundTripReport round_trip_check(const std::vector<PersonaSpec>& personas,
                                 const LikertScale& scale, Method method,
                                 const PromptLibrary& prompts,
                                 const RoundTripOptions& options = {});

/// Ground-truth labels implied by the planted levels (PDb thresholds).
std::vector<GroundTruthLabel> planted_labels(const std::vector<PersonaSpec>& personas,
                                             const LikertScale& scale);

}  // namespace incharacter
