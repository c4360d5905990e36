#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incharacter/chat.hpp"
#include "incharacter/interview.hpp"
#include "incharacter/persona.hpp"
#include "incharacter/prompts.hpp"
#include "incharacter/scales.hpp"

namespace incharacter {

enum class Method { SR, SR_CoT, SR_ICL, OC, DOC, ER_All, ER_Batch };

Method parse_method(const std::string& name);
std::string method_name(Method method);
bool method_uses_transcript(Method method);
bool method_has_item_codes(Method method);

struct RegenPolicy {
    double initial_temperature = 0.0;
    double retry_temperature = 0.2;
    int max_regenerations = 3;  // >= 1
    bool token_limit_split = true;
    int batch_sample_budget = 20;  // samples per interviewer request when splitting
};

struct DimScoreJudgment {
    std::string dimension_id;
    double score = 0.0;
    std::string analysis;
    int batch_index = -1;
};

struct PersonalityReport {
    std::string character_id;
    std::string scale_id;
    int run_id = 1;
    Method method = Method::OC;
    std::string rpa_backend_id;
    std::string interviewer_id;
    std::map<std::string, std::optional<double>> dim_scores;        // nullopt = MISSING
    std::map<std::string, std::optional<int>> item_codes;           // SR/OC/d-OC only
    std::map<std::string, std::vector<std::string>> dim_analyses;   // ER only
};

void save_report(const PersonalityReport& report, const std::filesystem::path& path);
PersonalityReport load_report(const std::filesystem::path& path);

/// A question-response pair feeding the interviewer.
struct QaPair {
    std::string item_id;
    std::string question;
    std::string response;
};

/// Interviewer backend plus prompt templates and regeneration policy.
struct Interviewer {
    ChatBackend* backend = nullptr;
    const PromptLibrary* prompts = nullptr;
    RegenPolicy policy;
    int max_tokens = 1024;
};

class AssessmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every alias occurrence (case-insensitive, longest first) becomes
/// "the participant". Idempotent.
std::string anonymize(std::string text, const std::vector<std::string>& aliases);

/// First JSON object in raw, validated against expected key types
/// ("number" | "string" | "object" | "percentage-map"). Throws
/// AssessmentError when extraction or validation fails, signalling the
/// caller to regenerate.
nlohmann::json parse_llm_json(const std::string& raw,
                              const std::map<std::string, std::string>& expected);

/// One option code, or nullopt (REFUSED) on the interviewer's "x" marker or
/// once the regeneration budget is exhausted.
std::optional<int> extract_choice(const std::string& response, const LikertScale& scale,
                                  const Interviewer& interviewer);

enum class SrVariant { Plain, CoT, Icl };

struct SrOptions {
    int runs = 1;
    int parallelism = 1;
    double rpa_temperature = 0.7;
    int max_tokens = 1024;
};

/// One isolated exchange per item; bare numbers are taken verbatim, anything
/// else goes through extract_choice; refusals are imputed as the midpoint
/// option; backend failures leave the item REFUSED.
AnswerSheet sr_collect(const CharacterProfile& character, const LikertScale& scale,
                       const RolePlayConfig& config, ChatBackend& rpa, SrVariant variant,
                       const Interviewer& interviewer, int run_id, const SrOptions& options = {});

/// Batched option conversion over all pairs (split per policy); the prompt
/// carries the character name (OC is not anonymized).
AnswerSheet oc_convert(const std::vector<QaPair>& pairs, const LikertScale& scale,
                       const CharacterProfile& character, const Interviewer& interviewer);

/// Per-dimension option conversion with the dimension's descriptive labels;
/// prompts are anonymized.
AnswerSheet doc_convert(const std::vector<QaPair>& pairs, const LikertScale& scale,
                        const CharacterProfile& character, const Interviewer& interviewer);

enum class ErMode { All, Batch };

/// Consecutive batches of 3-4 in item order (n=5 falls back to [3,2];
/// n<3 is a single short batch).
std::vector<int> er_batch_sizes(int n);

/// One judgment per batch; ErMode::All sends everything at once (splitting
/// only on the sample budget). Prompts are anonymized.
std::vector<DimScoreJudgment> er_rate(const std::string& dimension_id,
                                      const std::vector<QaPair>& pairs, const LikertScale& scale,
                                      const CharacterProfile& character,
                                      const Interviewer& interviewer, ErMode mode,
                                      const std::string& experimenter,
                                      const std::string& language);

struct AssessOptions {
    std::string experimenter = "Experimenter";
    std::string language = "English";
    int parallelism = 1;
};

/// Interview methods: one report per transcript run. FAILED records
/// propagate as REFUSED.
std::vector<PersonalityReport> assess_transcript(const Transcript& transcript,
                                                 const CharacterProfile& character,
                                                 Method method, const LikertScale& scale,
                                                 const Interviewer& interviewer,
                                                 const AssessOptions& options = {});

/// Self-report methods run live against the RPA backend, one report per run.
std::vector<PersonalityReport> assess_sr(const CharacterProfile& character, Method method,
                                         const LikertScale& scale, const RolePlayConfig& config,
                                         ChatBackend& rpa, const Interviewer& interviewer,
                                         int runs, const SrOptions& sr_options = {},
                                         const AssessOptions& options = {});

std::string language_name(const std::string& tag);

}  // namespace incharacter
