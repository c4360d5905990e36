#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incharacter/chat.hpp"
#include "incharacter/persona.hpp"
#include "incharacter/scales.hpp"

namespace incharacter {

struct InterviewQuestion {
    std::string item_id;
    std::string text;
    bool adapted = false;
    std::string language = "en";
};

struct InterviewRecord {
    std::string character_id;
    std::string scale_id;
    int run_id = 1;
    std::string item_id;
    std::string question;      // as asked
    std::string raw_response;
    std::string response;      // cleaned
    std::string timestamp;
    std::string backend_id;
    bool failed = false;
};

struct Transcript {
    std::string character_id;
    std::string scale_id;
    std::vector<InterviewRecord> records;

    int runs() const;
    std::vector<const InterviewRecord*> run_records(int run_id) const;
};

struct RolePlayConfig {
    bool use_description = true;
    bool use_memory = true;
    int memory_top_k = 8;
    std::string experimenter = "Experimenter";
    std::string language = "en";
};

/// One question per item, |Q| = |P|; the registry open_question is the
/// default, an overrides map (item id -> text) wins where present.
std::vector<InterviewQuestion> build_question_list(
    const LikertScale& scale,
    const std::map<std::string, std::string>* overrides = nullptr);

std::map<std::string, std::string> load_question_overrides(const std::filesystem::path& path);

/// Asks the backend to flag concepts outside the character's knowledge and
/// minimally rewrite. On backend failure a question passes through unchanged
/// and a warning is recorded.
std::vector<InterviewQuestion> adapt_questions(const CharacterProfile& character,
                                               const std::vector<InterviewQuestion>& questions,
                                               ChatBackend& backend,
                                               const std::string& adapt_template,
                                               std::vector<std::string>* warnings = nullptr);

/// Top-k memory snippets by shared-word count against the question;
/// deterministic, ties broken by original order.
std::vector<const MemorySnippet*> retrieve_memory(const std::string& question,
                                                  const std::vector<MemorySnippet>& memories,
                                                  int k);

std::string build_system_prompt(const CharacterProfile& character, const RolePlayConfig& config,
                                const std::string& question);

/// Strips fabricated extra turns (lines that re-introduce the experimenter
/// speaker tag) and collapses verbatim repeated trailing blocks. Idempotent.
std::string clean_response(const std::string& raw,
                           const std::string& experimenter = "Experimenter");

struct InterviewOptions {
    int parallelism = 1;
    double temperature = 0.7;
    int max_tokens = 1024;
    // When set, the transcript is persisted here before run_interview returns.
    std::filesystem::path transcript_path;
};

/// R x |Q| records, each request carrying only the persona system prompt and
/// the single question. Per-question failures are recorded as FAILED; a run
/// with every question failed is a hard error.
Transcript run_interview(const CharacterProfile& character, const LikertScale& scale,
                         const std::vector<InterviewQuestion>& questions,
                         const RolePlayConfig& config, ChatBackend& backend, int runs,
                         const InterviewOptions& options = {});

void save_transcript(const Transcript& transcript, const std::filesystem::path& path);
Transcript load_transcript(const std::filesystem::path& path);

}  // namespace incharacter
