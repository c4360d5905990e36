#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "incharacter/assessment.hpp"
#include "incharacter/chat.hpp"
#include "incharacter/interview.hpp"
#include "incharacter/metrics.hpp"
#include "incharacter/persona.hpp"
#include "incharacter/prompts.hpp"
#include "incharacter/scales.hpp"
#include "incharacter/sim.hpp"

namespace incharacter {

struct RunConfig {
    std::vector<std::string> characters;  // character bundle files (or ids under data/characters)
    std::vector<std::string> scales;      // scale ids (bundled) or file paths
    std::vector<Method> methods;
    RolePlayConfig rp;
    BackendDescriptor rpa_backend;
    BackendDescriptor interviewer_backend;
    int runs = 3;
    std::filesystem::path out_dir = "out";
    std::filesystem::path data_dir;  // defaults to the bundled data directory
    std::filesystem::path labels_file;
    std::filesystem::path question_overrides;  // optional
    bool cache = true;
    bool adapt_questions = false;
    int parallelism = 1;
    double rate_limit_rps = 0.0;
    RegenPolicy regen;
    std::map<std::string, std::string> language_overrides;  // character id -> tag
    std::string persona_suite;  // sim backends: persona fixture file

    void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

std::filesystem::path transcript_path(const RunConfig& config, const std::string& character_id,
                                      const std::string& scale_id);
std::filesystem::path report_path(const RunConfig& config, const std::string& character_id,
                                  const std::string& scale_id, Method method, int run);

struct StageStats {
    long backend_calls = 0;  // requests that reached a real backend (cache misses)
    long cache_hits = 0;
    int artifacts_written = 0;
    int artifacts_reused = 0;
};

/// Resolves bundled scale ids or explicit paths.
LikertScale resolve_scale(const RunConfig& config, const std::string& name);
std::vector<CharacterProfile> resolve_characters(const RunConfig& config);

StageStats cmd_interview(const RunConfig& config);
StageStats cmd_assess(const RunConfig& config);

struct ReportOutputs {
    std::filesystem::path metrics_json;
    std::filesystem::path metrics_table;
    std::filesystem::path manifest;
    std::vector<std::filesystem::path> radar_csvs;
    std::vector<std::filesystem::path> pca_csvs;
};

ReportOutputs cmd_report(const RunConfig& config);

struct SimulateOutcome {
    bool pass = false;
    std::vector<std::string> lines;  // human-readable per-method results
};

SimulateOutcome cmd_simulate(const std::filesystem::path& suite_file,
                             const std::filesystem::path& data_dir,
                             const std::filesystem::path& out_dir);

/// Scale listing row for `scales list`.
struct ScaleSummary {
    std::string id;
    std::string name;
    std::string version;
    int items = 0;
    int dimensions = 0;
};

std::vector<ScaleSummary> list_bundled_scales(const std::filesystem::path& data_dir);

}  // namespace incharacter
