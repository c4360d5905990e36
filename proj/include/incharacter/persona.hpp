#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incharacter/scales.hpp"

namespace incharacter {

struct MemorySnippet {
    std::string speaker;
    std::string text;
};

struct CharacterProfile {
    std::string id;
    std::vector<std::string> aliases;
    std::string description;
    std::vector<MemorySnippet> memories;
    std::string language = "en";
    std::string source;

    void validate() const;  // throws std::runtime_error
};

CharacterProfile parse_character(const nlohmann::json& doc);
CharacterProfile load_character(const std::filesystem::path& path);

struct PDbLabelRecord {
    std::string character_id;
    std::string scale_id;
    std::string dimension_id;
    // Positive-pole percentage in [0,1], either given directly or derived
    // from vote counts as positive / (positive + negative).
    double percentage = 0.0;
};

struct GroundTruthLabel {
    std::string character_id;
    std::string scale_id;
    std::string dimension_id;
    std::optional<double> score;  // in [0,1]; marginal labels may lack one
    TypeLabel type = TypeLabel::Marginal;
};

/// 0.60/0.40 thresholds; both boundaries fall into marginal.
std::vector<GroundTruthLabel> import_pdb(const std::vector<PDbLabelRecord>& records);

struct AnnotatorRecord {
    std::string annotator_id;
    std::string character_id;
    // dimension id -> raw score; nullopt is the "X" abstain marker.
    std::map<std::string, std::optional<double>> ratings;
};

/// Non-X scores are averaged and linearly rescaled to [0,1] using the
/// per-dimension annotation range; a dimension marked X by more than one
/// annotator becomes marginal with no score.
std::vector<GroundTruthLabel> aggregate_annotators(
    const std::vector<AnnotatorRecord>& records, const std::string& scale_id,
    const std::map<std::string, ScoreRange>& annotation_ranges);

enum class ScreenDecision { Accept, Explain, Reject };

struct ScreenResult {
    ScreenDecision decision = ScreenDecision::Reject;
    int differences = 0;
};

/// Candidate typing vs reference labels on non-marginal dimensions:
/// 0 differences accept, 1-2 explain, 3+ (or declared unfamiliarity) reject.
ScreenResult screen_annotator(const std::map<std::string, TypeLabel>& candidate_types,
                              const std::vector<GroundTruthLabel>& reference,
                              bool declared_unfamiliar = false);

/// Cohen's quadratic-weighted kappa over two ordinal vectors with values in
/// 1..levels. nullopt when expected disagreement is zero (both raters
/// constant at the same level).
std::optional<double> weighted_kappa(const std::vector<int>& rater_a,
                                     const std::vector<int>& rater_b, int levels);

std::vector<PDbLabelRecord> load_pdb_records(const std::filesystem::path& path);

struct AnnotatorImport {
    std::string scale_id;
    std::map<std::string, ScoreRange> ranges;
    std::vector<AnnotatorRecord> records;
};

AnnotatorImport load_annotator_records(const std::filesystem::path& path);

std::vector<GroundTruthLabel> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<GroundTruthLabel>& labels,
                 const std::filesystem::path& path);

}  // namespace incharacter
