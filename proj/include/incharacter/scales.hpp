#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace incharacter {

enum class Polarity { Positive, Negative };
enum class Aggregation { Average, Sum };

/// Ground-truth and measured categories. classify_type never yields Marginal;
/// it exists for labels whose score sits between the 40%/60% thresholds.
enum class TypeLabel { Positive, Negative, Marginal };

std::string to_string(Polarity p);
std::string to_string(TypeLabel t);

struct ScoreRange {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    double midpoint() const { return (lo + hi) / 2.0; }
};

struct LikertOption {
    int code = 0;
    std::string label;
    // dimension id -> descriptive label, e.g. 4 -> "Extroverted". Present on
    // every option for every dimension when the scale is d-OC capable.
    std::map<std::string, std::string> doc_labels;
};

struct ScaleItem {
    std::string id;
    std::string statement;
    std::string open_question;
    std::string dimension;
    Polarity polarity = Polarity::Positive;
    std::string language = "en";
};

struct DimensionSpec {
    std::string id;
    std::string name;
    std::string description;
    std::string positive_pole;
    std::string negative_pole;
};

struct ScoringSpec {
    Aggregation aggregation = Aggregation::Average;
    int min_code = 1;
    int max_code = 5;
    // 16P-style dimensions scored 0-100 toward the positive pole.
    bool percentage_mode = false;
};

class ScaleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LikertScale {
public:
    std::string name;
    std::string version;
    std::vector<std::string> languages;
    std::vector<LikertOption> options;
    std::vector<DimensionSpec> dimensions;
    std::vector<ScaleItem> items;
    ScoringSpec scoring;

    const ScaleItem* find_item(const std::string& item_id) const;
    const DimensionSpec* find_dimension(const std::string& dimension_id) const;
    const LikertOption* find_option(int code) const;
    std::vector<const ScaleItem*> items_of(const std::string& dimension_id) const;

    ScoreRange option_range() const;
    ScoreRange score_range(const std::string& dimension_id) const;

    /// True when every option carries a descriptive label for every dimension.
    bool doc_capable() const;

    /// Throws ScaleError naming the offending field on any invariant breach.
    void validate() const;
};

LikertScale parse_scale(const nlohmann::json& doc);
LikertScale load_scale(const std::filesystem::path& path);

struct AnswerSheet {
    std::string character_id;
    int run_id = 1;
    // item id -> option code; nullopt marks a refusal (the "x" marker).
    std::map<std::string, std::optional<int>> entries;
};

/// Reverse coding: positive items keep the code, negative items reflect it
/// as min + max - code, which fixes the midpoint.
double item_score(int code, Polarity polarity, int min_code, int max_code);
double item_score(int code, Polarity polarity, const ScoringSpec& scoring);

/// Per-dimension aggregate over non-refused items. Dimensions with zero
/// scored items come back as nullopt (MISSING), never fabricated.
std::map<std::string, std::optional<double>> apply_scoring(const LikertScale& scale,
                                                           const AnswerSheet& sheet);

/// Strictly above the range midpoint is Positive; ties classify Negative.
TypeLabel classify_type(double score, const ScoreRange& range);

}  // namespace incharacter
