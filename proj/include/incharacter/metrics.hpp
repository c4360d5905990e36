#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "incharacter/persona.hpp"
#include "incharacter/scales.hpp"

namespace incharacter {

/// Dimension scores indexed by (character, dimension, run); nullopt = MISSING.
struct ScoreTensor {
    std::vector<std::string> characters;
    std::vector<std::string> dimensions;
    int runs = 0;
    std::map<std::string, ScoreRange> dim_ranges;
    std::map<std::tuple<std::string, std::string, int>, std::optional<double>> values;

    void set(const std::string& character, const std::string& dimension, int run,
             std::optional<double> score);
    std::optional<double> get(const std::string& character, const std::string& dimension,
                              int run) const;
};

/// Item-level scores (reverse-coded) indexed by (character, item, run);
/// only SR/OC/d-OC produce these.
struct ItemTensor {
    std::vector<std::string> characters;
    std::vector<std::string> items;
    int runs = 0;
    std::map<std::string, std::string> item_dimension;  // item -> dimension
    ScoreRange option_range;
    std::map<std::tuple<std::string, std::string, int>, std::optional<double>> values;

    void set(const std::string& character, const std::string& item, int run,
             std::optional<double> score);
    std::optional<double> get(const std::string& character, const std::string& item,
                              int run) const;
};

struct MetricCounts {
    int used = 0;
    int skipped = 0;
};

struct MetricReport {
    std::optional<double> acc_dim;
    std::optional<double> acc_full;
    std::optional<double> mae;
    std::optional<double> std_item;   // nullopt when inapplicable (ER)
    std::optional<double> std_dim;    // nullopt when inapplicable (ER)
    std::optional<double> std_score;
    MetricCounts mae_pairs, acc_dim_pairs, acc_full_chars;
    MetricCounts std_item_pairs, std_dim_pairs, std_score_pairs;
};

double normalize_score(double score, const ScoreRange& range);

/// Scores averaged over non-missing runs, keyed by (character, dimension).
std::map<std::pair<std::string, std::string>, std::optional<double>> run_average(
    const ScoreTensor& tensor);

/// Mean |normalized measured - label score| * 100 over pairs with both sides
/// present; marginal labels still count when they carry a score.
std::optional<double> mae_metric(const ScoreTensor& measured,
                                 const std::vector<GroundTruthLabel>& labels,
                                 MetricCounts* counts = nullptr);

struct AccuracyResult {
    std::optional<double> acc_dim;
    std::optional<double> acc_full;
    MetricCounts dim_pairs;
    MetricCounts full_chars;
};

/// Type agreement on non-marginal label dimensions; characters without any
/// non-marginal dimension leave both denominators.
AccuracyResult accuracy_metrics(const ScoreTensor& measured,
                                const std::vector<GroundTruthLabel>& labels);

std::optional<double> std_item_metric(const ItemTensor& items, MetricCounts* counts = nullptr);
std::optional<double> std_dim_metric(const ItemTensor& items, MetricCounts* counts = nullptr);
std::optional<double> std_score_metric(const ScoreTensor& scores,
                                       MetricCounts* counts = nullptr);

/// (right + close/2) / total * 100.
double graded_accuracy(long right, long close, long wrong);

struct Correlations {
    std::optional<double> pearson;
    std::optional<double> spearman;
    std::optional<double> kendall;  // tau-b
};

Correlations correlations(const std::vector<double>& x, const std::vector<double>& y);

/// Mean over dimensions of the population std across characters, in raw
/// score units (run-averaged scores).
std::optional<double> distinctiveness(const ScoreTensor& scores);

struct ChoiceDistribution {
    std::map<int, long> counts;
    long refused = 0;
    std::map<int, double> probabilities;  // counts / total non-refused
};

ChoiceDistribution choice_distribution(const std::vector<AnswerSheet>& sheets);

struct Pca2d {
    std::vector<std::array<double, 2>> coordinates;
    std::array<double, 2> explained_variance = {0.0, 0.0};
    bool rank_deficient = false;
};

/// Column-mean centering, top-2 eigenvectors of the covariance, sign fixed so
/// each component's largest-magnitude loading is positive.
Pca2d pca_2d(const std::vector<std::vector<double>>& rows);

// Population standard deviation (divisor N).
double population_std(const std::vector<double>& values);

}  // namespace incharacter
