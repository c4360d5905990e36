#include "incharacter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace incharacter {

namespace {

double mean_of(const std::vector<double>& values) {
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

std::optional<double> mean_or_nullopt(const std::vector<double>& values) {
    if (values.empty()) {
        return std::nullopt;
    }
    return mean_of(values);
}

}  // namespace

double population_std(const std::vector<double>& values) {
    const double mean = mean_of(values);
    double acc = 0.0;
    for (double v : values) {
        acc += (v - mean) * (v - mean);
    }
    return std::sqrt(acc / static_cast<double>(values.size()));
}

void ScoreTensor::set(const std::string& character, const std::string& dimension, int run,
                      std::optional<double> score) {
    values[{character, dimension, run}] = score;
}

std::optional<double> ScoreTensor::get(const std::string& character,
                                       const std::string& dimension, int run) const {
    auto it = values.find({character, dimension, run});
    if (it == values.end()) {
        return std::nullopt;
    }
    return it->second;
}

void ItemTensor::set(const std::string& character, const std::string& item, int run,
                     std::optional<double> score) {
    values[{character, item, run}] = score;
}

std::optional<double> ItemTensor::get(const std::string& character, const std::string& item,
                                      int run) const {
    auto it = values.find({character, item, run});
    if (it == values.end()) {
        return std::nullopt;
    }
    return it->second;
}

double normalize_score(double score, const ScoreRange& range) {
    if (range.length() <= 0.0) {
        throw std::runtime_error("normalize_score: zero-length range");
    }
    return (score - range.lo) / range.length();
}

std::map<std::pair<std::string, std::string>, std::optional<double>> run_average(
    const ScoreTensor& tensor) {
    std::map<std::pair<std::string, std::string>, std::optional<double>> result;
    for (const auto& character : tensor.characters) {
        for (const auto& dimension : tensor.dimensions) {
            std::vector<double> values;
            for (int run = 1; run <= tensor.runs; ++run) {
                if (auto v = tensor.get(character, dimension, run)) {
                    values.push_back(*v);
                }
            }
            result[{character, dimension}] = mean_or_nullopt(values);
        }
    }
    return result;
}

std::optional<double> mae_metric(const ScoreTensor& measured,
                                 const std::vector<GroundTruthLabel>& labels,
                                 MetricCounts* counts) {
    const auto averaged = run_average(measured);
    std::map<std::pair<std::string, std::string>, double> label_scores;
    for (const auto& label : labels) {
        if (label.score) {
            label_scores[{label.character_id, label.dimension_id}] = *label.score;
        }
    }
    std::vector<double> errors;
    int skipped = 0;
    for (const auto& [key, score] : averaged) {
        auto it = label_scores.find(key);
        if (it == label_scores.end() || !score) {
            ++skipped;
            continue;
        }
        const auto& range = measured.dim_ranges.at(key.second);
        errors.push_back(std::abs(normalize_score(*score, range) - it->second) * 100.0);
    }
    if (counts != nullptr) {
        counts->used = static_cast<int>(errors.size());
        counts->skipped = skipped;
    }
    return mean_or_nullopt(errors);
}

AccuracyResult accuracy_metrics(const ScoreTensor& measured,
                                const std::vector<GroundTruthLabel>& labels) {
    const auto averaged = run_average(measured);
    std::map<std::pair<std::string, std::string>, TypeLabel> label_types;
    for (const auto& label : labels) {
        label_types[{label.character_id, label.dimension_id}] = label.type;
    }

    AccuracyResult result;
    std::vector<double> dim_hits;
    int full_matched = 0, full_total = 0;
    for (const auto& character : measured.characters) {
        int usable = 0, matched = 0;
        bool any_missing_measurement = false;
        for (const auto& dimension : measured.dimensions) {
            auto lt = label_types.find({character, dimension});
            if (lt == label_types.end() || lt->second == TypeLabel::Marginal) {
                continue;  // marginal dimensions are ignored
            }
            const auto score = averaged.at({character, dimension});
            if (!score) {
                any_missing_measurement = true;
                ++result.dim_pairs.skipped;
                continue;
            }
            const TypeLabel measured_type =
                classify_type(*score, measured.dim_ranges.at(dimension));
            ++usable;
            if (measured_type == lt->second) {
                ++matched;
            }
        }
        if (usable == 0) {
            // Nothing non-marginal (or nothing measured): out of both denominators.
            ++result.full_chars.skipped;
            continue;
        }
        for (int i = 0; i < matched; ++i) {
            dim_hits.push_back(100.0);
        }
        for (int i = 0; i < usable - matched; ++i) {
            dim_hits.push_back(0.0);
        }
        ++full_total;
        if (matched == usable && !any_missing_measurement) {
            ++full_matched;
        }
    }
    result.dim_pairs.used = static_cast<int>(dim_hits.size());
    result.full_chars.used = full_total;
    result.acc_dim = mean_or_nullopt(dim_hits);
    if (full_total > 0) {
        result.acc_full = 100.0 * full_matched / full_total;
    }
    return result;
}

std::optional<double> std_item_metric(const ItemTensor& items, MetricCounts* counts) {
    std::vector<double> per_character;
    int skipped = 0;
    for (const auto& character : items.characters) {
        std::vector<double> per_item;
        for (const auto& item : items.items) {
            std::vector<double> run_scores;
            for (int run = 1; run <= items.runs; ++run) {
                if (auto v = items.get(character, item, run)) {
                    run_scores.push_back(*v);
                }
            }
            if (run_scores.size() < 2) {
                ++skipped;
                continue;
            }
            per_item.push_back(population_std(run_scores) / items.option_range.length());
        }
        if (!per_item.empty()) {
            per_character.push_back(mean_of(per_item));
        }
    }
    if (counts != nullptr) {
        counts->used = static_cast<int>(per_character.size());
        counts->skipped = skipped;
    }
    auto result = mean_or_nullopt(per_character);
    if (result) {
        *result *= 100.0;
    }
    return result;
}

std::optional<double> std_dim_metric(const ItemTensor& items, MetricCounts* counts) {
    std::vector<std::string> dimensions;
    for (const auto& [item, dim] : items.item_dimension) {
        (void)item;
        if (std::find(dimensions.begin(), dimensions.end(), dim) == dimensions.end()) {
            dimensions.push_back(dim);
        }
    }
    std::sort(dimensions.begin(), dimensions.end());

    std::vector<double> per_character;
    int skipped = 0;
    for (const auto& character : items.characters) {
        std::vector<double> per_run;
        for (int run = 1; run <= items.runs; ++run) {
            std::vector<double> per_dim;
            for (const auto& dimension : dimensions) {
                std::vector<double> item_scores;
                for (const auto& item : items.items) {
                    if (items.item_dimension.at(item) != dimension) {
                        continue;
                    }
                    if (auto v = items.get(character, item, run)) {
                        item_scores.push_back(*v);
                    }
                }
                if (item_scores.size() < 2) {
                    ++skipped;
                    continue;
                }
                per_dim.push_back(population_std(item_scores) / items.option_range.length());
            }
            if (!per_dim.empty()) {
                per_run.push_back(mean_of(per_dim));
            }
        }
        if (!per_run.empty()) {
            per_character.push_back(mean_of(per_run));
        }
    }
    if (counts != nullptr) {
        counts->used = static_cast<int>(per_character.size());
        counts->skipped = skipped;
    }
    auto result = mean_or_nullopt(per_character);
    if (result) {
        *result *= 100.0;
    }
    return result;
}

std::optional<double> std_score_metric(const ScoreTensor& scores, MetricCounts* counts) {
    std::vector<double> per_character;
    int skipped = 0;
    for (const auto& character : scores.characters) {
        std::vector<double> per_dim;
        for (const auto& dimension : scores.dimensions) {
            std::vector<double> run_scores;
            for (int run = 1; run <= scores.runs; ++run) {
                if (auto v = scores.get(character, dimension, run)) {
                    run_scores.push_back(*v);
                }
            }
            if (run_scores.size() < 2) {
                ++skipped;
                continue;
            }
            per_dim.push_back(population_std(run_scores) /
                              scores.dim_ranges.at(dimension).length());
        }
        if (!per_dim.empty()) {
            per_character.push_back(mean_of(per_dim));
        }
    }
    if (counts != nullptr) {
        counts->used = static_cast<int>(per_character.size());
        counts->skipped = skipped;
    }
    auto result = mean_or_nullopt(per_character);
    if (result) {
        *result *= 100.0;
    }
    return result;
}

double graded_accuracy(long right, long close, long wrong) {
    if (right < 0 || close < 0 || wrong < 0 || right + close + wrong == 0) {
        throw std::runtime_error("graded_accuracy: counts must be non-negative with a positive sum");
    }
    const double total = static_cast<double>(right + close + wrong);
    return (static_cast<double>(right) + 0.5 * static_cast<double>(close)) / total * 100.0;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[order[t]] = rank;
        }
        i = j + 1;
    }
    return ranks;
}

std::optional<double> pearson_of(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    (void)n;
    if (sxx == 0.0 || syy == 0.0) {
        return std::nullopt;  // constant input
    }
    return sxy / std::sqrt(sxx * syy);
}

std::optional<double> kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) {
                continue;  // tied in both, enters neither denominator term
            }
            if (dx == 0.0) {
                ++ties_x;
            } else if (dy == 0.0) {
                ++ties_y;
            } else if (dx * dy > 0.0) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    const double denom = std::sqrt(static_cast<double>(concordant + discordant + ties_x)) *
                         std::sqrt(static_cast<double>(concordant + discordant + ties_y));
    if (denom == 0.0) {
        return std::nullopt;
    }
    return static_cast<double>(concordant - discordant) / denom;
}

}  // namespace

Correlations correlations(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::runtime_error("correlations: need equal-length vectors of length >= 2");
    }
    Correlations result;
    result.pearson = pearson_of(x, y);
    result.spearman = pearson_of(average_ranks(x), average_ranks(y));
    result.kendall = kendall_tau_b(x, y);
    return result;
}

std::optional<double> distinctiveness(const ScoreTensor& scores) {
    if (scores.characters.size() < 2) {
        throw std::runtime_error("distinctiveness: need at least 2 characters");
    }
    const auto averaged = run_average(scores);
    std::vector<double> per_dim;
    for (const auto& dimension : scores.dimensions) {
        std::vector<double> values;
        for (const auto& character : scores.characters) {
            if (auto v = averaged.at({character, dimension})) {
                values.push_back(*v);
            }
        }
        if (values.size() >= 2) {
            per_dim.push_back(population_std(values));
        }
    }
    return mean_or_nullopt(per_dim);
}

ChoiceDistribution choice_distribution(const std::vector<AnswerSheet>& sheets) {
    ChoiceDistribution dist;
    long total = 0;
    for (const auto& sheet : sheets) {
        for (const auto& [item, code] : sheet.entries) {
            (void)item;
            if (!code) {
                ++dist.refused;
                continue;
            }
            ++dist.counts[*code];
            ++total;
        }
    }
    for (const auto& [code, count] : dist.counts) {
        dist.probabilities[code] = total > 0 ? static_cast<double>(count) / total : 0.0;
    }
    return dist;
}

namespace {

// Cyclic Jacobi eigen-decomposition for small symmetric matrices.
void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& eigenvalues,
                  std::vector<std::vector<double>>& eigenvectors) {
    const std::size_t n = a.size();
    eigenvectors.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        eigenvectors[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += a[p][q] * a[p][q];
            }
        }
        if (off < 1e-24) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-18) {
                    continue;
                }
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = eigenvectors[k][p], vkq = eigenvectors[k][q];
                    eigenvectors[k][p] = c * vkp - s * vkq;
                    eigenvectors[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        eigenvalues[i] = a[i][i];
    }
}

}  // namespace

Pca2d pca_2d(const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 3 || rows.front().size() < 2) {
        throw std::runtime_error("pca_2d: need >= 3 rows and >= 2 columns");
    }
    const std::size_t n = rows.size();
    const std::size_t d = rows.front().size();
    for (const auto& row : rows) {
        if (row.size() != d) {
            throw std::runtime_error("pca_2d: ragged input");
        }
    }
    std::vector<double> means(d, 0.0);
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < d; ++j) {
            means[j] += row[j];
        }
    }
    for (auto& m : means) {
        m /= static_cast<double>(n);
    }
    std::vector<std::vector<double>> centered(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            centered[i][j] = rows[i][j] - means[j];
        }
    }
    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += centered[i][a] * centered[i][b];
            }
            cov[a][b] = acc / static_cast<double>(n - 1);
        }
    }

    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;
    jacobi_eigen(cov, eigenvalues, eigenvectors);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return eigenvalues[a] > eigenvalues[b]; });

    double trace = 0.0;
    for (double ev : eigenvalues) {
        trace += std::max(ev, 0.0);
    }

    Pca2d result;
    std::vector<std::vector<double>> axes(2, std::vector<double>(d, 0.0));
    for (std::size_t comp = 0; comp < 2; ++comp) {
        const std::size_t idx = order[comp];
        if (eigenvalues[idx] <= 1e-12) {
            result.rank_deficient = true;
            continue;  // axis stays zero
        }
        for (std::size_t j = 0; j < d; ++j) {
            axes[comp][j] = eigenvectors[j][idx];
        }
        // Deterministic sign: largest-magnitude loading positive.
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < d; ++j) {
            if (std::abs(axes[comp][j]) > std::abs(axes[comp][argmax])) {
                argmax = j;
            }
        }
        if (axes[comp][argmax] < 0.0) {
            for (auto& v : axes[comp]) {
                v = -v;
            }
        }
        result.explained_variance[comp] = trace > 0.0 ? eigenvalues[idx] / trace : 0.0;
    }
    result.coordinates.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t comp = 0; comp < 2; ++comp) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                acc += centered[i][j] * axes[comp][j];
            }
            result.coordinates[i][comp] = acc;
        }
    }
    return result;
}

}  // namespace incharacter
