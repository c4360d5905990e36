#include "incharacter/persona.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "incharacter/io.hpp"

namespace incharacter {

namespace {

using nlohmann::json;

TypeLabel type_from_unit_score(double score) {
    if (score > 0.60) {
        return TypeLabel::Positive;
    }
    if (score < 0.40) {
        return TypeLabel::Negative;
    }
    return TypeLabel::Marginal;
}

}  // namespace

void CharacterProfile::validate() const {
    if (id.empty()) {
        throw std::runtime_error("character has empty id");
    }
    if (aliases.empty()) {
        throw std::runtime_error("character '" + id + "' has no aliases");
    }
    if (description.empty() && memories.empty()) {
        throw std::runtime_error("character '" + id + "' has neither description nor memories");
    }
}

CharacterProfile parse_character(const json& doc) {
    CharacterProfile profile;
    profile.id = doc.at("id").get<std::string>();
    for (const auto& alias : doc.at("aliases")) {
        profile.aliases.push_back(alias.get<std::string>());
    }
    profile.description = doc.value("description", "");
    if (doc.contains("memories")) {
        for (const auto& m : doc["memories"]) {
            profile.memories.push_back({m.at("speaker").get<std::string>(),
                                        m.at("text").get<std::string>()});
        }
    }
    profile.language = doc.value("language", "en");
    profile.source = doc.value("source", "");
    profile.validate();
    return profile;
}

CharacterProfile load_character(const std::filesystem::path& path) {
    return parse_character(json::parse(read_file(path)));
}

std::vector<GroundTruthLabel> import_pdb(const std::vector<PDbLabelRecord>& records) {
    std::vector<GroundTruthLabel> labels;
    labels.reserve(records.size());
    for (const auto& record : records) {
        if (record.percentage < 0.0 || record.percentage > 1.0) {
            throw std::runtime_error("PDb percentage outside [0,1] for character '" +
                                     record.character_id + "'");
        }
        GroundTruthLabel label;
        label.character_id = record.character_id;
        label.scale_id = record.scale_id;
        label.dimension_id = record.dimension_id;
        label.score = record.percentage;
        label.type = type_from_unit_score(record.percentage);
        labels.push_back(std::move(label));
    }
    return labels;
}

std::vector<GroundTruthLabel> aggregate_annotators(
    const std::vector<AnnotatorRecord>& records, const std::string& scale_id,
    const std::map<std::string, ScoreRange>& annotation_ranges) {
    // character -> dimension -> scores / abstain count
    std::map<std::string, std::map<std::string, std::vector<double>>> scores;
    std::map<std::string, std::map<std::string, int>> abstains;
    std::map<std::string, int> annotators_per_character;
    for (const auto& record : records) {
        ++annotators_per_character[record.character_id];
        for (const auto& [dim, rating] : record.ratings) {
            auto range_it = annotation_ranges.find(dim);
            if (range_it == annotation_ranges.end()) {
                throw std::runtime_error("no annotation range declared for dimension '" + dim +
                                         "'");
            }
            if (rating) {
                if (*rating < range_it->second.lo || *rating > range_it->second.hi) {
                    throw std::runtime_error("annotator '" + record.annotator_id +
                                             "' rating outside declared range on '" + dim + "'");
                }
                scores[record.character_id][dim].push_back(*rating);
            } else {
                ++abstains[record.character_id][dim];
            }
        }
    }
    if (records.empty()) {
        throw std::runtime_error("aggregate_annotators: zero annotator records");
    }

    std::vector<GroundTruthLabel> labels;
    for (const auto& [character, per_dim] : annotators_per_character) {
        (void)per_dim;
        for (const auto& [dim, range] : annotation_ranges) {
            GroundTruthLabel label;
            label.character_id = character;
            label.scale_id = scale_id;
            label.dimension_id = dim;
            const int x_count = abstains.count(character) && abstains[character].count(dim)
                                    ? abstains[character][dim]
                                    : 0;
            auto values = scores[character][dim];
            if (x_count > 1 || values.empty()) {
                label.type = TypeLabel::Marginal;
                label.score = std::nullopt;
            } else {
                // Summation order must not depend on annotator order.
                std::sort(values.begin(), values.end());
                double mean = 0.0;
                for (double v : values) {
                    mean += v;
                }
                mean /= static_cast<double>(values.size());
                const double unit = (mean - range.lo) / range.length();
                label.score = unit;
                label.type = type_from_unit_score(unit);
            }
            labels.push_back(std::move(label));
        }
    }
    return labels;
}

ScreenResult screen_annotator(const std::map<std::string, TypeLabel>& candidate_types,
                              const std::vector<GroundTruthLabel>& reference,
                              bool declared_unfamiliar) {
    if (declared_unfamiliar) {
        return {ScreenDecision::Reject, 0};
    }
    int differences = 0;
    for (const auto& label : reference) {
        if (label.type == TypeLabel::Marginal) {
            continue;
        }
        auto it = candidate_types.find(label.dimension_id);
        if (it == candidate_types.end()) {
            throw std::runtime_error("candidate missing dimension '" + label.dimension_id + "'");
        }
        if (it->second != label.type) {
            ++differences;
        }
    }
    if (differences == 0) {
        return {ScreenDecision::Accept, 0};
    }
    if (differences <= 2) {
        return {ScreenDecision::Explain, differences};
    }
    return {ScreenDecision::Reject, differences};
}

std::optional<double> weighted_kappa(const std::vector<int>& rater_a,
                                     const std::vector<int>& rater_b, int levels) {
    if (rater_a.size() != rater_b.size() || rater_a.size() < 2 || levels < 2) {
        throw std::runtime_error("weighted_kappa: need equal-length vectors (>= 2) and >= 2 levels");
    }
    const std::size_t k = static_cast<std::size_t>(levels);
    const double n = static_cast<double>(rater_a.size());
    std::vector<std::vector<double>> observed(k, std::vector<double>(k, 0.0));
    std::vector<double> marginal_a(k, 0.0), marginal_b(k, 0.0);
    for (std::size_t t = 0; t < rater_a.size(); ++t) {
        const int a = rater_a[t], b = rater_b[t];
        if (a < 1 || a > levels || b < 1 || b > levels) {
            throw std::runtime_error("weighted_kappa: rating outside 1..k");
        }
        observed[a - 1][b - 1] += 1.0 / n;
        marginal_a[a - 1] += 1.0 / n;
        marginal_b[b - 1] += 1.0 / n;
    }
    const double denom_w = static_cast<double>((levels - 1)) * (levels - 1);
    double weighted_observed = 0.0, weighted_expected = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double diff = static_cast<double>(i) - static_cast<double>(j);
            const double w = diff * diff / denom_w;
            weighted_observed += w * observed[i][j];
            weighted_expected += w * marginal_a[i] * marginal_b[j];
        }
    }
    if (weighted_expected == 0.0) {
        return std::nullopt;  // both raters constant at the same level
    }
    return 1.0 - weighted_observed / weighted_expected;
}

std::vector<PDbLabelRecord> load_pdb_records(const std::filesystem::path& path) {
    const json doc = json::parse(read_file(path));
    std::vector<PDbLabelRecord> records;
    for (const auto& r : doc) {
        PDbLabelRecord record;
        record.character_id = r.at("character").get<std::string>();
        record.scale_id = r.at("scale").get<std::string>();
        record.dimension_id = r.at("dimension").get<std::string>();
        if (r.contains("percentage")) {
            record.percentage = r["percentage"].get<double>();
        } else if (r.contains("votes")) {
            const double pos = r["votes"].at("positive").get<double>();
            const double neg = r["votes"].at("negative").get<double>();
            if (pos < 0 || neg < 0 || pos + neg == 0) {
                throw std::runtime_error("invalid vote counts in PDb record");
            }
            record.percentage = pos / (pos + neg);
        } else {
            throw std::runtime_error("PDb record needs 'percentage' or 'votes'");
        }
        records.push_back(std::move(record));
    }
    return records;
}

AnnotatorImport load_annotator_records(const std::filesystem::path& path) {
    const json doc = json::parse(read_file(path));
    AnnotatorImport import;
    import.scale_id = doc.at("scale").get<std::string>();
    for (auto it = doc.at("ranges").begin(); it != doc.at("ranges").end(); ++it) {
        import.ranges[it.key()] = {it.value()[0].get<double>(), it.value()[1].get<double>()};
    }
    for (const auto& r : doc.at("records")) {
        AnnotatorRecord record;
        record.annotator_id = r.at("annotator").get<std::string>();
        record.character_id = r.at("character").get<std::string>();
        for (auto it = r.at("ratings").begin(); it != r.at("ratings").end(); ++it) {
            if (it.value().is_string()) {
                const std::string marker = it.value().get<std::string>();
                if (marker != "X" && marker != "x") {
                    throw std::runtime_error("annotator rating must be a number or \"X\"");
                }
                record.ratings[it.key()] = std::nullopt;
            } else {
                record.ratings[it.key()] = it.value().get<double>();
            }
        }
        import.records.push_back(std::move(record));
    }
    return import;
}

std::vector<GroundTruthLabel> load_labels(const std::filesystem::path& path) {
    const json doc = json::parse(read_file(path));
    std::vector<GroundTruthLabel> labels;
    for (const auto& l : doc) {
        GroundTruthLabel label;
        label.character_id = l.at("character").get<std::string>();
        label.scale_id = l.at("scale").get<std::string>();
        label.dimension_id = l.at("dimension").get<std::string>();
        if (l.contains("score") && !l["score"].is_null()) {
            label.score = l["score"].get<double>();
        }
        const std::string type = l.at("type").get<std::string>();
        if (type == "positive") {
            label.type = TypeLabel::Positive;
        } else if (type == "negative") {
            label.type = TypeLabel::Negative;
        } else if (type == "marginal") {
            label.type = TypeLabel::Marginal;
        } else {
            throw std::runtime_error("label type must be positive/negative/marginal");
        }
        labels.push_back(std::move(label));
    }
    return labels;
}

void save_labels(const std::vector<GroundTruthLabel>& labels,
                 const std::filesystem::path& path) {
    json doc = json::array();
    for (const auto& label : labels) {
        json l;
        l["character"] = label.character_id;
        l["scale"] = label.scale_id;
        l["dimension"] = label.dimension_id;
        if (label.score) {
            l["score"] = *label.score;
        } else {
            l["score"] = nullptr;
        }
        l["type"] = to_string(label.type);
        doc.push_back(std::move(l));
    }
    write_file_atomic(path, doc.dump(2) + "\n");
}

}  // namespace incharacter
