#include "incharacter/scales.hpp"

#include <algorithm>
#include <set>

#include "incharacter/io.hpp"

namespace incharacter {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ScaleError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ScaleError("missing field '" + std::string(key) + "' in " + where);
    }
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) {
        throw ScaleError("field '" + std::string(key) + "' in " + where + " must be a string");
    }
    return v.get<std::string>();
}

}  // namespace

std::string to_string(Polarity p) {
    return p == Polarity::Positive ? "positive" : "negative";
}

std::string to_string(TypeLabel t) {
    switch (t) {
        case TypeLabel::Positive: return "positive";
        case TypeLabel::Negative: return "negative";
        case TypeLabel::Marginal: return "marginal";
    }
    return "marginal";
}

const ScaleItem* LikertScale::find_item(const std::string& item_id) const {
    for (const auto& item : items) {
        if (item.id == item_id) {
            return &item;
        }
    }
    return nullptr;
}

const DimensionSpec* LikertScale::find_dimension(const std::string& dimension_id) const {
    for (const auto& dim : dimensions) {
        if (dim.id == dimension_id) {
            return &dim;
        }
    }
    return nullptr;
}

const LikertOption* LikertScale::find_option(int code) const {
    for (const auto& option : options) {
        if (option.code == code) {
            return &option;
        }
    }
    return nullptr;
}

std::vector<const ScaleItem*> LikertScale::items_of(const std::string& dimension_id) const {
    std::vector<const ScaleItem*> result;
    for (const auto& item : items) {
        if (item.dimension == dimension_id) {
            result.push_back(&item);
        }
    }
    return result;
}

ScoreRange LikertScale::option_range() const {
    return {static_cast<double>(scoring.min_code), static_cast<double>(scoring.max_code)};
}

ScoreRange LikertScale::score_range(const std::string& dimension_id) const {
    if (scoring.percentage_mode) {
        return {0.0, 100.0};
    }
    if (scoring.aggregation == Aggregation::Average) {
        return option_range();
    }
    const double n = static_cast<double>(items_of(dimension_id).size());
    return {n * scoring.min_code, n * scoring.max_code};
}

bool LikertScale::doc_capable() const {
    for (const auto& option : options) {
        for (const auto& dim : dimensions) {
            auto it = option.doc_labels.find(dim.id);
            if (it == option.doc_labels.end() || it->second.empty()) {
                return false;
            }
        }
    }
    return !options.empty() && !dimensions.empty();
}

void LikertScale::validate() const {
    if (name.empty()) {
        throw ScaleError("scale name is empty");
    }
    if (options.size() < 2) {
        throw ScaleError("scale '" + name + "': needs at least 2 options");
    }
    std::vector<int> codes;
    for (const auto& option : options) {
        codes.push_back(option.code);
    }
    for (std::size_t i = 1; i < codes.size(); ++i) {
        if (codes[i] != codes[i - 1] + 1) {
            throw ScaleError("scale '" + name +
                             "': option codes must form a consecutive increasing range");
        }
    }
    if (scoring.min_code != codes.front() || scoring.max_code != codes.back()) {
        throw ScaleError("scale '" + name + "': scoring.option_range does not match options");
    }
    if (dimensions.empty()) {
        throw ScaleError("scale '" + name + "': no dimensions");
    }
    std::set<std::string> dim_ids;
    for (const auto& dim : dimensions) {
        if (dim.id.empty()) {
            throw ScaleError("scale '" + name + "': dimension with empty id");
        }
        if (!dim_ids.insert(dim.id).second) {
            throw ScaleError("scale '" + name + "': duplicate dimension id '" + dim.id + "'");
        }
        if (!dim.positive_pole.empty() && dim.positive_pole == dim.negative_pole) {
            throw ScaleError("scale '" + name + "': dimension '" + dim.id +
                             "' has identical pole labels");
        }
    }
    std::set<std::string> item_ids;
    for (const auto& item : items) {
        if (item.id.empty()) {
            throw ScaleError("scale '" + name + "': item with empty id");
        }
        if (!item_ids.insert(item.id).second) {
            throw ScaleError("scale '" + name + "': duplicate item id '" + item.id + "'");
        }
        if (item.statement.empty()) {
            throw ScaleError("scale '" + name + "': item '" + item.id + "' has empty statement");
        }
        if (item.open_question.empty()) {
            throw ScaleError("scale '" + name + "': item '" + item.id +
                             "' has empty open_question");
        }
        if (!dim_ids.count(item.dimension)) {
            throw ScaleError("scale '" + name + "': item '" + item.id +
                             "' references unknown dimension '" + item.dimension + "'");
        }
    }
    for (const auto& dim : dimensions) {
        if (items_of(dim.id).empty()) {
            throw ScaleError("scale '" + name + "': dimension '" + dim.id + "' owns no items");
        }
    }
    if (scoring.percentage_mode && scoring.aggregation != Aggregation::Average) {
        throw ScaleError("scale '" + name + "': percentage_mode requires average aggregation");
    }
}

LikertScale parse_scale(const json& doc) {
    if (!doc.is_object()) {
        throw ScaleError("scale file must be a JSON object");
    }
    reject_unknown_keys(doc, {"name", "version", "languages", "options", "dimensions", "items",
                              "scoring"},
                        "scale file");
    LikertScale scale;
    scale.name = require_string(doc, "name", "scale file");
    scale.version = require_string(doc, "version", "scale file");
    for (const auto& lang : require(doc, "languages", "scale file")) {
        scale.languages.push_back(lang.get<std::string>());
    }

    for (const auto& opt : require(doc, "options", "scale file")) {
        reject_unknown_keys(opt, {"code", "label", "doc_labels"}, "option");
        LikertOption option;
        option.code = require(opt, "code", "option").get<int>();
        option.label = require_string(opt, "label", "option");
        if (opt.contains("doc_labels")) {
            for (auto it = opt["doc_labels"].begin(); it != opt["doc_labels"].end(); ++it) {
                option.doc_labels[it.key()] = it.value().get<std::string>();
            }
        }
        scale.options.push_back(std::move(option));
    }

    for (const auto& d : require(doc, "dimensions", "scale file")) {
        reject_unknown_keys(d, {"id", "name", "description", "positive_pole", "negative_pole"},
                            "dimension");
        DimensionSpec dim;
        dim.id = require_string(d, "id", "dimension");
        dim.name = require_string(d, "name", "dimension");
        dim.description = require_string(d, "description", "dimension");
        dim.positive_pole = require_string(d, "positive_pole", "dimension");
        dim.negative_pole = require_string(d, "negative_pole", "dimension");
        scale.dimensions.push_back(std::move(dim));
    }

    for (const auto& i : require(doc, "items", "scale file")) {
        reject_unknown_keys(i, {"id", "statement", "open_question", "dimension", "polarity",
                                "language"},
                            "item");
        ScaleItem item;
        item.id = require_string(i, "id", "item");
        item.statement = require_string(i, "statement", "item");
        item.open_question = require_string(i, "open_question", "item");
        item.dimension = require_string(i, "dimension", "item");
        const std::string polarity = require_string(i, "polarity", "item " + item.id);
        if (polarity == "positive") {
            item.polarity = Polarity::Positive;
        } else if (polarity == "negative") {
            item.polarity = Polarity::Negative;
        } else {
            throw ScaleError("item '" + item.id + "': polarity must be positive or negative");
        }
        if (i.contains("language")) {
            item.language = i["language"].get<std::string>();
        }
        scale.items.push_back(std::move(item));
    }

    const json& sc = require(doc, "scoring", "scale file");
    reject_unknown_keys(sc, {"aggregation", "option_range", "percentage_mode"}, "scoring");
    const std::string agg = require_string(sc, "aggregation", "scoring");
    if (agg == "average") {
        scale.scoring.aggregation = Aggregation::Average;
    } else if (agg == "sum") {
        scale.scoring.aggregation = Aggregation::Sum;
    } else {
        throw ScaleError("scoring.aggregation must be average or sum");
    }
    const json& range = require(sc, "option_range", "scoring");
    if (!range.is_array() || range.size() != 2) {
        throw ScaleError("scoring.option_range must be [min, max]");
    }
    scale.scoring.min_code = range[0].get<int>();
    scale.scoring.max_code = range[1].get<int>();
    scale.scoring.percentage_mode =
        sc.contains("percentage_mode") ? sc["percentage_mode"].get<bool>() : false;

    scale.validate();
    return scale;
}

LikertScale load_scale(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ScaleError("scale file " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        return parse_scale(doc);
    } catch (const ScaleError& e) {
        throw ScaleError(path.string() + ": " + e.what());
    }
}

double item_score(int code, Polarity polarity, int min_code, int max_code) {
    if (code < min_code || code > max_code) {
        throw ScaleError("option code " + std::to_string(code) + " outside range [" +
                         std::to_string(min_code) + "," + std::to_string(max_code) + "]");
    }
    if (polarity == Polarity::Positive) {
        return static_cast<double>(code);
    }
    return static_cast<double>(min_code + max_code - code);
}

double item_score(int code, Polarity polarity, const ScoringSpec& scoring) {
    return item_score(code, polarity, scoring.min_code, scoring.max_code);
}

std::map<std::string, std::optional<double>> apply_scoring(const LikertScale& scale,
                                                           const AnswerSheet& sheet) {
    for (const auto& [item_id, code] : sheet.entries) {
        const ScaleItem* item = scale.find_item(item_id);
        if (item == nullptr) {
            throw ScaleError("answer sheet references unknown item '" + item_id + "'");
        }
        if (code && (*code < scale.scoring.min_code || *code > scale.scoring.max_code)) {
            throw ScaleError("answer for item '" + item_id + "' outside option range");
        }
    }
    std::map<std::string, std::optional<double>> result;
    for (const auto& dim : scale.dimensions) {
        double total = 0.0;
        int scored = 0;
        for (const ScaleItem* item : scale.items_of(dim.id)) {
            auto it = sheet.entries.find(item->id);
            if (it == sheet.entries.end() || !it->second) {
                continue;  // unanswered or refused
            }
            total += item_score(*it->second, item->polarity, scale.scoring);
            ++scored;
        }
        if (scored == 0) {
            result[dim.id] = std::nullopt;
            continue;
        }
        double score = (scale.scoring.aggregation == Aggregation::Average)
                           ? total / scored
                           : total;
        if (scale.scoring.percentage_mode) {
            // Local 16P fallback: mean coded option mapped linearly onto
            // [0,100] toward the positive pole.
            const double mean = total / scored;
            score = (mean - scale.scoring.min_code) /
                    (scale.scoring.max_code - scale.scoring.min_code) * 100.0;
        }
        result[dim.id] = score;
    }
    return result;
}

TypeLabel classify_type(double score, const ScoreRange& range) {
    return score > range.midpoint() ? TypeLabel::Positive : TypeLabel::Negative;
}

}  // namespace incharacter
