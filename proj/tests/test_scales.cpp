#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "incharacter/io.hpp"
#include "incharacter/metrics.hpp"
#include "incharacter/scales.hpp"
#include "oracles.hpp"

using namespace incharacter;
using nlohmann::json;

namespace {

json minimal_scale_doc() {
    return json::parse(R"({
      "name": "Mini", "version": "1", "languages": ["en"],
      "options": [
        {"code": 1, "label": "Disagree"},
        {"code": 2, "label": "Neutral"},
        {"code": 3, "label": "Agree"}
      ],
      "dimensions": [
        {"id": "D1", "name": "First", "description": "d", "positive_pole": "Hi", "negative_pole": "Lo"}
      ],
      "items": [
        {"id": "i1", "statement": "S1.", "open_question": "Q1?", "dimension": "D1", "polarity": "positive"},
        {"id": "i2", "statement": "S2.", "open_question": "Q2?", "dimension": "D1", "polarity": "negative"}
      ],
      "scoring": {"aggregation": "average", "option_range": [1, 3], "percentage_mode": false}
    })");
}

// Random scale + sheets compared against the oracle scorer.
struct RandomScale {
    LikertScale scale;
    std::vector<oracle::Item> oracle_items;
    std::vector<std::string> dimension_ids;
};

RandomScale make_random_scale(std::mt19937_64& rng, int max_dims, int max_items,
                              int max_options) {
    std::uniform_int_distribution<int> dim_count(1, max_dims);
    std::uniform_int_distribution<int> option_count(2, max_options);
    RandomScale out;
    out.scale.name = "Rand";
    out.scale.version = "1";
    out.scale.languages = {"en"};
    const int dims = dim_count(rng);
    const int options = option_count(rng);
    const int min_code = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int o = 0; o < options; ++o) {
        out.scale.options.push_back({min_code + o, "L" + std::to_string(o), {}});
    }
    out.scale.scoring.min_code = min_code;
    out.scale.scoring.max_code = min_code + options - 1;
    out.scale.scoring.aggregation =
        std::uniform_int_distribution<int>(0, 1)(rng) ? Aggregation::Sum : Aggregation::Average;
    for (int d = 0; d < dims; ++d) {
        const std::string id = "D" + std::to_string(d);
        out.scale.dimensions.push_back({id, id, "desc", "Hi", "Lo"});
        out.dimension_ids.push_back(id);
    }
    const int items = std::uniform_int_distribution<int>(dims, max_items)(rng);
    for (int i = 0; i < items; ++i) {
        // first `dims` items cover every dimension so the scale validates
        const std::string dim =
            "D" + std::to_string(i < dims ? i : std::uniform_int_distribution<int>(0, dims - 1)(rng));
        const bool negative = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
        const std::string id = "i" + std::to_string(i);
        out.scale.items.push_back(
            {id, "S" + id, "Q" + id + "?", dim, negative ? Polarity::Negative : Polarity::Positive,
             "en"});
        out.oracle_items.push_back({id, dim, negative});
    }
    out.scale.validate();
    return out;
}

AnswerSheet random_sheet(const LikertScale& scale, std::mt19937_64& rng, double refuse_p = 0.1) {
    AnswerSheet sheet;
    sheet.character_id = "c";
    for (const auto& item : scale.items) {
        if (std::uniform_real_distribution<double>(0, 1)(rng) < refuse_p) {
            sheet.entries[item.id] = std::nullopt;
        } else {
            sheet.entries[item.id] = std::uniform_int_distribution<int>(
                scale.scoring.min_code, scale.scoring.max_code)(rng);
        }
    }
    return sheet;
}

void check_against_oracle(const RandomScale& rs, const AnswerSheet& sheet) {
    oracle::Sheet os;
    os.entries = sheet.entries;
    const auto expected = oracle::score_sheet(
        rs.oracle_items, rs.dimension_ids, rs.scale.scoring.min_code, rs.scale.scoring.max_code,
        rs.scale.scoring.aggregation == Aggregation::Sum, rs.scale.scoring.percentage_mode, os);
    const auto actual = apply_scoring(rs.scale, sheet);
    REQUIRE(actual.size() == expected.size());
    for (const auto& [dim, value] : expected) {
        REQUIRE(actual.count(dim));
        const auto& got = actual.at(dim);
        REQUIRE(got.has_value() == value.has_value());
        if (value) {
            CHECK(*got == doctest::Approx(*value).epsilon(1e-12));
        }
    }
}

}  // namespace

TEST_CASE("bundled scales load and match the curation-time fixture counts") {
    const auto data = default_data_dir();
    const json fixture = json::parse(read_file(data / "fixtures" / "scale_counts.json"));
    CHECK(fixture.size() == 14);
    for (auto it = fixture.begin(); it != fixture.end(); ++it) {
        const LikertScale scale = load_scale(data / "scales" / (it.key() + ".json"));
        INFO("scale ", it.key());
        CHECK(scale.name == it.value().at("name").get<std::string>());
        CHECK(scale.items.size() == it.value().at("items").get<std::size_t>());
        CHECK(scale.dimensions.size() == it.value().at("dimensions").get<std::size_t>());
        CHECK(scale.options.size() == it.value().at("options").get<std::size_t>());
        for (const auto& dim : scale.dimensions) {
            CHECK(scale.items_of(dim.id).size() ==
                  it.value().at("items_per_dimension").at(dim.id).get<std::size_t>());
        }
    }
}

TEST_CASE("BFI has the expected shape") {
    const LikertScale bfi = load_scale(default_data_dir() / "scales" / "bfi.json");
    CHECK(bfi.dimensions.size() == 5);
    CHECK(bfi.scoring.min_code == 1);
    CHECK(bfi.scoring.max_code == 5);
    for (const char* dim : {"O", "C", "E", "A", "N"}) {
        REQUIRE(bfi.find_dimension(dim) != nullptr);
        const auto items = bfi.items_of(dim);
        CHECK(items.size() >= 8);
        CHECK(items.size() <= 10);
    }
    CHECK(bfi.doc_capable());
}

TEST_CASE("schema violations are rejected with the offending field named") {
    SUBCASE("dangling dimension reference") {
        json doc = minimal_scale_doc();
        doc["items"][0]["dimension"] = "X";
        CHECK_THROWS_WITH_AS(parse_scale(doc),
                             doctest::Contains("unknown dimension 'X'"), ScaleError);
    }
    SUBCASE("unknown top-level key") {
        json doc = minimal_scale_doc();
        doc["bogus"] = 1;
        CHECK_THROWS_WITH_AS(parse_scale(doc), doctest::Contains("bogus"), ScaleError);
    }
    SUBCASE("non-consecutive option codes") {
        json doc = minimal_scale_doc();
        doc["options"][2]["code"] = 5;
        CHECK_THROWS_WITH_AS(parse_scale(doc), doctest::Contains("consecutive"), ScaleError);
    }
    SUBCASE("empty open question") {
        json doc = minimal_scale_doc();
        doc["items"][1]["open_question"] = "";
        CHECK_THROWS_AS(parse_scale(doc), ScaleError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS(load_scale("no/such/file.json"));
    }
}

TEST_CASE("item_score reverse coding") {
    CHECK(item_score(5, Polarity::Positive, 1, 5) == 5.0);
    CHECK(item_score(5, Polarity::Negative, 1, 5) == 1.0);
    CHECK(item_score(3, Polarity::Negative, 1, 5) == 3.0);
    CHECK_THROWS_AS(item_score(6, Polarity::Positive, 1, 5), ScaleError);

    SUBCASE("reflection is an involution on every code") {
        for (int min_code : {0, 1}) {
            for (int size : {2, 4, 5, 7, 9}) {
                const int max_code = min_code + size - 1;
                for (int code = min_code; code <= max_code; ++code) {
                    const int reflected =
                        int(item_score(code, Polarity::Negative, min_code, max_code));
                    CHECK(int(item_score(reflected, Polarity::Negative, min_code, max_code)) ==
                          code);
                }
            }
        }
    }
}

TEST_CASE("apply_scoring") {
    const LikertScale bfi = load_scale(default_data_dir() / "scales" / "bfi.json");

    SUBCASE("all midpoint answers give every dimension the midpoint") {
        AnswerSheet sheet;
        for (const auto& item : bfi.items) {
            sheet.entries[item.id] = 3;
        }
        for (const auto& [dim, score] : apply_scoring(bfi, sheet)) {
            INFO(dim);
            CHECK(*score == doctest::Approx(3.0));
        }
    }

    SUBCASE("one positive and one negative item at 5 average to the midpoint") {
        json doc = minimal_scale_doc();
        doc["options"] = json::parse(
            R"([{"code":1,"label":"a"},{"code":2,"label":"b"},{"code":3,"label":"c"},
                {"code":4,"label":"d"},{"code":5,"label":"e"}])");
        doc["scoring"]["option_range"] = {1, 5};
        const LikertScale scale = parse_scale(doc);
        AnswerSheet sheet;
        sheet.entries["i1"] = 5;  // positive
        sheet.entries["i2"] = 5;  // negative -> reflected to 1
        CHECK(*apply_scoring(scale, sheet).at("D1") == doctest::Approx(3.0));
    }

    SUBCASE("refused answers are excluded, all-refused dimensions are MISSING") {
        const LikertScale scale = parse_scale(minimal_scale_doc());
        AnswerSheet sheet;
        sheet.entries["i1"] = std::nullopt;
        sheet.entries["i2"] = std::nullopt;
        CHECK(!apply_scoring(scale, sheet).at("D1").has_value());
        sheet.entries["i1"] = 3;
        CHECK(*apply_scoring(scale, sheet).at("D1") == doctest::Approx(3.0));
    }

    SUBCASE("unknown item or out-of-range code is rejected") {
        const LikertScale scale = parse_scale(minimal_scale_doc());
        AnswerSheet bad_item;
        bad_item.entries["nope"] = 1;
        CHECK_THROWS_AS(apply_scoring(scale, bad_item), ScaleError);
        AnswerSheet bad_code;
        bad_code.entries["i1"] = 9;
        CHECK_THROWS_AS(apply_scoring(scale, bad_code), ScaleError);
    }

    SUBCASE("random scales match the brute-force oracle") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 200; ++trial) {
            const RandomScale rs = make_random_scale(rng, 3, 9, 5);
            check_against_oracle(rs, random_sheet(rs.scale, rng));
        }
    }

    SUBCASE("average stays inside the option range, sum inside the sum range") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 100; ++trial) {
            const RandomScale rs = make_random_scale(rng, 3, 9, 5);
            const auto scores = apply_scoring(rs.scale, random_sheet(rs.scale, rng, 0.0));
            for (const auto& [dim, score] : scores) {
                REQUIRE(score.has_value());
                const auto range = rs.scale.score_range(dim);
                CHECK(*score >= range.lo - 1e-12);
                CHECK(*score <= range.hi + 1e-12);
            }
        }
    }
}

TEST_CASE("exhaustive enumeration of tiny scales matches the oracle") {
    // Every sheet (codes plus REFUSED) over small random scale shapes.
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const RandomScale rs = make_random_scale(rng, 3, 4, 3);
        const int options = rs.scale.scoring.max_code - rs.scale.scoring.min_code + 1;
        const std::size_t items = rs.scale.items.size();
        std::size_t total = 1;
        for (std::size_t i = 0; i < items; ++i) {
            total *= std::size_t(options) + 1;  // +1 for REFUSED
        }
        for (std::size_t index = 0; index < total; ++index) {
            AnswerSheet sheet;
            std::size_t rest = index;
            for (const auto& item : rs.scale.items) {
                const std::size_t digit = rest % (options + 1);
                rest /= (options + 1);
                if (digit == std::size_t(options)) {
                    sheet.entries[item.id] = std::nullopt;
                } else {
                    sheet.entries[item.id] = rs.scale.scoring.min_code + int(digit);
                }
            }
            check_against_oracle(rs, sheet);
        }
    }
}

TEST_CASE("classify_type") {
    CHECK(classify_type(3.4, {1, 5}) == TypeLabel::Positive);
    CHECK(classify_type(3.0, {1, 5}) == TypeLabel::Negative);  // tie rule
    CHECK(classify_type(55, {0, 100}) == TypeLabel::Positive);
    CHECK(classify_type(2.9, {1, 5}) == TypeLabel::Negative);

    SUBCASE("affine remap leaves classification and normalized scores unchanged") {
        std::mt19937_64 rng(21);
        for (int trial = 0; trial < 200; ++trial) {
            const double lo = std::uniform_int_distribution<int>(0, 3)(rng);
            const double hi = lo + std::uniform_int_distribution<int>(2, 8)(rng);
            const double score = std::uniform_real_distribution<double>(lo, hi)(rng);
            const int a = std::uniform_int_distribution<int>(1, 5)(rng);
            const int b = std::uniform_int_distribution<int>(-10, 10)(rng);
            const ScoreRange range{lo, hi};
            const ScoreRange mapped{a * lo + b, a * hi + b};
            CHECK(classify_type(score, range) == classify_type(a * score + b, mapped));
            CHECK(normalize_score(score, range) ==
                  doctest::Approx(normalize_score(a * score + b, mapped)).epsilon(1e-9));
        }
    }
}

TEST_CASE("16P percentage mode lands in [0,100] and reflects the mean option") {
    const LikertScale p16 = load_scale(default_data_dir() / "scales" / "16p.json");
    REQUIRE(p16.scoring.percentage_mode);
    AnswerSheet sheet;
    for (const auto& item : p16.items) {
        sheet.entries[item.id] = item.polarity == Polarity::Positive ? 7 : 1;
    }
    for (const auto& [dim, score] : apply_scoring(p16, sheet)) {
        INFO(dim);
        CHECK(*score == doctest::Approx(100.0));
        CHECK(p16.score_range(dim).lo == 0.0);
        CHECK(p16.score_range(dim).hi == 100.0);
    }
}
