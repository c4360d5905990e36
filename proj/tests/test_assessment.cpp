#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <mutex>
#include <random>

#include "incharacter/assessment.hpp"
#include "incharacter/io.hpp"
#include "incharacter/sim.hpp"
#include "oracles.hpp"

using namespace incharacter;
using nlohmann::json;

namespace {

const PromptLibrary& prompts() {
    static PromptLibrary library = PromptLibrary::load(default_data_dir() / "templates");
    return library;
}

LikertScale doc_scale() {
    LikertScale scale;
    scale.name = "DocScale";
    scale.version = "1";
    scale.languages = {"en"};
    for (int code = 1; code <= 5; ++code) {
        LikertOption option{code, "L" + std::to_string(code), {}};
        option.doc_labels["X"] = "X-label-" + std::to_string(code);
        option.doc_labels["Y"] = "Y-label-" + std::to_string(code);
        scale.options.push_back(option);
    }
    scale.scoring = {Aggregation::Average, 1, 5, false};
    scale.dimensions = {{"X", "Xness", "about X", "HiX", "LoX"},
                        {"Y", "Yness", "about Y", "HiY", "LoY"}};
    for (int i = 1; i <= 6; ++i) {
        const std::string id = "q" + std::to_string(i);
        scale.items.push_back({id, "Statement " + id + ".", "Question " + id + "?",
                               i <= 3 ? "X" : "Y",
                               i % 3 == 0 ? Polarity::Negative : Polarity::Positive, "en"});
    }
    scale.validate();
    return scale;
}

CharacterProfile snape_like() {
    CharacterProfile profile;
    profile.id = "halloway";
    profile.aliases = {"Marcus Halloway", "Marcus", "the Warden"};
    profile.description = "A stern keeper of the archives.";
    return profile;
}

/// Interviewer stub driven by a lookup from prompt substrings to canned
/// replies; unmatched prompts get the fallback.
class TableBackend : public ChatBackend {
public:
    TableBackend(std::vector<std::pair<std::string, std::string>> table, std::string fallback)
        : table_(std::move(table)), fallback_(std::move(fallback)) {}
    std::string id() const override { return "table"; }
    std::string complete(const ChatRequest& request) override {
        ++calls;
        std::string all;
        for (const auto& message : request.messages) {
            all += message.content + "\n";
        }
        for (const auto& [needle, reply] : table_) {
            if (all.find(needle) != std::string::npos) {
                return reply;
            }
        }
        return fallback_;
    }
    std::atomic<int> calls{0};

private:
    std::vector<std::pair<std::string, std::string>> table_;
    std::string fallback_;
};

/// Replies from a queue, one entry per call (repeating the last).
class QueueBackend : public ChatBackend {
public:
    explicit QueueBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string id() const override { return "queue"; }
    std::string complete(const ChatRequest&) override {
        const std::size_t index = std::min(next_++, replies_.size() - 1);
        return replies_[index];
    }

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
};

Interviewer make_interviewer(ChatBackend& backend, int budget = 20) {
    Interviewer interviewer;
    interviewer.backend = &backend;
    interviewer.prompts = &prompts();
    interviewer.policy.batch_sample_budget = budget;
    return interviewer;
}

}  // namespace

TEST_CASE("anonymize") {
    const std::vector<std::string> aliases = {"Zhongli", "Rex Lapis"};
    CHECK(anonymize("Zhongli said it plainly.", aliases) == "the participant said it plainly.");
    CHECK(anonymize("No names here.", aliases) == "No names here.");
    CHECK(anonymize("zhongli and REX LAPIS agree.", aliases) ==
          "the participant and the participant agree.");

    SUBCASE("longest alias wins, no nested placeholders") {
        const std::vector<std::string> hp = {"Harry Potter", "Harry"};
        const std::string once = anonymize("Harry Potter met Harry.", hp);
        CHECK(once == "the participant met the participant.");
        CHECK(once == oracle::naive_anonymize("Harry Potter met Harry.", hp, "the participant"));
        CHECK(anonymize(once, hp) == once);  // idempotent
    }

    SUBCASE("word boundaries protect embedded fragments") {
        CHECK(anonymize("Partying is fun.", {"Art"}) == "Partying is fun.");
        CHECK(anonymize("Art paints.", {"Art"}) == "the participant paints.");
        // An alias hiding inside the placeholder itself must not re-trigger.
        const std::string tricky = anonymize("I saw Pant today.", {"Pant"});
        CHECK(tricky == "I saw the participant today.");
        CHECK(anonymize(tricky, {"Pant"}) == tricky);
    }

    SUBCASE("matches the naive oracle on crafted cases") {
        const std::vector<std::string> aliases2 = {"Luna Lovegood", "Luna", "Loony"};
        for (const std::string text :
             {"Luna Lovegood, known as Loony, is Luna.", "luna LOVEGOOD!", "Lunatic ideas.",
              "Loony Luna Lovegood"}) {
            CHECK(anonymize(text, aliases2) ==
                  oracle::naive_anonymize(text, aliases2, "the participant"));
        }
    }
}

TEST_CASE("parse_llm_json") {
    SUBCASE("plain object") {
        const auto doc = parse_llm_json(R"({"analysis":"fine","result":4})",
                                        {{"analysis", "string"}, {"result", "number"}});
        CHECK(doc.at("result") == 4);
    }
    SUBCASE("fenced and surrounded by prose") {
        const std::string raw =
            "Sure! Here is the JSON you asked for:\n```json\n{\"analysis\": \"ok\", "
            "\"result\": 4}\n```\nLet me know.";
        const auto doc = parse_llm_json(raw, {{"result", "number"}});
        CHECK(doc.at("result") == 4);
    }
    SUBCASE("type violations and missing keys signal regeneration") {
        CHECK_THROWS_AS(parse_llm_json(R"({"result": "four"})", {{"result", "number"}}),
                        AssessmentError);
        CHECK_THROWS_AS(parse_llm_json(R"({"analysis": "only"})", {{"result", "number"}}),
                        AssessmentError);
        CHECK_THROWS_AS(parse_llm_json("no json at all", {}), AssessmentError);
    }
    SUBCASE("numeric strings are tolerated as numbers") {
        const auto doc = parse_llm_json(R"({"result": "4"})", {{"result", "number"}});
        CHECK(doc.at("result") == "4");
    }
}

TEST_CASE("extract_choice") {
    const LikertScale scale = doc_scale();

    SUBCASE("interviewer lookup maps phrasing to codes") {
        TableBackend backend({{"definitely a five", "5"}, {"middling", "3"}}, "x");
        const auto interviewer = make_interviewer(backend);
        CHECK(*extract_choice("definitely a five", scale, interviewer) == 5);
        CHECK(*extract_choice("a middling answer", scale, interviewer) == 3);
    }
    SUBCASE("the refusal marker comes back as REFUSED") {
        TableBackend backend({}, "x");
        const auto interviewer = make_interviewer(backend);
        CHECK(!extract_choice("I shall not answer.", scale, interviewer).has_value());
    }
    SUBCASE("verbatim codes pass through") {
        TableBackend backend({{"===REPLY===\n3", "3"}}, "x");
        const auto interviewer = make_interviewer(backend);
        CHECK(*extract_choice("3", scale, interviewer) == 3);
    }
    SUBCASE("garbage exhausts the budget and counts as refusal") {
        TableBackend backend({}, "the moon is cheese");
        auto interviewer = make_interviewer(backend);
        interviewer.policy.max_regenerations = 2;
        CHECK(!extract_choice("??", scale, interviewer).has_value());
        CHECK(backend.calls == 3);  // initial + 2 regenerations
    }
    SUBCASE("regeneration requests carry the nudge and retry temperature") {
        auto inner = std::make_shared<QueueBackend>(
            std::vector<std::string>{"junk", "4"});
        RecordingBackend recording(inner);
        auto interviewer = make_interviewer(recording);
        CHECK(*extract_choice("whatever", scale, interviewer) == 4);
        const auto requests = recording.requests();
        REQUIRE(requests.size() == 2);
        CHECK(requests[0].temperature == doctest::Approx(0.0));
        CHECK(requests[1].temperature == doctest::Approx(0.2));
        CHECK(requests[1].messages.size() == requests[0].messages.size() + 2);
    }
}

TEST_CASE("sr_collect") {
    const LikertScale bfi = load_scale(default_data_dir() / "scales" / "bfi.json");
    RolePlayConfig config;
    config.use_memory = false;

    SUBCASE("bare numbers are taken verbatim") {
        PersonaSpec persona;
        persona.id = "terse";
        persona.levels = {{"O", 1.0}, {"C", 1.0}, {"E", 1.0}, {"A", 1.0}, {"N", 1.0}};
        persona.style = "terse";
        ScriptedRpaBackend rpa(persona, bfi);
        TableBackend never_called({}, "x");
        const auto interviewer = make_interviewer(never_called);
        const auto sheet = sr_collect(persona_profile(persona), bfi, config, rpa,
                                      SrVariant::Plain, interviewer, 1);
        CHECK(never_called.calls == 0);
        for (const auto& item : bfi.items) {
            const int expected = item.polarity == Polarity::Positive ? 5 : 1;
            CHECK(*sheet.entries.at(item.id) == expected);
        }
    }

    SUBCASE("verbose replies run through extraction; refusals impute the midpoint") {
        PersonaSpec persona;
        persona.id = "chatty";
        persona.levels = {{"O", 1.0}, {"C", 1.0}, {"E", 1.0}, {"A", 1.0}, {"N", 1.0}};
        persona.refusal_rate = 0.3;
        persona.seed = 77;
        ScriptedRpaBackend rpa(persona, bfi);
        ScriptedInterviewerBackend scripted(bfi);
        const auto interviewer = make_interviewer(scripted);
        const auto sheet = sr_collect(persona_profile(persona), bfi, config, rpa,
                                      SrVariant::Plain, interviewer, 1);
        int midpoints = 0;
        for (const auto& item : bfi.items) {
            REQUIRE(sheet.entries.at(item.id).has_value());
            const int code = *sheet.entries.at(item.id);
            const int planted = item.polarity == Polarity::Positive ? 5 : 1;
            if (code == 3 && planted != 3) {
                ++midpoints;  // imputed "Neutral"
            } else {
                CHECK(code == planted);
            }
        }
        CHECK(midpoints > 0);
    }

    SUBCASE("rpa backend failure leaves items REFUSED, never imputed") {
        class Dead : public ChatBackend {
        public:
            std::string id() const override { return "dead"; }
            std::string complete(const ChatRequest&) override { throw ChatError("down"); }
        } dead;
        TableBackend extraction({}, "x");
        const auto interviewer = make_interviewer(extraction);
        CharacterProfile profile;
        profile.id = "p";
        profile.aliases = {"P"};
        profile.description = "d";
        const auto sheet =
            sr_collect(profile, bfi, config, dead, SrVariant::Plain, interviewer, 1);
        for (const auto& [item, code] : sheet.entries) {
            (void)item;
            CHECK(!code.has_value());
        }
    }

    SUBCASE("prompt variants carry their template markers") {
        class CaptureRpa : public ChatBackend {
        public:
            std::string id() const override { return "capture"; }
            std::string complete(const ChatRequest& request) override {
                std::lock_guard<std::mutex> lock(mutex);
                prompts.push_back(request.messages.back().content);
                return "3";
            }
            std::mutex mutex;
            std::vector<std::string> prompts;
        } capture;
        TableBackend unused({}, "x");
        const auto interviewer = make_interviewer(unused);
        CharacterProfile profile;
        profile.id = "p";
        profile.aliases = {"P"};
        profile.description = "d";

        sr_collect(profile, bfi, config, capture, SrVariant::Plain, interviewer, 1);
        CHECK(capture.prompts.front().find("Reply a number from 1 to 5 using the scales:") !=
              std::string::npos);
        CHECK(capture.prompts.front().find("1 denotes 'strongly disagree'") != std::string::npos);
        CHECK(capture.prompts.front().find("and 5 denotes 'strongly agree'") !=
              std::string::npos);

        capture.prompts.clear();
        sr_collect(profile, bfi, config, capture, SrVariant::CoT, interviewer, 1);
        CHECK(capture.prompts.front().find("explain your thoughts") != std::string::npos);

        capture.prompts.clear();
        sr_collect(profile, bfi, config, capture, SrVariant::Icl, interviewer, 1);
        // {high_score}-1 = 4, {low_score}+1 = 2 on the BFI's 1..5 range
        CHECK(capture.prompts.front().find("Someone who enjoys sports: 4.") != std::string::npos);
        CHECK(capture.prompts.front().find("extremely honest: 5.") != std::string::npos);
        CHECK(capture.prompts.front().find("with empathy: 2.") != std::string::npos);
    }
}

TEST_CASE("oc_convert") {
    const LikertScale scale = doc_scale();
    const CharacterProfile character = snape_like();
    std::vector<QaPair> pairs;
    for (const auto& item : scale.items) {
        pairs.push_back({item.id, item.open_question, "Reply for " + item.id});
    }

    SUBCASE("a scripted map interviewer fills the sheet exactly") {
        TableBackend backend({}, R"({"0": 5, "1": "4", "2": "x", "3": 1, "4": 2, "5": 3})");
        const auto interviewer = make_interviewer(backend);
        const auto sheet = oc_convert(pairs, scale, character, interviewer);
        CHECK(*sheet.entries.at("q1") == 5);
        CHECK(*sheet.entries.at("q2") == 4);
        CHECK(!sheet.entries.at("q3").has_value());  // "x" -> REFUSED
        CHECK(*sheet.entries.at("q4") == 1);
        CHECK(*sheet.entries.at("q6") == 3);
    }

    SUBCASE("the prompt shows the character name and the statements") {
        auto scripted = std::make_shared<TableBackend>(
            std::vector<std::pair<std::string, std::string>>{},
            R"({"0":3,"1":3,"2":3,"3":3,"4":3,"5":3})");
        RecordingBackend recording(scripted);
        const auto interviewer = make_interviewer(recording);
        oc_convert(pairs, scale, character, interviewer);
        const std::string prompt = recording.requests().front().messages.front().content;
        CHECK(prompt.find("Marcus Halloway") != std::string::npos);  // OC is not anonymized
        CHECK(prompt.find("Statement q1.") != std::string::npos);
        CHECK(prompt.find("===OUTPUT FORMAT===") != std::string::npos);
        CHECK(prompt.find("use \"x\" to indicate it") != std::string::npos);
    }

    SUBCASE("50 pairs with a 20-sample budget take at least 3 requests") {
        LikertScale wide = doc_scale();
        wide.items.clear();
        wide.dimensions = {wide.dimensions.front()};  // keep X only
        std::vector<QaPair> many;
        for (int i = 0; i < 50; ++i) {
            const std::string id = "w" + std::to_string(i);
            wide.items.push_back({id, "S" + id, "Q" + id + "?", "X", Polarity::Positive, "en"});
            many.push_back({id, "Q" + id + "?", "R" + id});
        }
        wide.validate();
        // Scripted interviewer that answers 2 for whatever keys it is sent.
        class MapBackend : public ChatBackend {
        public:
            std::string id() const override { return "map"; }
            std::string complete(const ChatRequest& request) override {
                ++calls;
                const std::string& prompt = request.messages.front().content;
                const auto input = extract_first_json(prompt.substr(prompt.find("===INPUT===")));
                json reply = json::object();
                for (auto it = input->begin(); it != input->end(); ++it) {
                    reply[it.key()] = 2;
                }
                return reply.dump();
            }
            std::atomic<int> calls{0};
        } backend;
        const auto interviewer = make_interviewer(backend, 20);
        const auto sheet = oc_convert(many, wide, character, interviewer);
        CHECK(backend.calls >= 3);
        CHECK(sheet.entries.size() == 50);
        for (const auto& [item, code] : sheet.entries) {
            (void)item;
            CHECK(*code == 2);
        }
    }

    SUBCASE("missing keys trigger regeneration; persistent failure refuses the chunk") {
        QueueBackend incomplete_then_full(
            {R"({"0": 5, "1": 4})",  // q3..q6 missing -> regenerate
             R"({"0": 5, "1": 4, "2": 3, "3": 2, "4": 1, "5": 5})"});
        const auto interviewer = make_interviewer(incomplete_then_full);
        const auto sheet = oc_convert(pairs, scale, character, interviewer);
        CHECK(*sheet.entries.at("q1") == 5);
        CHECK(*sheet.entries.at("q5") == 1);

        TableBackend hopeless({}, "not json");
        auto broken = make_interviewer(hopeless);
        broken.policy.max_regenerations = 1;
        const auto refused = oc_convert(pairs, scale, character, broken);
        for (const auto& [item, code] : refused.entries) {
            (void)item;
            CHECK(!code.has_value());
        }
    }

    SUBCASE("out-of-range codes are rejected and retried") {
        QueueBackend bad_then_good(
            {R"({"0": 9, "1": 4, "2": 3, "3": 2, "4": 1, "5": 5})",
             R"({"0": 5, "1": 4, "2": 3, "3": 2, "4": 1, "5": 5})"});
        const auto interviewer = make_interviewer(bad_then_good);
        const auto sheet = oc_convert(pairs, scale, character, interviewer);
        CHECK(*sheet.entries.at("q1") == 5);
    }
}

TEST_CASE("doc_convert") {
    const LikertScale scale = doc_scale();
    const CharacterProfile character = snape_like();
    std::vector<QaPair> pairs;
    for (const auto& item : scale.items) {
        pairs.push_back({item.id, item.open_question,
                         "Marcus Halloway never wavers, said the Warden."});
    }

    SUBCASE("prompts use per-dimension descriptive labels and no alias") {
        auto scripted = std::make_shared<TableBackend>(
            std::vector<std::pair<std::string, std::string>>{},
            R"({"0":4,"1":4,"2":4,"3":4,"4":4,"5":4})");
        RecordingBackend recording(scripted);
        const auto interviewer = make_interviewer(recording);
        const auto sheet = doc_convert(pairs, scale, character, interviewer);
        REQUIRE(recording.call_count() == 2);  // one prompt per dimension
        bool saw_x_labels = false, saw_y_labels = false;
        for (const auto& request : recording.requests()) {
            const std::string& prompt = request.messages.front().content;
            for (const auto& alias : character.aliases) {
                CHECK(!contains_ci(prompt, alias));
            }
            CHECK(prompt.find("the participant") != std::string::npos);
            if (prompt.find("'x-label-4'") != std::string::npos) {
                saw_x_labels = true;
            }
            if (prompt.find("'y-label-4'") != std::string::npos) {
                saw_y_labels = true;
            }
        }
        CHECK(saw_x_labels);
        CHECK(saw_y_labels);
        CHECK(sheet.entries.size() == 6);
    }

    SUBCASE("a scale without descriptive labels is rejected") {
        LikertScale plain = doc_scale();
        for (auto& option : plain.options) {
            option.doc_labels.clear();
        }
        TableBackend backend({}, "{}");
        const auto interviewer = make_interviewer(backend);
        CHECK_THROWS_AS(doc_convert(pairs, plain, character, interviewer), AssessmentError);
    }
}

TEST_CASE("er_batch_sizes") {
    CHECK(er_batch_sizes(9) == std::vector<int>{3, 3, 3});
    CHECK(er_batch_sizes(10) == std::vector<int>{4, 3, 3});
    CHECK(er_batch_sizes(11) == std::vector<int>{4, 4, 3});
    CHECK(er_batch_sizes(12) == std::vector<int>{3, 3, 3, 3});
    CHECK(er_batch_sizes(8) == std::vector<int>{4, 4});
    CHECK(er_batch_sizes(7) == std::vector<int>{4, 3});
    CHECK(er_batch_sizes(5) == std::vector<int>{3, 2});
    CHECK(er_batch_sizes(4) == std::vector<int>{4});
    CHECK(er_batch_sizes(3) == std::vector<int>{3});
    CHECK(er_batch_sizes(2) == std::vector<int>{2});
    CHECK(er_batch_sizes(1) == std::vector<int>{1});
    for (int n = 3; n <= 60; ++n) {
        int total = 0;
        for (int size : er_batch_sizes(n)) {
            total += size;
            if (n != 5) {
                CHECK(size >= 3);
                CHECK(size <= 4);
            }
        }
        CHECK(total == n);
    }
}

TEST_CASE("er_rate") {
    const CharacterProfile character = snape_like();

    SUBCASE("batch scores average into the dimension score") {
        LikertScale scale = doc_scale();
        scale.items.clear();
        scale.dimensions = {scale.dimensions.front()};  // keep X only
        std::vector<QaPair> pairs;
        for (int i = 0; i < 9; ++i) {
            const std::string id = "e" + std::to_string(i);
            scale.items.push_back({id, "S" + id, "Q" + id + "?", "X", Polarity::Positive, "en"});
            pairs.push_back({id, "Q" + id + "?", "R" + id});
        }
        scale.validate();
        QueueBackend backend({R"({"analysis": "a", "result": 3})",
                              R"({"analysis": "b", "result": 4})",
                              R"({"analysis": "c", "result": 5})"});
        const auto interviewer = make_interviewer(backend);
        const auto judgments =
            er_rate("X", pairs, scale, character, interviewer, ErMode::Batch, "Experimenter",
                    "English");
        REQUIRE(judgments.size() == 3);
        double mean = 0;
        for (const auto& judgment : judgments) {
            mean += judgment.score / 3.0;
        }
        CHECK(mean == doctest::Approx(4.0));
    }

    SUBCASE("scripted interviewer JSON is honored") {
        const LikertScale scale = doc_scale();
        std::vector<QaPair> pairs = {{"q1", "Question q1?", "An answer."}};
        TableBackend backend({}, R"({"analysis": "solid reasoning", "result": 4})");
        const auto interviewer = make_interviewer(backend);
        const auto judgments = er_rate("X", pairs, scale, character, interviewer, ErMode::All,
                                       "Experimenter", "English");
        REQUIRE(judgments.size() == 1);
        CHECK(judgments.front().score == doctest::Approx(4.0));
        CHECK(judgments.front().analysis == "solid reasoning");
    }

    SUBCASE("percentage-mode dimensions return the positive-pole percentage") {
        LikertScale p16 = load_scale(default_data_dir() / "scales" / "16p.json");
        const auto& dim = p16.dimensions.front();
        std::vector<QaPair> pairs = {{p16.items.front().id, "Q?", "R."}};
        TableBackend backend(
            {},
            R"({"analysis": "ok", "result": {")" + dim.positive_pole + R"(": "30%", ")" +
                dim.negative_pole + R"(": "70%"}})");
        const auto interviewer = make_interviewer(backend);
        const auto judgments = er_rate(dim.id, pairs, p16, character, interviewer, ErMode::All,
                                       "Experimenter", "English");
        REQUIRE(judgments.size() == 1);
        CHECK(judgments.front().score == doctest::Approx(30.0));
    }

    SUBCASE("percentages that do not sum to 100 are rejected") {
        LikertScale p16 = load_scale(default_data_dir() / "scales" / "16p.json");
        const auto& dim = p16.dimensions.front();
        std::vector<QaPair> pairs = {{p16.items.front().id, "Q?", "R."}};
        TableBackend backend(
            {},
            R"({"analysis": "ok", "result": {")" + dim.positive_pole + R"(": 30, ")" +
                dim.negative_pole + R"(": 40}})");
        auto interviewer = make_interviewer(backend);
        interviewer.policy.max_regenerations = 1;
        CHECK(er_rate(dim.id, pairs, p16, character, interviewer, ErMode::All, "Experimenter",
                      "English")
                  .empty());
    }

    SUBCASE("the prompt carries scale, dimension, range and experimenter context") {
        const LikertScale scale = doc_scale();
        std::vector<QaPair> pairs = {
            {"q1", "Question q1?", "Marcus Halloway keeps his counsel."}};
        auto scripted = std::make_shared<TableBackend>(
            std::vector<std::pair<std::string, std::string>>{},
            R"({"analysis": "a", "result": 3})");
        RecordingBackend recording(scripted);
        const auto interviewer = make_interviewer(recording);
        er_rate("X", pairs, scale, character, interviewer, ErMode::All, "Dr. Crane", "English");
        const std::string prompt = recording.requests().front().messages.front().content;
        CHECK(prompt.find("expert in Psychometrics, especially DocScale") != std::string::npos);
        CHECK(prompt.find("the Xness dimension") != std::string::npos);
        CHECK(prompt.find("about X") != std::string::npos);
        CHECK(prompt.find("My name is Dr. Crane.") != std::string::npos);
        CHECK(prompt.find("between 1 and 5") != std::string::npos);
        CHECK(prompt.find("===CONVERSATIONS===") != std::string::npos);
        for (const auto& alias : character.aliases) {
            CHECK(!contains_ci(prompt, alias));
        }
    }

    SUBCASE("out-of-range judgments exhaust regeneration and drop the batch") {
        const LikertScale scale = doc_scale();
        std::vector<QaPair> pairs = {{"q1", "Question q1?", "R."}};
        TableBackend backend({}, R"({"analysis": "a", "result": 11})");
        auto interviewer = make_interviewer(backend);
        interviewer.policy.max_regenerations = 1;
        CHECK(er_rate("X", pairs, scale, character, interviewer, ErMode::All, "Experimenter",
                      "English")
                  .empty());
    }
}

TEST_CASE("assess dispatch") {
    const LikertScale bfi = load_scale(default_data_dir() / "scales" / "bfi.json");
    PersonaSpec persona;
    persona.id = "dispatch";
    persona.levels = {{"O", 1.0}, {"C", 0.0}, {"E", 1.0}, {"A", 0.0}, {"N", 1.0}};
    const CharacterProfile profile = persona_profile(persona);
    ScriptedRpaBackend rpa(persona, bfi);
    RolePlayConfig config;
    config.use_memory = false;
    const auto questions = build_question_list(bfi);
    const Transcript transcript =
        run_interview(profile, bfi, questions, config, rpa, 3, {});

    SUBCASE("a 3-run transcript yields 3 reports per method") {
        ScriptedInterviewerBackend scripted(bfi);
        const auto interviewer = make_interviewer(scripted);
        const auto reports = assess_transcript(transcript, profile, Method::OC, bfi, interviewer);
        REQUIRE(reports.size() == 3);
        for (const auto& report : reports) {
            CHECK(report.method == Method::OC);
            CHECK(report.dim_scores.size() == 5);
            CHECK(report.item_codes.size() == bfi.items.size());
            CHECK(*report.dim_scores.at("O") == doctest::Approx(5.0));
            CHECK(*report.dim_scores.at("C") == doctest::Approx(1.0));
        }
    }

    SUBCASE("ER with a constant-4 interviewer gives every dimension 4.0") {
        TableBackend constant({}, R"({"analysis": "same", "result": 4})");
        const auto interviewer = make_interviewer(constant);
        const auto reports =
            assess_transcript(transcript, profile, Method::ER_Batch, bfi, interviewer);
        REQUIRE(reports.size() == 3);
        for (const auto& report : reports) {
            CHECK(report.item_codes.empty());
            for (const auto& [dim, score] : report.dim_scores) {
                INFO(dim);
                CHECK(*score == doctest::Approx(4.0));
            }
            CHECK(!report.dim_analyses.empty());
        }
    }

    SUBCASE("ER_batch with a huge batch budget equals ER_all") {
        ScriptedInterviewerBackend scripted(bfi);
        auto interviewer = make_interviewer(scripted, 1000);
        const auto all =
            assess_transcript(transcript, profile, Method::ER_All, bfi, interviewer);
        // With <= 4 items the batch partition is a single batch as well.
        Transcript truncated = transcript;
        truncated.records.clear();
        std::set<std::string> kept;
        for (const auto& record : transcript.records) {
            const auto* item = bfi.find_item(record.item_id);
            if (bfi.items_of(item->dimension).size() <= 4 || kept.count(record.item_id) ||
                [&] {
                    int count = 0;
                    for (const auto& k : kept) {
                        if (bfi.find_item(k)->dimension == item->dimension) {
                            ++count;
                        }
                    }
                    return count < 4;
                }()) {
                truncated.records.push_back(record);
                kept.insert(record.item_id);
            }
        }
        const auto batch =
            assess_transcript(truncated, profile, Method::ER_Batch, bfi, interviewer);
        const auto all_truncated =
            assess_transcript(truncated, profile, Method::ER_All, bfi, interviewer);
        REQUIRE(batch.size() == all_truncated.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            for (const auto& [dim, score] : batch[i].dim_scores) {
                CHECK(*score == doctest::Approx(*all_truncated[i].dim_scores.at(dim)));
            }
        }
        (void)all;
    }

    SUBCASE("FAILED records propagate as REFUSED") {
        Transcript damaged = transcript;
        for (auto& record : damaged.records) {
            if (record.item_id == bfi.items.front().id) {
                record.failed = true;
            }
        }
        ScriptedInterviewerBackend scripted(bfi);
        const auto interviewer = make_interviewer(scripted);
        const auto reports = assess_transcript(damaged, profile, Method::OC, bfi, interviewer);
        CHECK(!reports.front().item_codes.at(bfi.items.front().id).has_value());
    }

    SUBCASE("every emitted score stays in range or is MISSING") {
        ScriptedInterviewerBackend scripted(bfi);
        const auto interviewer = make_interviewer(scripted);
        for (Method method : {Method::OC, Method::DOC, Method::ER_All, Method::ER_Batch}) {
            const auto reports = assess_transcript(transcript, profile, method, bfi, interviewer);
            for (const auto& report : reports) {
                for (const auto& [dim, score] : report.dim_scores) {
                    if (score) {
                        const auto range = bfi.score_range(dim);
                        CHECK(*score >= range.lo);
                        CHECK(*score <= range.hi);
                    }
                }
            }
        }
    }

    SUBCASE("self-report methods refuse transcripts and vice versa") {
        ScriptedInterviewerBackend scripted(bfi);
        const auto interviewer = make_interviewer(scripted);
        CHECK_THROWS_AS(assess_transcript(transcript, profile, Method::SR, bfi, interviewer),
                        AssessmentError);
        CHECK_THROWS_AS(assess_sr(profile, Method::OC, bfi, config, rpa, interviewer, 1),
                        AssessmentError);
    }

    SUBCASE("reports round-trip through disk") {
        ScriptedInterviewerBackend scripted(bfi);
        const auto interviewer = make_interviewer(scripted);
        const auto reports = assess_transcript(transcript, profile, Method::OC, bfi, interviewer);
        const auto dir = std::filesystem::temp_directory_path() / "incharacter_report_test";
        std::filesystem::create_directories(dir);
        save_report(reports.front(), dir / "r.json");
        const auto loaded = load_report(dir / "r.json");
        CHECK(loaded.character_id == reports.front().character_id);
        CHECK(loaded.method == Method::OC);
        CHECK(loaded.dim_scores.size() == 5);
        CHECK(*loaded.dim_scores.at("O") == doctest::Approx(5.0));
        CHECK(loaded.item_codes.size() == bfi.items.size());
    }
}

TEST_CASE("method name round trip") {
    for (Method method : {Method::SR, Method::SR_CoT, Method::SR_ICL, Method::OC, Method::DOC,
                          Method::ER_All, Method::ER_Batch}) {
        CHECK(parse_method(method_name(method)) == method);
    }
    CHECK_THROWS_AS(parse_method("bogus"), AssessmentError);
}
