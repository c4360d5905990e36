#include "incharacter/interview.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "incharacter/io.hpp"
#include "incharacter/prompts.hpp"

namespace incharacter {

using nlohmann::json;
using nlohmann::ordered_json;

int Transcript::runs() const {
    int max_run = 0;
    for (const auto& record : records) {
        max_run = std::max(max_run, record.run_id);
    }
    return max_run;
}

std::vector<const InterviewRecord*> Transcript::run_records(int run_id) const {
    std::vector<const InterviewRecord*> result;
    for (const auto& record : records) {
        if (record.run_id == run_id) {
            result.push_back(&record);
        }
    }
    return result;
}

std::vector<InterviewQuestion> build_question_list(
    const LikertScale& scale, const std::map<std::string, std::string>* overrides) {
    if (overrides != nullptr) {
        for (const auto& [item_id, text] : *overrides) {
            (void)text;
            if (scale.find_item(item_id) == nullptr) {
                throw ScaleError("question override references unknown item '" + item_id + "'");
            }
        }
    }
    std::vector<InterviewQuestion> questions;
    questions.reserve(scale.items.size());
    for (const auto& item : scale.items) {
        InterviewQuestion question;
        question.item_id = item.id;
        question.text = item.open_question;
        question.language = item.language;
        if (overrides != nullptr) {
            auto it = overrides->find(item.id);
            if (it != overrides->end()) {
                question.text = it->second;
            }
        }
        questions.push_back(std::move(question));
    }
    return questions;
}

std::map<std::string, std::string> load_question_overrides(const std::filesystem::path& path) {
    const json doc = json::parse(read_file(path));
    std::map<std::string, std::string> overrides;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        overrides[it.key()] = it.value().get<std::string>();
    }
    return overrides;
}

std::vector<InterviewQuestion> adapt_questions(const CharacterProfile& character,
                                               const std::vector<InterviewQuestion>& questions,
                                               ChatBackend& backend,
                                               const std::string& adapt_template,
                                               std::vector<std::string>* warnings) {
    std::vector<InterviewQuestion> adapted = questions;
    for (auto& question : adapted) {
        const std::string prompt = PromptLibrary::substitute(
            adapt_template, {{"character name", character.aliases.front()},
                             {"character description", character.description},
                             {"question", question.text}});
        ChatRequest request;
        request.messages = {{"user", prompt}};
        request.temperature = 0.0;
        try {
            const std::string reply = backend.complete(request);
            const auto doc = extract_first_json(reply);
            if (!doc || !doc->contains("needs_adaptation")) {
                throw ChatError("unparseable adaptation reply");
            }
            if (doc->at("needs_adaptation").get<bool>()) {
                const std::string rewritten = doc->at("adapted_question").get<std::string>();
                if (!rewritten.empty() && rewritten != question.text) {
                    question.text = rewritten;
                    question.adapted = true;
                }
            }
        } catch (const std::exception& e) {
            if (warnings != nullptr) {
                warnings->push_back("adaptation failed for item '" + question.item_id +
                                    "': " + e.what());
            }
        }
    }
    return adapted;
}

std::vector<const MemorySnippet*> retrieve_memory(const std::string& question,
                                                  const std::vector<MemorySnippet>& memories,
                                                  int k) {
    if (k <= 0 || memories.empty()) {
        return {};
    }
    const auto query_tokens = word_tokens(question);
    const std::set<std::string> query(query_tokens.begin(), query_tokens.end());
    std::vector<std::pair<int, std::size_t>> scored;  // (-overlap, index) for stable order
    scored.reserve(memories.size());
    for (std::size_t i = 0; i < memories.size(); ++i) {
        const auto snippet_tokens = word_tokens(memories[i].text);
        const std::set<std::string> snippet(snippet_tokens.begin(), snippet_tokens.end());
        int overlap = 0;
        for (const auto& token : snippet) {
            if (query.count(token)) {
                ++overlap;
            }
        }
        scored.emplace_back(-overlap, i);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<const MemorySnippet*> result;
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), memories.size());
    for (std::size_t i = 0; i < take; ++i) {
        result.push_back(&memories[scored[i].second]);
    }
    return result;
}

std::string build_system_prompt(const CharacterProfile& character, const RolePlayConfig& config,
                                const std::string& question) {
    std::string prompt;
    if (config.use_description && !character.description.empty()) {
        prompt = character.description;
    }
    if (config.use_memory && config.memory_top_k > 0) {
        const auto snippets = retrieve_memory(question, character.memories, config.memory_top_k);
        if (!snippets.empty()) {
            if (!prompt.empty()) {
                prompt += "\n\n";
            }
            prompt += "Classic dialogue scenes:";
            for (const auto* snippet : snippets) {
                prompt += "\n" + snippet->speaker + ": " + snippet->text;
            }
        }
    }
    return prompt;
}

namespace {

bool is_speaker_tag_line(const std::string& line, const std::string& speaker) {
    const std::string trimmed = trim(line);
    if (trimmed.size() <= speaker.size()) {
        return false;
    }
    if (to_lower(trimmed.substr(0, speaker.size())) != to_lower(speaker)) {
        return false;
    }
    const std::string rest = trim(trimmed.substr(speaker.size()));
    return !rest.empty() && (rest[0] == ':' || rest.substr(0, 3) == "\xEF\xBC\x9A");
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> sentences;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        current.push_back(text[i]);
        if (text[i] == '.' || text[i] == '!' || text[i] == '?') {
            // Swallow closing quotes and the terminator run.
            while (i + 1 < text.size() &&
                   (text[i + 1] == '.' || text[i + 1] == '!' || text[i + 1] == '?' ||
                    text[i + 1] == '"' || text[i + 1] == '\'')) {
                current.push_back(text[++i]);
            }
            if (i + 1 >= text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))) {
                sentences.push_back(trim(current));
                current.clear();
            }
        }
    }
    if (!trim(current).empty()) {
        sentences.push_back(trim(current));
    }
    return sentences;
}

std::string collapse_repeated_sentences(const std::string& paragraph) {
    const auto sentences = split_sentences(paragraph);
    if (sentences.size() < 2) {
        return trim(paragraph);
    }
    std::vector<std::string> kept;
    for (const auto& sentence : sentences) {
        if (kept.empty() || kept.back() != sentence) {
            kept.push_back(sentence);
        }
    }
    std::string result;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i > 0) {
            result += " ";
        }
        result += kept[i];
    }
    return result;
}

}  // namespace

std::string clean_response(const std::string& raw, const std::string& experimenter) {
    // Truncate at the first fabricated turn re-introducing the experimenter.
    std::vector<std::string> lines = split_lines(raw);
    std::vector<std::string> kept_lines;
    for (const auto& line : lines) {
        if (is_speaker_tag_line(line, experimenter) ||
            is_speaker_tag_line(line, "Experimenter")) {
            break;
        }
        kept_lines.push_back(line);
    }

    // Sentence-collapse each paragraph, then drop consecutive duplicates.
    std::vector<std::string> paragraphs;
    std::string current;
    auto flush = [&]() {
        const std::string collapsed = collapse_repeated_sentences(trim(current));
        if (!collapsed.empty() && (paragraphs.empty() || paragraphs.back() != collapsed)) {
            paragraphs.push_back(collapsed);
        }
        current.clear();
    };
    for (const auto& line : kept_lines) {
        if (trim(line).empty()) {
            flush();
        } else {
            if (!current.empty()) {
                current += "\n";
            }
            current += line;
        }
    }
    flush();

    std::string result;
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
        if (i > 0) {
            result += "\n\n";
        }
        result += paragraphs[i];
    }
    return result;
}

Transcript run_interview(const CharacterProfile& character, const LikertScale& scale,
                         const std::vector<InterviewQuestion>& questions,
                         const RolePlayConfig& config, ChatBackend& backend, int runs,
                         const InterviewOptions& options) {
    if (!config.use_description && !config.use_memory) {
        throw std::runtime_error("role-play config must use description and/or memory");
    }
    if (runs < 1 || questions.empty()) {
        throw std::runtime_error("run_interview needs runs >= 1 and a non-empty question list");
    }
    for (const auto& question : questions) {
        if (scale.find_item(question.item_id) == nullptr) {
            throw ScaleError("question references unknown item '" + question.item_id + "'");
        }
    }

    Transcript transcript;
    transcript.character_id = character.id;
    transcript.scale_id = scale.name;
    transcript.records.resize(static_cast<std::size_t>(runs) * questions.size());

    const std::size_t per_run = questions.size();
    parallel_for(transcript.records.size(), options.parallelism, [&](std::size_t index) {
        const int run_id = static_cast<int>(index / per_run) + 1;
        const auto& question = questions[index % per_run];

        InterviewRecord record;
        record.character_id = character.id;
        record.scale_id = scale.name;
        record.run_id = run_id;
        record.item_id = question.item_id;
        record.question = question.text;
        record.backend_id = backend.id();

        ChatRequest request;
        const std::string system = build_system_prompt(character, config, question.text);
        if (!system.empty()) {
            request.messages.push_back({"system", system});
        }
        request.messages.push_back({"user", question.text});
        request.temperature = options.temperature;
        request.max_tokens = options.max_tokens;
        request.salt = "run:" + std::to_string(run_id);
        try {
            record.raw_response = backend.complete(request);
            record.response = clean_response(record.raw_response, config.experimenter);
        } catch (const ChatError&) {
            record.failed = true;
        }
        record.timestamp = iso8601_now();
        transcript.records[index] = std::move(record);
    });

    for (int run = 1; run <= runs; ++run) {
        bool any_ok = false;
        for (std::size_t q = 0; q < per_run; ++q) {
            if (!transcript.records[(run - 1) * per_run + q].failed) {
                any_ok = true;
                break;
            }
        }
        if (!any_ok) {
            throw ChatError("interview run " + std::to_string(run) + " failed on every question");
        }
    }

    if (!options.transcript_path.empty()) {
        save_transcript(transcript, options.transcript_path);
    }
    return transcript;
}

void save_transcript(const Transcript& transcript, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const auto& record : transcript.records) {
        ordered_json line;
        line["character"] = record.character_id;
        line["scale"] = record.scale_id;
        line["run"] = record.run_id;
        line["item"] = record.item_id;
        line["question"] = record.question;
        line["raw_response"] = record.raw_response;
        line["response"] = record.response;
        line["timestamp"] = record.timestamp;
        line["backend"] = record.backend_id;
        line["failed"] = record.failed;
        out << line.dump() << "\n";
    }
    write_file_atomic(path, out.str());
}

Transcript load_transcript(const std::filesystem::path& path) {
    Transcript transcript;
    for (const auto& line : split_lines(read_file(path))) {
        if (trim(line).empty()) {
            continue;
        }
        const json doc = json::parse(line);
        InterviewRecord record;
        record.character_id = doc.at("character").get<std::string>();
        record.scale_id = doc.at("scale").get<std::string>();
        record.run_id = doc.at("run").get<int>();
        record.item_id = doc.at("item").get<std::string>();
        record.question = doc.at("question").get<std::string>();
        record.raw_response = doc.at("raw_response").get<std::string>();
        record.response = doc.at("response").get<std::string>();
        record.timestamp = doc.at("timestamp").get<std::string>();
        record.backend_id = doc.at("backend").get<std::string>();
        record.failed = doc.at("failed").get<bool>();
        transcript.character_id = record.character_id;
        transcript.scale_id = record.scale_id;
        transcript.records.push_back(std::move(record));
    }
    return transcript;
}

}  // namespace incharacter
