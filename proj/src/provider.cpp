// SPDX-License-Identifier: Apache-2.0
#include "compact/provider.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "compact/common.hpp"
#include "compact/compression.hpp"
#include "compact/eval.hpp"

namespace compact {

std::string truncate_to_tokens(const std::string& text, int max_tokens) {
    if (max_tokens <= 0) return text;
    int seen = 0;
    bool in_token = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
        if (!space && !in_token) {
            in_token = true;
            ++seen;
        } else if (space && in_token) {
            in_token = false;
            if (seen == max_tokens) {
                return text.substr(0, i);
            }
        }
    }
    return text;
}

ScriptedProvider::ScriptedProvider(std::vector<std::string> responses)
    : responses_(std::move(responses)) {}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Kind::Io, "cannot open provider script: " + path);
    }
    std::vector<std::string> responses;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Error::Kind::Parse,
                        path + ":" + std::to_string(line_no) + ": malformed script line: " + e.what());
        }
        if (record.contains("text")) {
            responses.push_back(record["text"].get<std::string>());
        } else if (record.contains("response")) {
            responses.push_back(record["response"].get<std::string>());
        } else {
            throw Error(Error::Kind::Parse, path + ":" + std::to_string(line_no) +
                                                ": script line needs a text or response field");
        }
    }
    return std::make_shared<ScriptedProvider>(std::move(responses));
}

Generation ScriptedProvider::generate(const std::string& prompt, int max_tokens) {
    (void)prompt;
    std::lock_guard<std::mutex> lock(mutex_);
    if (next_ >= responses_.size()) {
        throw Error(Error::Kind::Provider, "scripted provider exhausted after " +
                                               std::to_string(responses_.size()) + " responses");
    }
    return make_generation(responses_[next_++], max_tokens);
}

RuleProvider::RuleProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {}

std::shared_ptr<RuleProvider> RuleProvider::from_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Kind::Io, "cannot open provider rules: " + path);
    }
    std::vector<Rule> rules;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Error::Kind::Parse,
                        path + ":" + std::to_string(line_no) + ": malformed rule line: " + e.what());
        }
        Rule rule;
        rule.match = record.at("match").get<std::string>();
        rule.step = record.value("step", 1);
        rule.response = record.at("response").get<std::string>();
        rules.push_back(std::move(rule));
    }
    return std::make_shared<RuleProvider>(std::move(rules));
}

Generation RuleProvider::generate(const std::string& prompt, int max_tokens) {
    std::lock_guard<std::mutex> lock(mutex_);
    // the longest key found in the prompt wins, so overlapping keys stay
    // deterministic
    const std::string* matched = nullptr;
    for (const auto& rule : rules_) {
        if (prompt.find(rule.match) == std::string::npos) continue;
        if (!matched || rule.match.size() > matched->size()) matched = &rule.match;
    }
    if (!matched) {
        throw Error(Error::Kind::Provider, "rule provider: no rule matches the prompt");
    }
    const int step = ++calls_per_match_[*matched];
    for (const auto& rule : rules_) {
        if (rule.match == *matched && rule.step == step) {
            return make_generation(rule.response, max_tokens);
        }
    }
    throw Error(Error::Kind::Provider, "rule provider: no rule for match '" + *matched +
                                           "' at step " + std::to_string(step));
}

namespace {

// Sentence spans per line, punctuation included, trimmed. Spans never cross
// line boundaries so each one is a substring of a single source string.
std::vector<std::string> split_sentence_spans(const std::string& text) {
    std::vector<std::string> spans;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t start = 0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '.' || line[i] == '?' || line[i] == '!') {
                const std::string span = trim(line.substr(start, i - start + 1));
                if (!span.empty()) spans.push_back(span);
                start = i + 1;
            }
        }
        const std::string tail = trim(line.substr(start));
        if (!tail.empty()) spans.push_back(tail);
    }
    return spans;
}

bool contains_any_answer(const std::string& text, const std::vector<std::string>& norm_answers) {
    const std::string norm = normalize_answer(text);
    for (const auto& ans : norm_answers) {
        if (!ans.empty() && norm.find(ans) != std::string::npos) return true;
    }
    return false;
}

} // namespace

AnswerOracleProvider::AnswerOracleProvider(
    std::map<std::string, std::vector<std::string>> answers_by_question, Options options)
    : answers_by_question_(std::move(answers_by_question)), options_(options) {}

Generation AnswerOracleProvider::generate(const std::string& prompt, int max_tokens) {
    // locate the question: longest configured question found in the prompt
    const std::string* question = nullptr;
    const std::vector<std::string>* answers = nullptr;
    std::size_t question_pos = std::string::npos;
    for (const auto& [q, a] : answers_by_question_) {
        const auto pos = prompt.find(q);
        if (pos == std::string::npos) continue;
        if (!question || q.size() > question->size()) {
            question = &q;
            answers = &a;
            question_pos = pos;
        }
    }
    if (!question) {
        throw Error(Error::Kind::Provider, "answer-oracle provider: no known question in prompt");
    }
    const std::string region = prompt.substr(question_pos + question->size());

    std::vector<std::string> norm_answers;
    norm_answers.reserve(answers->size());
    for (const auto& a : *answers) norm_answers.push_back(normalize_answer(a));

    // previous context block per the built-in template layout
    std::string prev_context;
    const auto prev_label = region.find("Previous context:\n");
    if (prev_label != std::string::npos) {
        const auto body_start = prev_label + std::string("Previous context:\n").size();
        const auto body_end = region.find("\n\nDocuments:", body_start);
        if (body_end != std::string::npos) {
            prev_context = trim(region.substr(body_start, body_end - body_start));
            if (prev_context == kNoPriorContextMarker) prev_context.clear();
        }
    }

    std::vector<std::string> selected;
    std::set<std::string> seen;
    for (const auto& span : split_sentence_spans(region)) {
        if (!contains_any_answer(span, norm_answers)) continue;
        if (!prev_context.empty() && prev_context.find(span) != std::string::npos) continue;
        if (seen.insert(span).second) selected.push_back(span);
    }

    std::string summary = prev_context;
    for (const auto& span : selected) {
        if (!summary.empty()) summary.push_back(' ');
        summary += span;
    }
    if (summary.empty()) summary = "No information relevant to the question has been found yet.";
    if (options_.max_summary_tokens > 0) {
        summary = truncate_to_tokens(summary, options_.max_summary_tokens);
    }

    const bool complete = contains_any_answer(summary, norm_answers);
    const std::string rationale =
        complete ? "The accumulated summary now contains the information needed to answer the question."
                 : "The summary does not yet contain the information needed to answer the question.";

    std::ostringstream out;
    if (options_.format == OutputFormat::ThreeSection) {
        out << kSelectedSentencesLabel << " ";
        if (selected.empty()) {
            out << "(none)";
        } else {
            for (std::size_t i = 0; i < selected.size(); ++i) {
                if (i > 0) out << "\n";
                out << selected[i];
            }
        }
        out << "\n";
    }
    out << kSummaryLabel << " " << summary << "\n";
    out << kEvaluationLabel << " " << rationale << " "
        << (complete ? kCompleteToken : kIncompleteToken);
    return make_generation(out.str(), max_tokens);
}

QuoteEchoProvider::QuoteEchoProvider(std::string default_answer)
    : default_answer_(std::move(default_answer)) {}

Generation QuoteEchoProvider::generate(const std::string& prompt, int max_tokens) {
    const auto open = prompt.find('"');
    if (open != std::string::npos) {
        const auto close = prompt.find('"', open + 1);
        if (close != std::string::npos && close > open + 1) {
            return make_generation(prompt.substr(open + 1, close - open - 1), max_tokens);
        }
    }
    return make_generation(default_answer_, max_tokens);
}

HttpProvider::HttpProvider(Options options) : options_(std::move(options)) {
    if (options_.endpoint.empty()) {
        throw Error(Error::Kind::Config, "http provider requires an endpoint");
    }
}

Generation HttpProvider::generate(const std::string& prompt, int max_tokens) {
    const auto scheme_end = options_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(Error::Kind::Config, "endpoint must include a scheme: " + options_.endpoint);
    }
    const auto path_start = options_.endpoint.find('/', scheme_end + 3);
    const std::string base =
        path_start == std::string::npos ? options_.endpoint : options_.endpoint.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : options_.endpoint.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(120, 0);

    httplib::Headers headers;
    if (!options_.auth_env.empty()) {
        const char* token = std::getenv(options_.auth_env.c_str());
        if (token == nullptr || *token == '\0') {
            throw Error(Error::Kind::Config,
                        "auth env var is not set: " + options_.auth_env);
        }
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    const nlohmann::json body = {{"prompt", prompt}, {"max_tokens", max_tokens}};
    const int attempts = std::max(options_.retries, 1);
    std::string response_body;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (res && res->status == 200) {
            response_body = res->body;
            break;
        }
        if (attempt == attempts) {
            std::string detail =
                res ? "HTTP status " + std::to_string(res->status) : "transport error";
            throw Error(Error::Kind::Network, "provider " + options_.provider_name + " at " +
                                                  options_.endpoint + " failed after " +
                                                  std::to_string(attempts) + " attempts: " + detail);
        }
    }

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(response_body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Kind::Parse, std::string("malformed provider response: ") + e.what());
    }
    if (!parsed.contains("text") || !parsed["text"].is_string()) {
        throw Error(Error::Kind::Parse, "provider response lacks a text field");
    }
    return Generation{parsed["text"].get<std::string>(), std::nullopt};
}

} // namespace compact
