// SPDX-License-Identifier: Apache-2.0
#include "compact/corpus.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include "compact/common.hpp"

namespace compact {

void to_json(nlohmann::json& j, const Document& d) {
    j = nlohmann::json{{"id", d.id}, {"title", d.title}, {"text", d.text}};
    if (d.source_rank) j["source_rank"] = *d.source_rank;
    if (d.source_score) j["source_score"] = *d.source_score;
}

void from_json(const nlohmann::json& j, Document& d) {
    d.id = j.at("id").get<std::string>();
    d.title = j.value("title", std::string{});
    d.text = j.at("text").get<std::string>();
    if (j.contains("source_rank") && !j["source_rank"].is_null())
        d.source_rank = j["source_rank"].get<int>();
    if (j.contains("source_score") && !j["source_score"].is_null())
        d.source_score = j["source_score"].get<double>();
}

void to_json(nlohmann::json& j, const QAExample& e) {
    j = nlohmann::json{{"id", e.id}, {"question", e.question}, {"answers", e.answers}};
    if (!e.gold_doc_ids.empty()) j["gold_doc_ids"] = e.gold_doc_ids;
}

void from_json(const nlohmann::json& j, QAExample& e) {
    e.id = j.value("id", std::string{});
    e.question = j.at("question").get<std::string>();
    e.answers = j.at("answers").get<std::vector<std::string>>();
    if (j.contains("gold_doc_ids") && !j["gold_doc_ids"].is_null())
        e.gold_doc_ids = j["gold_doc_ids"].get<std::vector<std::string>>();
}

void to_json(nlohmann::json& j, const TokenCount& c) {
    j = nlohmann::json{{"value", c.value}, {"scheme", c.scheme}};
}

void from_json(const nlohmann::json& j, TokenCount& c) {
    c.value = j.at("value").get<long long>();
    c.scheme = j.at("scheme").get<std::string>();
}

namespace {

void check_format(const std::string& format) {
    if (format != "jsonl") {
        throw Error(Error::Kind::Config, "unsupported corpus format: " + format);
    }
}

// Calls fn(line_number, parsed_json) for every non-blank line.
void for_each_jsonl_record(const std::string& path,
                           const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Kind::Io, "cannot open file: " + path);
    }
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
                        path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
        }
        fn(line_no, record);
    }
}

} // namespace

std::vector<Document> load_documents(const std::string& path, const std::string& format) {
    check_format(format);
    std::vector<Document> docs;
    std::unordered_set<std::string> seen_ids;
    for_each_jsonl_record(path, [&](std::size_t line_no, const nlohmann::json& record) {
        Document doc;
        try {
            from_json(record, doc);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Error::Kind::Parse,
                        path + ":" + std::to_string(line_no) + ": bad document record: " + e.what());
        }
        if (doc.id.empty()) {
            throw Error(Error::Kind::Parse,
                        path + ":" + std::to_string(line_no) + ": document id must be non-empty");
        }
        if (trim(doc.text).empty()) {
            throw Error(Error::Kind::Parse,
                        path + ":" + std::to_string(line_no) + ": document text must be non-empty");
        }
        if (!seen_ids.insert(doc.id).second) {
            throw Error(Error::Kind::Parse, path + ":" + std::to_string(line_no) +
                                                ": duplicate document id '" + doc.id + "'");
        }
        docs.push_back(std::move(doc));
    });
    return docs;
}

std::vector<QAExample> load_qa_examples(const std::string& path, const std::string& format) {
    check_format(format);
    std::vector<QAExample> examples;
    for_each_jsonl_record(path, [&](std::size_t line_no, const nlohmann::json& record) {
        QAExample ex;
        try {
            from_json(record, ex);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Error::Kind::Parse,
                        path + ":" + std::to_string(line_no) + ": bad QA record: " + e.what());
        }
        if (ex.id.empty()) {
            ex.id = "q" + std::to_string(line_no);
        }
        if (trim(ex.question).empty()) {
            throw Error(Error::Kind::Parse,
                        path + ":" + std::to_string(line_no) + ": question must be non-empty");
        }
        if (ex.answers.empty()) {
            throw Error(Error::Kind::Parse,
                        path + ":" + std::to_string(line_no) + ": answers must be non-empty");
        }
        for (const auto& a : ex.answers) {
            if (trim(a).empty()) {
                throw Error(Error::Kind::Parse, path + ":" + std::to_string(line_no) +
                                                    ": answers must not contain empty strings");
            }
        }
        examples.push_back(std::move(ex));
    });
    return examples;
}

void save_documents(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(Error::Kind::Io, "cannot write file: " + path);
    }
    for (const auto& doc : docs) {
        nlohmann::json j;
        to_json(j, doc);
        out << j.dump() << "\n";
    }
    if (!out) {
        throw Error(Error::Kind::Io, "write failed: " + path);
    }
}

namespace {

long long whitespace_token_count(const std::string& text) {
    long long count = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

std::map<std::string, TokenCounterFn>& scheme_registry() {
    static std::map<std::string, TokenCounterFn> registry{{"whitespace", whitespace_token_count}};
    return registry;
}

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

void register_token_scheme(const std::string& name, TokenCounterFn counter) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    scheme_registry()[name] = std::move(counter);
}

bool token_scheme_registered(const std::string& name) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    return scheme_registry().count(name) > 0;
}

TokenCount count_tokens(const std::string& text, const std::string& scheme) {
    TokenCounterFn counter;
    {
        std::lock_guard<std::mutex> lock(registry_mutex());
        auto it = scheme_registry().find(scheme);
        if (it == scheme_registry().end()) {
            throw Error(Error::Kind::Config, "unknown token scheme: " + scheme);
        }
        counter = it->second;
    }
    return TokenCount{counter(text), scheme};
}

} // namespace compact
