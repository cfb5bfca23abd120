// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace compact {

/// One retrievable text unit. `text` is guaranteed non-empty after trimming
/// for any document produced by load_documents.
struct Document {
    std::string id;
    std::string title;
    std::string text;
    std::optional<int> source_rank;      // 1-based position in a retrieval list
    std::optional<double> source_score;  // retriever score, if any
};

struct QAExample {
    std::string id;
    std::string question;
    std::vector<std::string> answers;       // at least one entry
    std::vector<std::string> gold_doc_ids;  // may be empty
};

struct TokenCount {
    long long value = 0;
    std::string scheme;
};

void to_json(nlohmann::json& j, const Document& d);
void from_json(const nlohmann::json& j, Document& d);
void to_json(nlohmann::json& j, const QAExample& e);
void from_json(const nlohmann::json& j, QAExample& e);
void to_json(nlohmann::json& j, const TokenCount& c);
void from_json(const nlohmann::json& j, TokenCount& c);

/// Loads a JSONL corpus (one document per line, blank lines skipped).
/// Rejects malformed lines and duplicate ids, reporting the line number.
std::vector<Document> load_documents(const std::string& path, const std::string& format = "jsonl");

std::vector<QAExample> load_qa_examples(const std::string& path, const std::string& format = "jsonl");

void save_documents(const std::vector<Document>& docs, const std::string& path);

/// Token counting is pluggable so that metrics can name the scheme that
/// produced them. The built-in "whitespace" scheme counts maximal
/// non-whitespace runs.
using TokenCounterFn = std::function<long long(const std::string&)>;

void register_token_scheme(const std::string& name, TokenCounterFn counter);
bool token_scheme_registered(const std::string& name);
TokenCount count_tokens(const std::string& text, const std::string& scheme = "whitespace");

} // namespace compact
