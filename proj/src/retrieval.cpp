// SPDX-License-Identifier: Apache-2.0
#include "compact/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "compact/common.hpp"
#include "compact/eval.hpp"

namespace compact {

std::vector<std::string> analyze_text(const std::string& text) {
    std::vector<std::string> terms;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                                     : static_cast<char>(c));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

Bm25Index Bm25Index::build(const std::vector<Document>& docs, Bm25Params params) {
    if (docs.empty()) {
        throw Error(Error::Kind::Config, "cannot build an index over an empty corpus");
    }
    if (params.k1 <= 0.0 || params.b < 0.0 || params.b > 1.0) {
        throw Error(Error::Kind::Config, "BM25 parameters out of range (k1 > 0, b in [0,1])");
    }
    Bm25Index index;
    index.params_ = params;
    for (const auto& doc : docs) {
        if (index.doc_lengths_.count(doc.id)) {
            throw Error(Error::Kind::Config, "duplicate document id in corpus: " + doc.id);
        }
        const auto terms = analyze_text(doc.title + " " + doc.text);
        index.doc_lengths_[doc.id] = static_cast<long long>(terms.size());
        std::map<std::string, int> tf;
        for (const auto& t : terms) ++tf[t];
        for (const auto& [term, count] : tf) {
            index.postings_[term].emplace_back(doc.id, count);
        }
    }
    // order-independence: postings sorted by doc_id regardless of input order
    for (auto& [term, list] : index.postings_) {
        std::sort(list.begin(), list.end());
    }
    long long total = 0;
    for (const auto& [id, len] : index.doc_lengths_) total += len;
    index.avg_doc_length_ =
        static_cast<double>(total) / static_cast<double>(index.doc_lengths_.size());
    return index;
}

std::vector<RetrievalHit> Bm25Index::retrieve(const std::string& query, int k) const {
    if (k < 1) {
        throw Error(Error::Kind::Config, "retrieve requires k >= 1");
    }
    // unique query terms in sorted order; duplicates in the query count once
    const auto raw_terms = analyze_text(query);
    const std::set<std::string> terms(raw_terms.begin(), raw_terms.end());

    const double n_docs = static_cast<double>(doc_lengths_.size());
    std::map<std::string, double> scores;  // doc_id -> accumulated score
    for (const auto& term : terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& list = it->second;
        const double df = static_cast<double>(list.size());
        const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
        for (const auto& [doc_id, tf] : list) {
            const double len = static_cast<double>(doc_lengths_.at(doc_id));
            const double denom =
                tf + params_.k1 * (1.0 - params_.b + params_.b * len / avg_doc_length_);
            scores[doc_id] += idf * (tf * (params_.k1 + 1.0)) / denom;
        }
    }

    std::vector<RetrievalHit> hits;
    hits.reserve(scores.size());
    for (const auto& [doc_id, score] : scores) {
        hits.push_back(RetrievalHit{doc_id, 0, score});
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (hits.size() > static_cast<std::size_t>(k)) hits.resize(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i) + 1;
    return hits;
}

void Bm25Index::save(const std::string& path) const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["type"] = "bm25";
    j["k1"] = params_.k1;
    j["b"] = params_.b;
    j["avg_doc_length"] = avg_doc_length_;
    j["doc_count"] = doc_count();
    nlohmann::json lengths = nlohmann::json::object();
    for (const auto& [id, len] : doc_lengths_) lengths[id] = len;
    j["doc_lengths"] = lengths;
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [term, list] : postings_) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& [id, tf] : list) entries.push_back({id, tf});
        postings[term] = entries;
    }
    j["postings"] = postings;

    std::ofstream out(path);
    if (!out) {
        throw Error(Error::Kind::Io, "cannot write index file: " + path);
    }
    out << j.dump(2) << "\n";
    if (!out) {
        throw Error(Error::Kind::Io, "write failed: " + path);
    }
}

Bm25Index Bm25Index::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Kind::Io, "cannot open index file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Kind::Parse, "malformed index file " + path + ": " + e.what());
    }
    if (!j.contains("format_version") || j["format_version"].get<int>() != 1 ||
        j.value("type", std::string{}) != "bm25") {
        throw Error(Error::Kind::Parse, "unsupported index format in " + path);
    }
    Bm25Index index;
    index.params_.k1 = j.at("k1").get<double>();
    index.params_.b = j.at("b").get<double>();
    for (const auto& [id, len] : j.at("doc_lengths").items()) {
        index.doc_lengths_[id] = len.get<long long>();
    }
    for (const auto& [term, entries] : j.at("postings").items()) {
        auto& list = index.postings_[term];
        for (const auto& entry : entries) {
            list.emplace_back(entry.at(0).get<std::string>(), entry.at(1).get<int>());
        }
    }
    if (index.doc_lengths_.empty()) {
        throw Error(Error::Kind::Parse, "index file holds no documents: " + path);
    }
    long long total = 0;
    for (const auto& [id, len] : index.doc_lengths_) total += len;
    index.avg_doc_length_ =
        static_cast<double>(total) / static_cast<double>(index.doc_lengths_.size());
    return index;
}

namespace {

struct ParsedEndpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(Error::Kind::Config, "endpoint must include a scheme: " + endpoint);
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {endpoint, "/"};
    }
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

} // namespace

RemoteRetrievalResult remote_retrieve(const std::string& endpoint, const std::string& query, int k,
                                      int max_attempts) {
    if (k < 1) {
        throw Error(Error::Kind::Config, "remote_retrieve requires k >= 1");
    }
    if (max_attempts < 1) max_attempts = 1;
    const auto [base, path] = split_endpoint(endpoint);
    const nlohmann::json body = {{"query", query}, {"k", k}};

    httplib::Client client(base);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(30, 0);

    std::string response_body;
    bool ok = false;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        auto res = client.Post(path, body.dump(), "application/json");
        if (res && res->status == 200) {
            response_body = res->body;
            ok = true;
            break;
        }
        if (attempt == max_attempts) {
            std::string detail = res ? "HTTP status " + std::to_string(res->status)
                                     : "transport error";
            throw Error(Error::Kind::Network, "remote retriever " + endpoint + " failed after " +
                                                  std::to_string(max_attempts) +
                                                  " attempts: " + detail);
        }
    }
    (void)ok;

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(response_body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Kind::Parse,
                    std::string("malformed remote retriever response: ") + e.what());
    }
    if (!parsed.is_array()) {
        throw Error(Error::Kind::Parse, "remote retriever response must be a JSON array");
    }

    RemoteRetrievalResult result;
    for (const auto& item : parsed) {
        if (!item.contains("doc_id") || !item.contains("score")) {
            throw Error(Error::Kind::Parse,
                        "remote retriever item missing doc_id or score: " + item.dump());
        }
        RetrievalHit hit;
        hit.doc_id = item["doc_id"].get<std::string>();
        hit.score = item["score"].get<double>();
        result.hits.push_back(hit);
        if (item.contains("text") && item["text"].is_string() &&
            !trim(item["text"].get<std::string>()).empty()) {
            Document doc;
            doc.id = hit.doc_id;
            doc.text = item["text"].get<std::string>();
            if (item.contains("title") && item["title"].is_string()) {
                doc.title = item["title"].get<std::string>();
            }
            result.documents.push_back(std::move(doc));
        }
    }

    std::sort(result.hits.begin(), result.hits.end(),
              [](const RetrievalHit& a, const RetrievalHit& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.doc_id < b.doc_id;
              });
    if (result.hits.size() > static_cast<std::size_t>(k)) {
        result.hits.resize(static_cast<std::size_t>(k));
    }
    for (std::size_t i = 0; i < result.hits.size(); ++i) {
        result.hits[i].rank = static_cast<int>(i) + 1;
    }
    return result;
}

std::vector<Document> oracle_select(const QAExample& example, const std::vector<Document>& corpus,
                                    int default_n) {
    if (corpus.empty()) return {};
    std::vector<std::string> norm_answers;
    norm_answers.reserve(example.answers.size());
    for (const auto& a : example.answers) norm_answers.push_back(normalize_answer(a));

    std::vector<Document> matches;
    for (const auto& doc : corpus) {
        const std::string norm_text = normalize_answer(doc.text);
        for (const auto& ans : norm_answers) {
            if (!ans.empty() && norm_text.find(ans) != std::string::npos) {
                matches.push_back(doc);
                break;
            }
        }
    }
    if (!matches.empty()) return matches;
    const std::size_t n = std::min<std::size_t>(corpus.size(),
                                                static_cast<std::size_t>(std::max(default_n, 0)));
    return std::vector<Document>(corpus.begin(), corpus.begin() + static_cast<std::ptrdiff_t>(n));
}

} // namespace compact
