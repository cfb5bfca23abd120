// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "compact/corpus.hpp"

namespace compact {

struct RetrievalHit {
    std::string doc_id;
    int rank = 0;   // 1-based, contiguous
    double score = 0.0;
};

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

/// Deterministic analyzer shared by indexing and queries: lowercase and
/// split on non-alphanumeric bytes, dropping empty terms.
std::vector<std::string> analyze_text(const std::string& text);

/// Okapi BM25 inverted index over title + text. Immutable once built;
/// concurrent retrieve() calls are safe.
class Bm25Index {
public:
    using Postings = std::map<std::string, std::vector<std::pair<std::string, int>>>;

    static Bm25Index build(const std::vector<Document>& docs, Bm25Params params = {});

    /// Top-k hits ordered by score desc, doc_id asc on ties. Documents that
    /// match no query term are never returned.
    std::vector<RetrievalHit> retrieve(const std::string& query, int k) const;

    void save(const std::string& path) const;
    static Bm25Index load(const std::string& path);

    int doc_count() const { return static_cast<int>(doc_lengths_.size()); }
    double avg_doc_length() const { return avg_doc_length_; }
    const Postings& postings() const { return postings_; }
    const std::map<std::string, long long>& doc_lengths() const { return doc_lengths_; }
    Bm25Params params() const { return params_; }

private:
    Bm25Params params_;
    Postings postings_;                          // term -> [(doc_id, tf)], sorted by doc_id
    std::map<std::string, long long> doc_lengths_;
    double avg_doc_length_ = 0.0;
};

struct RemoteRetrievalResult {
    std::vector<RetrievalHit> hits;
    std::vector<Document> documents;  // docs the server inlined alongside scores
};

/// POST {"query","k"} to the endpoint and locally re-rank the response so
/// the RetrievalHit invariants hold. Retries transport failures up to
/// max_attempts before surfacing a network error naming the attempt count.
RemoteRetrievalResult remote_retrieve(const std::string& endpoint, const std::string& query, int k,
                                      int max_attempts = 3);

/// All documents whose normalized text contains a normalized gold answer;
/// falls back to the first default_n documents when none match.
std::vector<Document> oracle_select(const QAExample& example, const std::vector<Document>& corpus,
                                    int default_n = 5);

} // namespace compact
