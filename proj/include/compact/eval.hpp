// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "compact/corpus.hpp"

namespace compact {

/// QA answer normalization: lowercase, strip punctuation, drop the articles
/// a/an/the as whole words, collapse whitespace.
std::string normalize_answer(const std::string& s);

/// normalize_answer followed by a whitespace split.
std::vector<std::string> normalize_tokens(const std::string& s);

/// 1 iff the normalized prediction equals some normalized gold answer.
int exact_match(const std::string& prediction, const std::vector<std::string>& golds);

/// Token-level F1 on normalized token multisets, max over golds.
/// 0 if exactly one side is empty, 1 if both are empty.
double f1_score(const std::string& prediction, const std::vector<std::string>& golds);

/// source/compressed ratio. compressed must be > 0; source 0 yields 0.0.
double compression_rate(const TokenCount& source_tokens, const TokenCount& compressed_tokens);

/// 1 iff the answer is reachable within the first k docs. When the example
/// carries gold_doc_ids, id membership decides; otherwise a normalized gold
/// answer must appear as a substring of a normalized document text.
int recall_at_k(const std::vector<Document>& docs, const QAExample& example, int k);

struct CostModel {
    struct Price {
        double input_per_1k = 0.0;
        double output_per_1k = 0.0;
    };
    std::map<std::string, Price> prices;  // provider name -> price
};

double estimate_cost(long long input_tokens, long long output_tokens, const CostModel& model,
                     const std::string& provider);

struct EvalRecord {
    std::string example_id;
    std::string prediction;
    int em = 0;
    double f1 = 0.0;
    std::optional<double> compression_rate;        // absent when no compression ran
    std::optional<int> recall_hit;
    std::chrono::microseconds compression_time{0};
    std::chrono::microseconds reading_time{0};
    double cost = 0.0;
    std::optional<long long> source_tokens;        // feeds the total-ratio report
    std::optional<long long> compressed_tokens;
    std::optional<int> termination_step;           // step the loop stopped at
    std::vector<long long> step_compressed_tokens; // l(C_t) per step, 1-based
};

struct EvalReport {
    int count = 0;
    double em_pct = 0.0;
    double f1_mean = 0.0;
    std::optional<double> recall_pct;
    std::optional<double> compression_rate_mean;   // mean of per-query ratios (headline)
    std::optional<double> compression_rate_total;  // total source / total compressed
    double cost_total = 0.0;
    double cost_mean = 0.0;
    double compression_time_ms_mean = 0.0;
    double reading_time_ms_mean = 0.0;
    std::map<int, int> termination_histogram;            // step -> query count
    std::map<int, double> avg_compressed_tokens_per_step; // step -> mean l(C_t)
};

/// Arithmetic means over records; errors on empty input. The termination
/// histogram covers the records that carry a termination_step.
EvalReport aggregate(const std::vector<EvalRecord>& records);

void to_json(nlohmann::json& j, const EvalRecord& r);
void to_json(nlohmann::json& j, const EvalReport& r);

/// Two-column plain-text table, percentages to one decimal place.
std::string format_report_table(const EvalReport& report);

} // namespace compact
