// SPDX-License-Identifier: Apache-2.0
#include "compact/eval.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "compact/common.hpp"

namespace compact {

std::string normalize_answer(const std::string& s) {
    // lowercase + strip punctuation in one pass
    std::string lowered;
    lowered.reserve(s.size());
    for (unsigned char c : s) {
        if (std::ispunct(c)) continue;
        lowered.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                                 : static_cast<char>(c));
    }
    // drop articles as whole words, collapse whitespace
    std::istringstream in(lowered);
    std::string word;
    std::string out;
    while (in >> word) {
        if (word == "a" || word == "an" || word == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    return out;
}

std::vector<std::string> normalize_tokens(const std::string& s) {
    std::istringstream in(normalize_answer(s));
    std::vector<std::string> tokens;
    std::string word;
    while (in >> word) tokens.push_back(word);
    return tokens;
}

int exact_match(const std::string& prediction, const std::vector<std::string>& golds) {
    const std::string norm_pred = normalize_answer(prediction);
    for (const auto& gold : golds) {
        if (norm_pred == normalize_answer(gold)) return 1;
    }
    return 0;
}

namespace {

double single_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    std::unordered_map<std::string, int> gold_counts;
    for (const auto& t : gold) ++gold_counts[t];
    long long overlap = 0;
    for (const auto& t : pred) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace

double f1_score(const std::string& prediction, const std::vector<std::string>& golds) {
    const auto pred_tokens = normalize_tokens(prediction);
    double best = 0.0;
    for (const auto& gold : golds) {
        best = std::max(best, single_f1(pred_tokens, normalize_tokens(gold)));
    }
    return best;
}

double compression_rate(const TokenCount& source_tokens, const TokenCount& compressed_tokens) {
    if (compressed_tokens.value <= 0) {
        throw Error(Error::Kind::Config, "compression rate undefined: compressed token count is 0");
    }
    if (source_tokens.value <= 0) return 0.0;
    return static_cast<double>(source_tokens.value) / static_cast<double>(compressed_tokens.value);
}

int recall_at_k(const std::vector<Document>& docs, const QAExample& example, int k) {
    if (k < 1) {
        throw Error(Error::Kind::Config, "recall_at_k requires k >= 1");
    }
    const std::size_t limit = std::min<std::size_t>(docs.size(), static_cast<std::size_t>(k));
    if (!example.gold_doc_ids.empty()) {
        for (std::size_t i = 0; i < limit; ++i) {
            for (const auto& gold_id : example.gold_doc_ids) {
                if (docs[i].id == gold_id) return 1;
            }
        }
        return 0;
    }
    std::vector<std::string> norm_answers;
    norm_answers.reserve(example.answers.size());
    for (const auto& a : example.answers) norm_answers.push_back(normalize_answer(a));
    for (std::size_t i = 0; i < limit; ++i) {
        const std::string norm_text = normalize_answer(docs[i].text);
        for (const auto& ans : norm_answers) {
            if (!ans.empty() && norm_text.find(ans) != std::string::npos) return 1;
        }
    }
    return 0;
}

double estimate_cost(long long input_tokens, long long output_tokens, const CostModel& model,
                     const std::string& provider) {
    auto it = model.prices.find(provider);
    if (it == model.prices.end()) {
        throw Error(Error::Kind::Config, "no prices configured for provider: " + provider);
    }
    return static_cast<double>(input_tokens) / 1000.0 * it->second.input_per_1k +
           static_cast<double>(output_tokens) / 1000.0 * it->second.output_per_1k;
}

EvalReport aggregate(const std::vector<EvalRecord>& records) {
    if (records.empty()) {
        throw Error(Error::Kind::Config, "cannot aggregate an empty record list");
    }
    EvalReport report;
    report.count = static_cast<int>(records.size());

    double em_sum = 0.0, f1_sum = 0.0, cost_sum = 0.0;
    double ctime_sum = 0.0, rtime_sum = 0.0;
    double recall_sum = 0.0;
    int recall_n = 0;
    double rate_sum = 0.0;
    int rate_n = 0;
    long long source_total = 0, compressed_total = 0;
    bool have_totals = false;
    std::map<int, long long> step_token_sums;
    std::map<int, int> step_token_counts;

    for (const auto& r : records) {
        em_sum += r.em;
        f1_sum += r.f1;
        cost_sum += r.cost;
        ctime_sum += std::chrono::duration<double, std::milli>(r.compression_time).count();
        rtime_sum += std::chrono::duration<double, std::milli>(r.reading_time).count();
        if (r.recall_hit) {
            recall_sum += *r.recall_hit;
            ++recall_n;
        }
        if (r.compression_rate) {
            rate_sum += *r.compression_rate;
            ++rate_n;
        }
        if (r.source_tokens && r.compressed_tokens) {
            source_total += *r.source_tokens;
            compressed_total += *r.compressed_tokens;
            have_totals = true;
        }
        if (r.termination_step) {
            ++report.termination_histogram[*r.termination_step];
        }
        for (std::size_t t = 0; t < r.step_compressed_tokens.size(); ++t) {
            step_token_sums[static_cast<int>(t) + 1] += r.step_compressed_tokens[t];
            ++step_token_counts[static_cast<int>(t) + 1];
        }
    }

    const double n = static_cast<double>(records.size());
    report.em_pct = em_sum / n * 100.0;
    report.f1_mean = f1_sum / n;
    report.cost_total = cost_sum;
    report.cost_mean = cost_sum / n;
    report.compression_time_ms_mean = ctime_sum / n;
    report.reading_time_ms_mean = rtime_sum / n;
    if (recall_n > 0) report.recall_pct = recall_sum / recall_n * 100.0;
    if (rate_n > 0) report.compression_rate_mean = rate_sum / rate_n;
    if (have_totals && compressed_total > 0) {
        report.compression_rate_total =
            static_cast<double>(source_total) / static_cast<double>(compressed_total);
    }
    for (const auto& [step, sum] : step_token_sums) {
        report.avg_compressed_tokens_per_step[step] =
            static_cast<double>(sum) / step_token_counts[step];
    }
    return report;
}

void to_json(nlohmann::json& j, const EvalRecord& r) {
    j = nlohmann::json{
        {"example_id", r.example_id},
        {"prediction", r.prediction},
        {"em", r.em},
        {"f1", r.f1},
        {"compression_rate", r.compression_rate ? nlohmann::json(*r.compression_rate)
                                                : nlohmann::json(nullptr)},
        {"recall_hit", r.recall_hit ? nlohmann::json(*r.recall_hit) : nlohmann::json(nullptr)},
        {"compression_time_us", r.compression_time.count()},
        {"reading_time_us", r.reading_time.count()},
        {"cost", r.cost},
    };
    if (r.source_tokens) j["source_tokens"] = *r.source_tokens;
    if (r.compressed_tokens) j["compressed_tokens"] = *r.compressed_tokens;
    if (r.termination_step) j["termination_step"] = *r.termination_step;
    if (!r.step_compressed_tokens.empty()) j["step_compressed_tokens"] = r.step_compressed_tokens;
}

void to_json(nlohmann::json& j, const EvalReport& r) {
    j = nlohmann::json{
        {"count", r.count},
        {"em_pct", r.em_pct},
        {"f1_mean", r.f1_mean},
        {"recall_pct", r.recall_pct ? nlohmann::json(*r.recall_pct) : nlohmann::json(nullptr)},
        {"compression_rate_mean", r.compression_rate_mean
                                      ? nlohmann::json(*r.compression_rate_mean)
                                      : nlohmann::json(nullptr)},
        {"compression_rate_total", r.compression_rate_total
                                       ? nlohmann::json(*r.compression_rate_total)
                                       : nlohmann::json(nullptr)},
        {"cost_total", r.cost_total},
        {"cost_mean", r.cost_mean},
        {"compression_time_ms_mean", r.compression_time_ms_mean},
        {"reading_time_ms_mean", r.reading_time_ms_mean},
    };
    nlohmann::json histogram = nlohmann::json::object();
    for (const auto& [step, count] : r.termination_histogram) {
        histogram[std::to_string(step)] = count;
    }
    j["termination_histogram"] = histogram;
    nlohmann::json lengths = nlohmann::json::object();
    for (const auto& [step, mean] : r.avg_compressed_tokens_per_step) {
        lengths[std::to_string(step)] = mean;
    }
    j["avg_compressed_tokens_per_step"] = lengths;
}

namespace {

std::string fmt1(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << v;
    return os.str();
}

std::string fmt4(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

void row(std::ostringstream& os, const std::string& name, const std::string& value) {
    os << std::left << std::setw(32) << name << value << "\n";
}

} // namespace

std::string format_report_table(const EvalReport& report) {
    std::ostringstream os;
    row(os, "queries", std::to_string(report.count));
    row(os, "EM (%)", fmt1(report.em_pct));
    row(os, "F1 (%)", fmt1(report.f1_mean * 100.0));
    row(os, "recall (%)", report.recall_pct ? fmt1(*report.recall_pct) : "n/a");
    row(os, "compression rate (mean)",
        report.compression_rate_mean ? fmt1(*report.compression_rate_mean) : "n/a");
    row(os, "compression rate (total)",
        report.compression_rate_total ? fmt1(*report.compression_rate_total) : "n/a");
    row(os, "cost (total)", fmt4(report.cost_total));
    row(os, "cost (mean)", fmt4(report.cost_mean));
    row(os, "compression time (ms, mean)", fmt1(report.compression_time_ms_mean));
    row(os, "reading time (ms, mean)", fmt1(report.reading_time_ms_mean));
    if (!report.termination_histogram.empty()) {
        std::ostringstream h;
        for (const auto& [step, count] : report.termination_histogram) {
            h << "t=" << step << ":" << count << " ";
        }
        row(os, "termination histogram", trim(h.str()));
    }
    if (!report.avg_compressed_tokens_per_step.empty()) {
        std::ostringstream h;
        for (const auto& [step, mean] : report.avg_compressed_tokens_per_step) {
            h << "t=" << step << ":" << fmt1(mean) << " ";
        }
        row(os, "avg compressed tokens/step", trim(h.str()));
    }
    return os.str();
}

} // namespace compact
