// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "compact/corpus.hpp"
#include "compact/prompt.hpp"
#include "compact/provider.hpp"

namespace compact {

// Condition tokens and section labels are bit-exact wire contracts shared by
// the providers, the parser, and the exported training data.
inline constexpr const char* kCompleteToken = "[COMPLETE]";
inline constexpr const char* kIncompleteToken = "[INCOMPLETE]";
inline constexpr const char* kSummaryLabel = "Summary:";
inline constexpr const char* kEvaluationLabel = "Evaluation:";
inline constexpr const char* kSelectedSentencesLabel = "Selected sentences:";
inline constexpr const char* kNoPriorContextMarker = "(no prior context)";

enum class Condition { Complete, Incomplete };

std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);

struct CompactConfig {
    int segment_size = 5;          // documents per segment (j)
    int top_k = 30;                // retrieved documents per question
    int max_iterations = 0;        // 0 derives ceil(top_k / segment_size)
    int max_generated_tokens = 700;
    std::string prompt_template_id = "compact/v1";
    std::string token_scheme = "whitespace";

    int resolved_max_iterations() const;
    /// Enforces segment_size/top_k >= 1 and max_iterations <= segment count.
    void validate() const;
};

struct Segment {
    int index = 0;  // 1-based step t
    std::vector<Document> documents;
};

struct TerminationEvaluation {
    std::string rationale;  // evaluation text with the condition tokens removed
    Condition condition = Condition::Incomplete;
    bool token_found = false;
};

struct CompressionStep {
    int t = 0;
    Segment segment;
    std::string prev_context;  // empty at t = 1
    std::string compressed_context;
    TerminationEvaluation evaluation;
    std::string raw_provider_output;
    TokenCount input_tokens;
    TokenCount output_tokens;
    std::chrono::microseconds elapsed{0};
};

struct CompressionResult {
    std::string question;
    std::vector<CompressionStep> steps;
    std::string final_context;
    bool terminated_early = false;  // COMPLETE with segments still unprocessed
    TokenCount source_token_total;  // all top-k documents, titles + texts
    TokenCount compressed_token_total;
    double compression_rate = 0.0;
};

/// Groups docs into consecutive segments of j documents; the final segment
/// may be shorter. Segment count is ceil(|docs| / j).
std::vector<Segment> segment_documents(const std::vector<Document>& docs, int j);

/// "title\ntext" blocks separated by blank lines; the shared document
/// rendering for prompts and raw reader contexts.
std::string render_document_block(const Document& doc);
std::string render_documents(const std::vector<Document>& docs);

std::string build_compressor_prompt(const std::string& question, const Segment& segment,
                                    const std::string& prev_context, const PromptTemplate& tmpl);

struct ParsedGeneration {
    std::string compressed_context;
    TerminationEvaluation evaluation;
};

/// Splits a generation into the summary and evaluation sections and decides
/// the condition. Missing tokens fall back to INCOMPLETE; an empty summary
/// is a parse error.
ParsedGeneration parse_evaluation(const std::string& raw);

/// Runs the iterative compression loop for one question. Exactly one
/// provider call per executed step (plus one retry after a parse failure);
/// stops at the first COMPLETE, at the last segment, or at max_iterations.
CompressionResult compress(const std::string& question, const std::vector<Document>& docs,
                           const CompactConfig& config, Provider& provider);
CompressionResult compress(const std::string& question, const std::vector<Document>& docs,
                           const CompactConfig& config, Provider& provider,
                           const PromptTemplate& tmpl);

struct BatchItem {
    std::string id;
    std::string question;
    std::vector<Document> docs;
};

struct BatchOutcome {
    std::string id;
    std::optional<CompressionResult> result;
    std::string error;  // non-empty when the item failed

    bool ok() const { return result.has_value(); }
};

/// Compresses independent questions concurrently (bounded by parallelism and
/// the provider's own concurrency limit); per-question steps stay
/// sequential. Outcomes are returned in input order and per-item failures
/// never abort the batch.
std::vector<BatchOutcome> compress_batch(const std::vector<BatchItem>& items,
                                         const CompactConfig& config, const ProviderPtr& provider,
                                         int parallelism);

void to_json(nlohmann::json& j, const CompressionStep& s);
void to_json(nlohmann::json& j, const CompressionResult& r);

} // namespace compact
