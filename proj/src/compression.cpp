// SPDX-License-Identifier: Apache-2.0
#include "compact/compression.hpp"

#include <algorithm>
#include <sstream>

#include "compact/common.hpp"
#include "compact/eval.hpp"

namespace compact {

std::string to_string(Condition c) {
    return c == Condition::Complete ? "COMPLETE" : "INCOMPLETE";
}

Condition condition_from_string(const std::string& s) {
    if (s == "COMPLETE") return Condition::Complete;
    if (s == "INCOMPLETE") return Condition::Incomplete;
    throw Error(Error::Kind::Parse, "unknown condition: " + s);
}

int CompactConfig::resolved_max_iterations() const {
    const int segments = (top_k + segment_size - 1) / segment_size;
    return max_iterations > 0 ? max_iterations : segments;
}

void CompactConfig::validate() const {
    if (segment_size < 1) {
        throw Error(Error::Kind::Config, "segment_size must be >= 1");
    }
    if (top_k < 1) {
        throw Error(Error::Kind::Config, "top_k must be >= 1");
    }
    if (max_generated_tokens < 1) {
        throw Error(Error::Kind::Config, "max_generated_tokens must be >= 1");
    }
    const int segments = (top_k + segment_size - 1) / segment_size;
    if (max_iterations > segments) {
        throw Error(Error::Kind::Config,
                    "max_iterations (" + std::to_string(max_iterations) +
                        ") exceeds the segment count (" + std::to_string(segments) + ")");
    }
    if (!token_scheme_registered(token_scheme)) {
        throw Error(Error::Kind::Config, "unknown token scheme: " + token_scheme);
    }
}

std::vector<Segment> segment_documents(const std::vector<Document>& docs, int j) {
    if (docs.empty()) {
        throw Error(Error::Kind::Config, "cannot segment an empty document list");
    }
    if (j < 1) {
        throw Error(Error::Kind::Config, "segment size must be >= 1");
    }
    std::vector<Segment> segments;
    segments.reserve((docs.size() + j - 1) / j);
    for (std::size_t begin = 0; begin < docs.size(); begin += static_cast<std::size_t>(j)) {
        const std::size_t end = std::min(docs.size(), begin + static_cast<std::size_t>(j));
        Segment segment;
        segment.index = static_cast<int>(segments.size()) + 1;
        segment.documents.assign(docs.begin() + static_cast<std::ptrdiff_t>(begin),
                                 docs.begin() + static_cast<std::ptrdiff_t>(end));
        segments.push_back(std::move(segment));
    }
    return segments;
}

std::string render_document_block(const Document& doc) {
    if (doc.title.empty()) return doc.text;
    return doc.title + "\n" + doc.text;
}

std::string render_documents(const std::vector<Document>& docs) {
    std::string out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += render_document_block(docs[i]);
    }
    return out;
}

std::string build_compressor_prompt(const std::string& question, const Segment& segment,
                                    const std::string& prev_context, const PromptTemplate& tmpl) {
    return tmpl.render({
        {"question", question},
        {"documents", render_documents(segment.documents)},
        {"prev_context", prev_context.empty() ? kNoPriorContextMarker : prev_context},
    });
}

namespace {

// Rationale = evaluation text with every condition token removed.
std::string strip_tokens(std::string text) {
    for (const char* token : {kCompleteToken, kIncompleteToken}) {
        const std::string needle(token);
        std::size_t pos;
        while ((pos = text.find(needle)) != std::string::npos) {
            text.erase(pos, needle.size());
        }
    }
    // collapse runs of spaces left behind by the removal
    std::istringstream in(text);
    std::string word;
    std::string out;
    while (in >> word) {
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    return out;
}

} // namespace

ParsedGeneration parse_evaluation(const std::string& raw) {
    if (trim(raw).empty()) {
        throw Error(Error::Kind::Parse, "provider returned an empty generation");
    }

    // the provider's own evaluation label is the last one; quoted document
    // text inside the summary must not split the sections
    const std::string eval_label(kEvaluationLabel);
    const auto eval_pos = raw.rfind(eval_label);
    std::string summary_part = eval_pos == std::string::npos ? raw : raw.substr(0, eval_pos);
    std::string eval_part =
        eval_pos == std::string::npos ? std::string{} : raw.substr(eval_pos + eval_label.size());

    const std::string summary_label(kSummaryLabel);
    const auto summary_pos = summary_part.find(summary_label);
    if (summary_pos != std::string::npos) {
        summary_part = summary_part.substr(summary_pos + summary_label.size());
    }

    ParsedGeneration parsed;
    parsed.compressed_context = trim(summary_part);
    if (parsed.compressed_context.empty()) {
        throw Error(Error::Kind::Parse, "provider generation has an empty compressed context");
    }

    const auto complete_pos = eval_part.rfind(kCompleteToken);
    const auto incomplete_pos = eval_part.rfind(kIncompleteToken);
    if (complete_pos == std::string::npos && incomplete_pos == std::string::npos) {
        parsed.evaluation.condition = Condition::Incomplete;
        parsed.evaluation.token_found = false;
    } else {
        parsed.evaluation.token_found = true;
        if (complete_pos == std::string::npos) {
            parsed.evaluation.condition = Condition::Incomplete;
        } else if (incomplete_pos == std::string::npos) {
            parsed.evaluation.condition = Condition::Complete;
        } else {
            // both present: the later occurrence is the verdict
            parsed.evaluation.condition =
                complete_pos > incomplete_pos ? Condition::Complete : Condition::Incomplete;
        }
    }
    parsed.evaluation.rationale = strip_tokens(eval_part);
    return parsed;
}

CompressionResult compress(const std::string& question, const std::vector<Document>& docs,
                           const CompactConfig& config, Provider& provider) {
    const PromptTemplate tmpl =
        PromptTemplate::resolve(config.prompt_template_id, compressor_placeholders());
    return compress(question, docs, config, provider, tmpl);
}

CompressionResult compress(const std::string& question, const std::vector<Document>& docs,
                           const CompactConfig& config, Provider& provider,
                           const PromptTemplate& tmpl) {
    config.validate();
    if (docs.empty()) {
        throw Error(Error::Kind::Config, "compress requires a non-empty document list");
    }

    const auto segments = segment_documents(docs, config.segment_size);
    const int step_limit =
        std::min(static_cast<int>(segments.size()), config.resolved_max_iterations());

    CompressionResult result;
    result.question = question;
    std::string prev_context;

    for (int t = 1; t <= step_limit; ++t) {
        const Segment& segment = segments[static_cast<std::size_t>(t - 1)];
        const std::string prompt = build_compressor_prompt(question, segment, prev_context, tmpl);
        const TokenCount prompt_tokens = count_tokens(prompt, config.token_scheme);
        if (provider.max_prompt_tokens() > 0 && prompt_tokens.value > provider.max_prompt_tokens()) {
            throw Error(Error::Kind::Provider,
                        "step " + std::to_string(t) + ": prompt of " +
                            std::to_string(prompt_tokens.value) + " tokens exceeds the provider limit of " +
                            std::to_string(provider.max_prompt_tokens()));
        }

        CompressionStep step;
        step.t = t;
        step.segment = segment;
        step.prev_context = prev_context;
        step.input_tokens = prompt_tokens;

        ParsedGeneration parsed;
        std::chrono::microseconds elapsed{0};
        bool done = false;
        // a parse failure gets exactly one retry with the identical prompt
        for (int attempt = 1; attempt <= 2 && !done; ++attempt) {
            const auto start = std::chrono::steady_clock::now();
            Generation gen = provider.generate(prompt, config.max_generated_tokens);
            const auto wall = std::chrono::duration_cast<std::chrono::microseconds>(
                std::chrono::steady_clock::now() - start);
            elapsed += gen.simulated_latency.value_or(wall);
            step.raw_provider_output = gen.text;
            try {
                parsed = parse_evaluation(gen.text);
                done = true;
            } catch (const Error& e) {
                if (e.kind() != Error::Kind::Parse || attempt == 2) {
                    throw Error(Error::Kind::Provider,
                                "step " + std::to_string(t) +
                                    ": provider output unparseable after retry: " + e.what());
                }
            }
        }

        step.compressed_context = parsed.compressed_context;
        step.evaluation = parsed.evaluation;
        step.output_tokens = count_tokens(step.raw_provider_output, config.token_scheme);
        step.elapsed = elapsed;
        prev_context = step.compressed_context;
        result.steps.push_back(std::move(step));

        if (parsed.evaluation.condition == Condition::Complete) break;
    }

    const CompressionStep& last = result.steps.back();
    result.final_context = last.compressed_context;
    result.terminated_early = last.evaluation.condition == Condition::Complete &&
                              result.steps.size() < segments.size();
    result.source_token_total = count_tokens(render_documents(docs), config.token_scheme);
    result.compressed_token_total = count_tokens(result.final_context, config.token_scheme);
    result.compression_rate =
        compression_rate(result.source_token_total, result.compressed_token_total);
    return result;
}

std::vector<BatchOutcome> compress_batch(const std::vector<BatchItem>& items,
                                         const CompactConfig& config, const ProviderPtr& provider,
                                         int parallelism) {
    if (!provider) {
        throw Error(Error::Kind::Config, "compress_batch requires a provider");
    }
    if (parallelism < 1) {
        throw Error(Error::Kind::Config, "parallelism must be >= 1");
    }
    config.validate();
    const PromptTemplate tmpl =
        PromptTemplate::resolve(config.prompt_template_id, compressor_placeholders());

    int effective = parallelism;
    if (provider->max_concurrency() > 0) {
        effective = std::min(effective, provider->max_concurrency());
    }

    std::vector<BatchOutcome> outcomes(items.size());
    parallel_for(items.size(), effective, [&](std::size_t i) {
        outcomes[i].id = items[i].id;
        try {
            outcomes[i].result =
                compress(items[i].question, items[i].docs, config, *provider, tmpl);
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    });
    return outcomes;
}

void to_json(nlohmann::json& j, const CompressionStep& s) {
    nlohmann::json doc_ids = nlohmann::json::array();
    for (const auto& doc : s.segment.documents) doc_ids.push_back(doc.id);
    j = nlohmann::json{
        {"t", s.t},
        {"segment_doc_ids", doc_ids},
        {"prev_context", s.prev_context},
        {"compressed_context", s.compressed_context},
        {"rationale", s.evaluation.rationale},
        {"condition", to_string(s.evaluation.condition)},
        {"token_found", s.evaluation.token_found},
        {"raw_provider_output", s.raw_provider_output},
        {"input_tokens", s.input_tokens.value},
        {"output_tokens", s.output_tokens.value},
        {"elapsed_us", s.elapsed.count()},
    };
}

void to_json(nlohmann::json& j, const CompressionResult& r) {
    j = nlohmann::json{
        {"question", r.question},
        {"final_context", r.final_context},
        {"terminated_early", r.terminated_early},
        {"source_tokens", r.source_token_total.value},
        {"compressed_tokens", r.compressed_token_total.value},
        {"token_scheme", r.source_token_total.scheme},
        {"compression_rate", r.compression_rate},
        {"steps", r.steps},
    };
}

} // namespace compact
