// SPDX-License-Identifier: Apache-2.0
#include "compact/reader.hpp"

#include "compact/common.hpp"

namespace compact {

std::string to_string(ContextMode mode) {
    switch (mode) {
        case ContextMode::CompressedOnly: return "compressed_only";
        case ContextMode::RationaleOnly: return "rationale_only";
        case ContextMode::CompressedPlusRationale: return "compressed_plus_rationale";
        case ContextMode::RawDocuments: return "raw_documents";
        case ContextMode::OracleDocuments: return "oracle_documents";
        case ContextMode::ClosedBook: return "closed_book";
    }
    throw Error(Error::Kind::Config, "invalid context mode");
}

ContextMode context_mode_from_string(const std::string& s) {
    if (s == "compressed_only") return ContextMode::CompressedOnly;
    if (s == "rationale_only") return ContextMode::RationaleOnly;
    if (s == "compressed_plus_rationale") return ContextMode::CompressedPlusRationale;
    if (s == "raw_documents") return ContextMode::RawDocuments;
    if (s == "oracle_documents") return ContextMode::OracleDocuments;
    if (s == "closed_book") return ContextMode::ClosedBook;
    throw Error(Error::Kind::Config, "unknown context mode: " + s);
}

bool mode_uses_compression(ContextMode mode) {
    return mode == ContextMode::CompressedOnly || mode == ContextMode::RationaleOnly ||
           mode == ContextMode::CompressedPlusRationale;
}

std::string render_context(const CompressionResult& result, ContextMode mode) {
    switch (mode) {
        case ContextMode::CompressedOnly:
            return result.final_context;
        case ContextMode::RationaleOnly: {
            if (result.steps.empty()) {
                throw Error(Error::Kind::Config, "rationale_only needs at least one step");
            }
            return result.steps.back().evaluation.rationale;
        }
        case ContextMode::CompressedPlusRationale: {
            if (result.steps.empty()) {
                throw Error(Error::Kind::Config,
                            "compressed_plus_rationale needs at least one step");
            }
            const std::string& rationale = result.steps.back().evaluation.rationale;
            if (rationale.empty()) return result.final_context;
            return result.final_context + "\n\n" + rationale;
        }
        case ContextMode::ClosedBook:
            return "";
        case ContextMode::RawDocuments:
        case ContextMode::OracleDocuments:
            throw Error(Error::Kind::Config,
                        "document modes render from a document list, not a compression result");
    }
    throw Error(Error::Kind::Config, "invalid context mode");
}

std::string render_context(const std::vector<Document>& docs, ContextMode mode) {
    switch (mode) {
        case ContextMode::RawDocuments:
        case ContextMode::OracleDocuments:
            return render_documents(docs);
        case ContextMode::ClosedBook:
            return "";
        default:
            throw Error(Error::Kind::Config,
                        to_string(mode) + " renders from a compression result, not documents");
    }
}

ReaderAnswer answer(const std::string& question, const std::string& context, Provider& provider,
                    const PromptTemplate& qa_template, const std::string& token_scheme,
                    int max_tokens) {
    const std::string prompt = qa_template.render({{"question", question}, {"context", context}});
    ReaderAnswer out;
    out.input_tokens = count_tokens(prompt, token_scheme);

    const auto start = std::chrono::steady_clock::now();
    Generation gen = provider.generate(prompt, max_tokens);
    const auto wall = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start);

    out.text = gen.text;
    out.output_tokens = count_tokens(gen.text, token_scheme);
    out.elapsed = gen.simulated_latency.value_or(wall);
    return out;
}

ReaderAnswer answer(const std::string& question, const std::string& context, Provider& provider) {
    static const PromptTemplate qa = PromptTemplate::builtin("qa/v1");
    return answer(question, context, provider, qa);
}

} // namespace compact
