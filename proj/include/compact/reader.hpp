// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "compact/compression.hpp"
#include "compact/corpus.hpp"
#include "compact/prompt.hpp"
#include "compact/provider.hpp"

namespace compact {

enum class ContextMode {
    CompressedOnly,
    RationaleOnly,
    CompressedPlusRationale,
    RawDocuments,
    OracleDocuments,
    ClosedBook,
};

std::string to_string(ContextMode mode);
ContextMode context_mode_from_string(const std::string& s);
/// Modes that run the compression loop before reading.
bool mode_uses_compression(ContextMode mode);

/// Renders a reader context from a compression result. Accepts the
/// compressed/rationale modes and CLOSED_BOOK; document modes need the
/// overload below.
std::string render_context(const CompressionResult& result, ContextMode mode);

/// Renders a reader context from ranked documents (RAW_DOCUMENTS or
/// ORACLE_DOCUMENTS as "title\ntext" blocks, CLOSED_BOOK empty).
std::string render_context(const std::vector<Document>& docs, ContextMode mode);

struct ReaderAnswer {
    std::string text;  // provider output verbatim, no normalization
    TokenCount input_tokens;
    TokenCount output_tokens;
    std::chrono::microseconds elapsed{0};
};

/// One reader call. Reading time is recorded here, separate from any
/// compression time spent producing the context.
ReaderAnswer answer(const std::string& question, const std::string& context, Provider& provider,
                    const PromptTemplate& qa_template,
                    const std::string& token_scheme = "whitespace", int max_tokens = 64);
ReaderAnswer answer(const std::string& question, const std::string& context, Provider& provider);

} // namespace compact
