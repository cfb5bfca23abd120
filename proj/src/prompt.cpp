// SPDX-License-Identifier: Apache-2.0
#include "compact/prompt.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "compact/common.hpp"

namespace compact {

namespace {

const char* kCompactV1 = R"(Question: {question}

Previous context:
{prev_context}

Documents:
{documents}

Merge the previous context with any information in the documents that helps answer the question. Write one concise summary that keeps every detail needed to answer. Then judge whether the accumulated summary alone is sufficient to answer the question, give a short rationale, and end the evaluation with [COMPLETE] if it is sufficient or [INCOMPLETE] if information is still missing.

Respond in exactly this format:
Summary: <updated summary>
Evaluation: <rationale> <[COMPLETE] or [INCOMPLETE]>
)";

const char* kDatasetV1 = R"(Question: {question}

Previous context:
{prev_context}

Documents:
{documents}

Follow three steps.
1. Select the sentences from the documents that contain clues for the question, quoting them exactly. Write (none) if no sentence helps.
2. Compress the selected sentences together with the previous context into one query-focused summary. DO NOT make assumptions or attempt to answer the question; your job is to summarize only.
3. Evaluate whether the summary alone provides enough information to answer the question. Give a short rationale and end with [COMPLETE] or [INCOMPLETE].

Respond in exactly this format:
Selected sentences: <exact sentences, one per line>
Summary: <updated summary>
Evaluation: <rationale> <[COMPLETE] or [INCOMPLETE]>
)";

const char* kQaV1 = R"(Answer the question using the context. Reply with the shortest span that answers the question.

Context:
{context}

Question: {question}
Answer:)";

bool is_placeholder_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Collects {word} placeholder names appearing in the template text.
std::vector<std::string> scan_placeholders(const std::string& text) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < text.size() && is_placeholder_char(text[j])) ++j;
        if (j > i + 1 && j < text.size() && text[j] == '}') {
            names.push_back(text.substr(i + 1, j - i - 1));
            i = j;
        }
    }
    return names;
}

} // namespace

PromptTemplate PromptTemplate::from_string(std::string id, std::string text,
                                           const std::vector<std::string>& required_placeholders) {
    const auto present = scan_placeholders(text);
    for (const auto& required : required_placeholders) {
        bool found = false;
        for (const auto& name : present) {
            if (name == required) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw Error(Error::Kind::Config,
                        "prompt template '" + id + "' lacks required placeholder {" + required + "}");
        }
    }
    return PromptTemplate(std::move(id), std::move(text));
}

PromptTemplate PromptTemplate::from_file(const std::string& path,
                                         const std::vector<std::string>& required_placeholders) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Kind::Io, "cannot open prompt template: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(path, buf.str(), required_placeholders);
}

PromptTemplate PromptTemplate::builtin(const std::string& id) {
    if (id == "compact/v1") return from_string(id, kCompactV1, compressor_placeholders());
    if (id == "dataset/v1") return from_string(id, kDatasetV1, teacher_placeholders());
    if (id == "qa/v1") return from_string(id, kQaV1, qa_placeholders());
    throw Error(Error::Kind::Config, "unknown built-in prompt template: " + id);
}

PromptTemplate PromptTemplate::resolve(const std::string& id_or_path,
                                       const std::vector<std::string>& required_placeholders) {
    if (id_or_path == "compact/v1" || id_or_path == "dataset/v1" || id_or_path == "qa/v1") {
        PromptTemplate t = builtin(id_or_path);
        // re-validate against the role's required placeholders
        return from_string(t.id(), t.text(), required_placeholders);
    }
    return from_file(id_or_path, required_placeholders);
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    out.reserve(text_.size());
    for (std::size_t i = 0; i < text_.size(); ++i) {
        if (text_[i] == '{') {
            std::size_t j = i + 1;
            while (j < text_.size() && is_placeholder_char(text_[j])) ++j;
            if (j > i + 1 && j < text_.size() && text_[j] == '}') {
                auto it = values.find(text_.substr(i + 1, j - i - 1));
                if (it != values.end()) {
                    out += it->second;
                    i = j;
                    continue;
                }
            }
        }
        out.push_back(text_[i]);
    }
    return out;
}

const std::vector<std::string>& compressor_placeholders() {
    static const std::vector<std::string> v{"question", "documents", "prev_context"};
    return v;
}

const std::vector<std::string>& teacher_placeholders() {
    static const std::vector<std::string> v{"question", "documents", "prev_context"};
    return v;
}

const std::vector<std::string>& qa_placeholders() {
    static const std::vector<std::string> v{"question", "context"};
    return v;
}

} // namespace compact
