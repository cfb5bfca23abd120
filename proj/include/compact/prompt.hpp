// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

namespace compact {

/// Minimal single-pass template: {name} placeholders, substituted values are
/// never re-scanned. Required placeholders are checked at load time.
class PromptTemplate {
public:
    static PromptTemplate from_string(std::string id, std::string text,
                                      const std::vector<std::string>& required_placeholders);
    static PromptTemplate from_file(const std::string& path,
                                    const std::vector<std::string>& required_placeholders);
    /// Built-in ids: "compact/v1" (compressor), "dataset/v1" (teacher),
    /// "qa/v1" (reader).
    static PromptTemplate builtin(const std::string& id);

    /// Resolves a config value that is either a built-in id or a file path.
    static PromptTemplate resolve(const std::string& id_or_path,
                                  const std::vector<std::string>& required_placeholders);

    std::string render(const std::map<std::string, std::string>& values) const;

    const std::string& id() const { return id_; }
    const std::string& text() const { return text_; }

private:
    PromptTemplate(std::string id, std::string text) : id_(std::move(id)), text_(std::move(text)) {}

    std::string id_;
    std::string text_;
};

/// Placeholder sets for the three template roles.
const std::vector<std::string>& compressor_placeholders();
const std::vector<std::string>& teacher_placeholders();
const std::vector<std::string>& qa_placeholders();

} // namespace compact
