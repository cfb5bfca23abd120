// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace compact {

struct ProviderPricing {
    double input_per_1k = 0.0;
    double output_per_1k = 0.0;
};

struct Generation {
    std::string text;
    /// Mock providers report a fixed latency here so that pipelines built on
    /// them are byte-reproducible; real providers leave it unset and the
    /// caller measures wall time.
    std::optional<std::chrono::microseconds> simulated_latency;
};

/// A text-generation backend: the compressor, the reader, and the dataset
/// teacher all share this contract and differ only by endpoint and template.
class Provider {
public:
    virtual ~Provider() = default;

    /// max_tokens caps the generation length (0 = unlimited for mocks).
    virtual Generation generate(const std::string& prompt, int max_tokens) = 0;

    virtual std::string name() const = 0;
    virtual ProviderPricing pricing() const { return {}; }
    /// 0 = unlimited concurrent generate() calls.
    virtual int max_concurrency() const { return 0; }
    /// 0 = no prompt-length limit.
    virtual long long max_prompt_tokens() const { return 0; }
};

using ProviderPtr = std::shared_ptr<Provider>;

/// Truncates text to at most max_tokens whitespace tokens, preserving the
/// original separators up to the cut.
std::string truncate_to_tokens(const std::string& text, int max_tokens);

class MockProviderBase : public Provider {
public:
    long long call_count() const { return calls_.load(); }

    void set_simulated_latency(std::chrono::microseconds latency) { latency_ = latency; }

protected:
    Generation make_generation(std::string text, int max_tokens) {
        calls_.fetch_add(1);
        return Generation{truncate_to_tokens(std::move(text), max_tokens), latency_};
    }

private:
    std::atomic<long long> calls_{0};
    std::chrono::microseconds latency_{0};
};

/// Fixed response sequence consumed in order; errors when exhausted.
class ScriptedProvider : public MockProviderBase {
public:
    explicit ScriptedProvider(std::vector<std::string> responses);
    static std::shared_ptr<ScriptedProvider> from_jsonl(const std::string& path);

    Generation generate(const std::string& prompt, int max_tokens) override;
    std::string name() const override { return "mock-script"; }
    /// Script order is only meaningful when calls are strictly sequential.
    int max_concurrency() const override { return 1; }

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
    std::mutex mutex_;
};

/// Response table keyed by (match substring, step). The step index counts
/// the calls whose prompt contains the match key, so per-question scripts
/// stay deterministic under cross-question concurrency.
class RuleProvider : public MockProviderBase {
public:
    struct Rule {
        std::string match;  // substring to find in the prompt, usually the question
        int step = 1;       // 1-based call index for this match key
        std::string response;
    };

    explicit RuleProvider(std::vector<Rule> rules);
    static std::shared_ptr<RuleProvider> from_jsonl(const std::string& path);

    Generation generate(const std::string& prompt, int max_tokens) override;
    std::string name() const override { return "mock-rules"; }

private:
    std::vector<Rule> rules_;
    std::map<std::string, int> calls_per_match_;
    std::mutex mutex_;
};

/// Completeness-oracle mock: selects the sentences of the prompt that
/// contain a gold answer, accumulates them onto the previous context, and
/// emits [COMPLETE] once the running summary contains an answer. A pure
/// function of the prompt, so batches are reproducible at any parallelism.
class AnswerOracleProvider : public MockProviderBase {
public:
    enum class OutputFormat { TwoSection, ThreeSection };

    struct Options {
        OutputFormat format = OutputFormat::TwoSection;
        int max_summary_tokens = 0;  // 0 = unlimited
    };

    AnswerOracleProvider(std::map<std::string, std::vector<std::string>> answers_by_question,
                         Options options = {});

    Generation generate(const std::string& prompt, int max_tokens) override;
    std::string name() const override { return "mock-answer-oracle"; }

private:
    std::map<std::string, std::vector<std::string>> answers_by_question_;
    Options options_;
};

/// Reader mock: echoes the first double-quoted span found in the prompt, or
/// a parametric default when none exists.
class QuoteEchoProvider : public MockProviderBase {
public:
    explicit QuoteEchoProvider(std::string default_answer = "unknown");

    Generation generate(const std::string& prompt, int max_tokens) override;
    std::string name() const override { return "mock-quote-echo"; }

private:
    std::string default_answer_;
};

/// HTTP backend speaking POST {"prompt","max_tokens"} -> {"text"}.
class HttpProvider : public Provider {
public:
    struct Options {
        std::string endpoint;          // full URL including path
        std::string auth_env;          // env var holding a bearer token, optional
        std::string provider_name = "http";
        ProviderPricing prices;
        int retries = 3;
        int concurrency_limit = 0;
        long long prompt_token_limit = 0;
    };

    explicit HttpProvider(Options options);

    Generation generate(const std::string& prompt, int max_tokens) override;
    std::string name() const override { return options_.provider_name; }
    ProviderPricing pricing() const override { return options_.prices; }
    int max_concurrency() const override { return options_.concurrency_limit; }
    long long max_prompt_tokens() const override { return options_.prompt_token_limit; }

private:
    Options options_;
};

} // namespace compact
