// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace compact {

inline constexpr const char* kVersion = "0.1.0";

/// Single error type for the whole library. The kind drives the CLI exit
/// code mapping (Config -> 1, everything else -> 2).
class Error : public std::runtime_error {
public:
    enum class Kind { Config, Io, Parse, Provider, Network };

    Error(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// FNV-1a 64-bit, used for config hashing in run manifests.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

/// Runs fn(0..n-1) on a bounded worker pool. Each index is processed exactly
/// once; fn must not throw (wrap and record errors per item instead).
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn);

} // namespace compact
