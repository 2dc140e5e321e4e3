#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vaxrag {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A call to an external (or stub) model provider failed. Retryable failures
/// are transient (timeouts, 5xx); non-retryable ones are contract violations.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool retryable = true)
        : Error(what), retryable_(retryable) {}

    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

class IndexFormatError : public Error {
public:
    IndexFormatError(const std::string& what, std::uint64_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace vaxrag
