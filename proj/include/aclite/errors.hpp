#pragma once

#include <stdexcept>
#include <string>

namespace aclite {

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error("dimension error: " + msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error("numeric error: " + msg) {}
};

struct VocabularyError : std::runtime_error {
    explicit VocabularyError(const std::string& msg) : std::runtime_error("vocabulary error: " + msg) {}
};

struct OptimizerError : std::runtime_error {
    explicit OptimizerError(const std::string& msg) : std::runtime_error("optimizer error: " + msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error("format error: " + msg) {}
};

struct MetricError : std::runtime_error {
    explicit MetricError(const std::string& msg) : std::runtime_error("metric error: " + msg) {}
};

struct EncodingError : std::runtime_error {
    explicit EncodingError(const std::string& msg) : std::runtime_error("encoding error: " + msg) {}
};

}  // namespace aclite
