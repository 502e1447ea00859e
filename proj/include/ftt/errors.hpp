#pragma once

#include <stdexcept>
#include <string>

namespace ftt {

// Base for every error the pipeline raises on purpose. `category()` is the
// short machine-readable tag the CLI prints before the message.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& message) : Error("input", message) {}
};

class EmbeddingError : public Error {
public:
    explicit EmbeddingError(const std::string& message) : Error("embedding", message) {}
};

class FitError : public Error {
public:
    explicit FitError(const std::string& message) : Error("fit", message) {}
};

class TrainingError : public Error {
public:
    explicit TrainingError(const std::string& message) : Error("training", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

} // namespace ftt
