#pragma once

#include <stdexcept>
#include <string>

namespace pathclass {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Rejected input: a precondition or validation failure on caller-supplied data.
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

// A split that cannot be made (e.g. fewer groups than folds).
class InfeasibleSplit : public InvalidInput {
public:
    explicit InfeasibleSplit(const std::string& msg) : InvalidInput(msg) {}
};

// Malformed or version-incompatible artifact/stream.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// An evaluation metric that is undefined for the given inputs.
class UndefinedMetric : public InvalidInput {
public:
    explicit UndefinedMetric(const std::string& msg) : InvalidInput(msg) {}
};

}  // namespace pathclass
