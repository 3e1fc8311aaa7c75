#pragma once

#include <stdexcept>
#include <string>

namespace uma {

// Base for everything thrown by this library. `exit_code` matches the CLI
// convention: 1 for bad input, 2 for numerical failure.
class Error : public std::runtime_error {
public:
    Error(std::string msg, int exit_code) : std::runtime_error(std::move(msg)), code_(exit_code) {}
    int exit_code() const noexcept { return code_; }

private:
    int code_;
};

struct InputError : Error {
    explicit InputError(const std::string& msg) : Error(msg, 1) {}
};

struct IngestionError : Error {
    explicit IngestionError(const std::string& msg) : Error(msg, 1) {}
};

struct SamplingError : Error {
    explicit SamplingError(const std::string& msg) : Error(msg, 1) {}
};

struct GenerationError : Error {
    explicit GenerationError(const std::string& msg) : Error(msg, 1) {}
};

struct ContractViolation : Error {
    explicit ContractViolation(const std::string& msg) : Error(msg, 1) {}
};

struct MissingClass : Error {
    explicit MissingClass(const std::string& msg) : Error(msg, 1) {}
};

struct SingularConfusion : Error {
    explicit SingularConfusion(const std::string& msg) : Error(msg, 2) {}
};

struct DegenerateRow : Error {
    explicit DegenerateRow(const std::string& msg) : Error(msg, 2) {}
};

struct DegenerateKernel : Error {
    explicit DegenerateKernel(const std::string& msg) : Error(msg, 2) {}
};

} // namespace uma
