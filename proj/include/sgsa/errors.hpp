#pragma once

#include <stdexcept>
#include <string>

namespace sgsa {

// Shape disagreement between tensors (names both shapes in the message).
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// A call violated an operation's contract (non-scalar loss, bad mode, ...).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid external input: topology files, dataset records, checkpoints.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training-time failure (divergence, non-finite gradients).
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sgsa
