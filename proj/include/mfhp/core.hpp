#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfhp {

/// Positions are always stored with three coordinates; 2D problems keep z = 0
/// and carry their dimension separately.
using Point = Eigen::Vector3d;

using Index = std::ptrdiff_t;

/// Base class for every error raised by the library. The message is prefixed
/// with the module that raised it, e.g. "approx: stencil degenerate at node 12".
class Error : public std::runtime_error {
public:
    Error(const std::string& module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(module) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

class GenerationOverflow : public Error {
public:
    explicit GenerationOverflow(std::size_t cap)
        : Error("nodegen", "generation overflow: node count exceeds cap " + std::to_string(cap)) {}
};

class InsufficientNodes : public Error {
public:
    InsufficientNodes(std::size_t requested, std::size_t available)
        : Error("nodegen", "insufficient nodes: requested " + std::to_string(requested) +
                               " neighbours of " + std::to_string(available)) {}
};

class StencilDegenerate : public Error {
public:
    StencilDegenerate(Index node, double condition)
        : Error("approx", "stencil degenerate at node " + std::to_string(node) +
                              " (condition estimate " + std::to_string(condition) + ")"),
          node_(node), condition_(condition) {}

    Index node() const noexcept { return node_; }
    double condition() const noexcept { return condition_; }

private:
    Index node_;
    double condition_;
};

class AssemblyIncomplete : public Error {
public:
    explicit AssemblyIncomplete(Index node)
        : Error("system", "assembly incomplete: missing weights at node " + std::to_string(node)),
          node_(node) {}

    Index node() const noexcept { return node_; }

private:
    Index node_;
};

class SolverFailure : public Error {
public:
    SolverFailure(const std::string& why, std::vector<double> history)
        : Error("system", "solver failure: " + why), history_(std::move(history)) {}

    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

class InvalidLoading : public Error {
public:
    explicit InvalidLoading(const std::string& condition)
        : Error("problems", "invalid loading: " + condition) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("cli", what) {}
};

}  // namespace mfhp
