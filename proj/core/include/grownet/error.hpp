#ifndef GROWNET_ERROR_HPP
#define GROWNET_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace grownet {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when training produces a non-finite loss. Carries the last finite
/// per-epoch history so callers can inspect how far training got.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::vector<std::pair<int, double>> history)
        : Error(what), history_(std::move(history)) {}

    const std::vector<std::pair<int, double>>& history() const { return history_; }

private:
    std::vector<std::pair<int, double>> history_;
};

} // namespace grownet

#endif
