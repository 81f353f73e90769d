#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hyperrank {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract input (bad shapes, bad files, bad config).
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A computation could not produce a trustworthy result.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public NumericalFailure {
public:
    SingularMatrix(const std::string& what, std::size_t index, std::string path = {})
        : NumericalFailure(what), index_(index), path_(std::move(path)) {}

    // Offending pivot / singular value position.
    std::size_t index() const noexcept { return index_; }
    // Block path inside a tessellation ("root/X11/Z2"), empty outside blockinv.
    const std::string& path() const noexcept { return path_; }

private:
    std::size_t index_;
    std::string path_;
};

class NotConverged : public NumericalFailure {
public:
    NotConverged(const std::string& what, double residual)
        : NumericalFailure(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace hyperrank
