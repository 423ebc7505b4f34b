#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace solvcert {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed case text. `line()` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// The case data violates a modelling assumption (PV bus, islanded bus, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    explicit SingularMatrixError(std::size_t pivot)
        : Error("matrix is singular to working precision at pivot " + std::to_string(pivot)),
          pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

/// J* could not be inverted: the base point sits at the limit where the
/// certificate is defined.
class BaseValidityError : public Error {
public:
    using Error::Error;
};

/// A computed quantity failed a structural self-check.
class InternalConsistencyError : public Error {
public:
    using Error::Error;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::vector<std::complex<double>> last_iterate,
                        double mismatch)
        : Error(what), last_iterate_(std::move(last_iterate)), mismatch_(mismatch) {}
    const std::vector<std::complex<double>>& last_iterate() const noexcept { return last_iterate_; }
    double mismatch() const noexcept { return mismatch_; }

private:
    std::vector<std::complex<double>> last_iterate_;
    double mismatch_;
};

}  // namespace solvcert
