#ifndef NBCODED_ERRORS_HPP
#define NBCODED_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nbcoded {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data. `line()` is 1-based, or 0 when the error is not tied to a row.
class DataError : public Error {
public:
    explicit DataError(const std::string &what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_{line} {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid arguments to a fit / transform (shape mismatch, bad hyper-parameter, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Training diverged or a pipeline stage failed.
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace nbcoded

#endif
