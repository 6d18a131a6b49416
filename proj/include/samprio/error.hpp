#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace samprio {

/// Base class for every diagnostic raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that cannot be parsed or violates a data invariant. Carries the
/// offending record index when one is known.
class DataError : public Error {
public:
    explicit DataError(const std::string& what, std::optional<std::size_t> record = std::nullopt)
        : Error(record ? "record " + std::to_string(*record) + ": " + what : what), record_(record) {}

    std::optional<std::size_t> record() const noexcept { return record_; }

    /// Same diagnostic with `context` (usually a path) prepended.
    static DataError prefixed(const std::string& context, const DataError& e) {
        return DataError(context + ": " + e.what(), e.record(), 0);
    }

private:
    DataError(const std::string& what, std::optional<std::size_t> record, int)
        : Error(what), record_(record) {}

    std::optional<std::size_t> record_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A parameter outside the range an operation accepts.
class ArgumentError : public Error {
public:
    using Error::Error;
};

} // namespace samprio
