#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hybridloc {

/// Argument outside an operation's domain (negative dt, empty batch, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A position coincides (within kGeometryEpsilon) with an anchor.
class DegenerateGeometry : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Anchor id that does not resolve in the deployment.
class LookupError : public std::out_of_range {
public:
    explicit LookupError(const std::string& id)
        : std::out_of_range("unknown anchor id '" + id + "'"), id_(id) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

/// Belief with non-finite entries.
class InvalidState : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Innovation covariance could not be factorized.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_(condition_estimate) {}
    double condition_estimate() const { return condition_; }

private:
    double condition_;
};

/// Timestamps went backwards in a feed or log.
class OrderingError : public std::runtime_error {
public:
    OrderingError(const std::string& what, std::size_t record)
        : std::runtime_error(what), record_(record) {}
    /// Index (or 1-based line number for files) of the offending record.
    std::size_t record() const { return record_; }

private:
    std::size_t record_;
};

/// Malformed config or CSV input. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& key_path, std::size_t line, const std::string& message)
        : std::runtime_error(format(key_path, line, message)), key_path_(key_path), line_(line) {}

    const std::string& key_path() const { return key_path_; }
    std::size_t line() const { return line_; }

private:
    static std::string format(const std::string& key_path, std::size_t line, const std::string& message) {
        std::string out;
        if (line > 0) {
            out += "line " + std::to_string(line) + ": ";
        }
        if (!key_path.empty()) {
            out += key_path + ": ";
        }
        return out + message;
    }

    std::string key_path_;
    std::size_t line_;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace hybridloc
