#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cvqa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based; 0 when the input has no line structure.
class FormatError : public Error {
public:
    FormatError(const std::string& message, std::size_t line = 0)
        : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that violates a domain invariant (closed sets, uniqueness, box bounds).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file that could not be opened.
class IoError : public Error {
public:
    IoError(const std::string& what, const std::string& path) : Error("cannot open " + what + " \"" + path + "\"") {}
};

class NotFoundError : public Error {
public:
    NotFoundError(const std::string& what, std::string key)
        : Error(what + " not found: \"" + key + "\""), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Failure talking to a remote detector or generator service.
class ServiceError : public Error {
public:
    enum class Kind { transport, status, schema };
    enum class Service { unknown, detector, generator };

    ServiceError(Kind kind, const std::string& message, int status = 0, Service service = Service::unknown)
        : Error(message), kind_(kind), status_(status), service_(service) {}

    Kind kind() const noexcept { return kind_; }
    int status() const noexcept { return status_; }
    Service service() const noexcept { return service_; }

private:
    Kind kind_;
    int status_;
    Service service_;
};

}  // namespace cvqa
