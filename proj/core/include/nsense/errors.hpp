#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsense {

/// A value violated a domain precondition (bad id, equal pair, negative tick).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A trace or record file could not be decoded. Line and column are 1-based;
/// column counts comma-separated fields, 0 when the error concerns the whole line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, std::size_t line, std::size_t column, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          file_(std::move(file)), line_(line), column_(column) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string file_;
    std::size_t line_;
    std::size_t column_;
};

/// A scenario configuration is invalid. `field()` is a dotted path such as
/// `agents[USense2].waypoints[1].t_ms`.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nsense
