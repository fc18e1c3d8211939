#pragma once

#include <stdexcept>
#include <string>

namespace circuitvec {

/// Malformed content in an input file. Message carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// File could not be opened, read, or written.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A referenced entity (node name, label) is unknown.
class ReferenceError : public std::runtime_error {
public:
    explicit ReferenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace circuitvec
