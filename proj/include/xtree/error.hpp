#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xtree {

// Malformed input text; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Index or label outside the declared dimensions; carries the line number
// when raised during ingestion (0 otherwise).
class BoundsError : public std::out_of_range {
public:
    explicit BoundsError(const std::string& what, std::size_t line = 0)
        : std::out_of_range(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

}  // namespace xtree
