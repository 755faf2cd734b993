#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iterfix {

// All library failures carry a stable machine-readable code next to the
// human-readable message; the CLI maps codes to exit statuses and report
// reason fields.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& what)
        : Error("syntax_error",
                what + " (offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    // 1-based character position in the source text.
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

} // namespace iterfix
