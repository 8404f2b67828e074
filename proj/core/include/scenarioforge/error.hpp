#pragma once

#include <stdexcept>
#include <string>

namespace scenarioforge {

/// Base exception for all library errors. `code()` is a stable identifier
/// (for example "ArityMismatch") used by reports and the wire protocol.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct SourceLoc {
    std::string file;
    int line = 0;
    int col = 0;

    std::string to_string() const;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::string code, const std::string& message, SourceLoc loc)
        : Error(std::move(code), format(message, loc)), loc_(std::move(loc)) {}

    const SourceLoc& loc() const noexcept { return loc_; }

private:
    static std::string format(const std::string& message, const SourceLoc& loc) {
        return loc.to_string() + ": " + message;
    }
    SourceLoc loc_;
};

}  // namespace scenarioforge
