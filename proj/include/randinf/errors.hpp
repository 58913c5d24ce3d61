#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace randinf {

/// Invalid or degenerate data for the requested computation
/// (empty arm, zero control variance for a ratio, non-binary outcome, ...).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file; carries the 1-based line number when known (0 = n/a).
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t line)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Complete enumeration refused because the assignment count exceeds the cap.
class enumeration_cap_error : public std::runtime_error {
public:
    enumeration_cap_error(std::uint64_t count, std::uint64_t cap)
        : std::runtime_error("assignment count " + std::to_string(count) +
                             " exceeds enumeration cap " + std::to_string(cap)),
          count_(count), cap_(cap) {}
    std::uint64_t count() const noexcept { return count_; }
    std::uint64_t cap() const noexcept { return cap_; }

private:
    std::uint64_t count_;
    std::uint64_t cap_;
};

} // namespace randinf
