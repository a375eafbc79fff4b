#ifndef PASS2D_COMMON_HPP
#define PASS2D_COMMON_HPP

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace p2d {

class InvalidInput : public std::runtime_error {
public:
    explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

class DegenerateGeometry : public std::runtime_error {
public:
    explicit DegenerateGeometry(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failure in an event log; line numbers are 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class SchemaMismatch : public std::runtime_error {
public:
    explicit SchemaMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(int epoch, const std::string& msg)
        : std::runtime_error("epoch " + std::to_string(epoch) + ": " + msg), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

// Canonical float rendering for logs, tables and reports: 9 significant
// digits, shortest form. Reformatting a parsed value reproduces the same
// bytes, which makes write-parse-write a fixed point.
inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string format_g17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace p2d

#endif
