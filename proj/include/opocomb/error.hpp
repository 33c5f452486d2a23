#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace opocomb
{

// Base for every error the library raises. The kind string is stable and
// is what the command-line tool prints in its one-line error record.
class Error : public std::runtime_error
{
public:
    Error(std::string kind, const std::string &what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string &kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// A value violates a documented precondition or invariant.
class InvalidInput : public Error
{
public:
    explicit InvalidInput(const std::string &what) : Error("invalid_input", what) {}
};

// A file record could not be parsed or failed validation.
class ParseError : public Error
{
public:
    ParseError(const std::string &what, std::size_t line)
        : Error("parse_error", "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A quantity carried a unit other than the one the format fixes.
class UnitError : public Error
{
public:
    UnitError(const std::string &what, std::size_t line)
        : Error("unit_error", "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error
{
public:
    explicit IoError(const std::string &what) : Error("io_error", what) {}
};

// Raised by the initial-guess stage when the histogram shows no comb.
struct PeriodicityDiagnostics
{
    double best_lag_ps = 0.0;      // lag of the strongest secondary autocorrelation maximum
    double prominence = 0.0;       // its height above the preceding minimum (normalized ACF)
    double span_ps = 0.0;          // visible span searched
    std::size_t visible_bins = 0;
};

class PeriodicityError : public Error
{
public:
    PeriodicityError(const std::string &what, PeriodicityDiagnostics diag)
        : Error("no_periodicity", what), diag_(diag) {}

    const PeriodicityDiagnostics &diagnostics() const noexcept { return diag_; }

private:
    PeriodicityDiagnostics diag_;
};

} // namespace opocomb
