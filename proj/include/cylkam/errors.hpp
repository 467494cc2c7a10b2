#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cylkam {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A point fell outside a function's y-interval (or a sampled image escaped a domain).
class DomainError : public Error {
  public:
    DomainError(double y, double lo, double hi, const std::string& context = "")
        : Error(format(y, lo, hi, context)), y(y), lo(lo), hi(hi) {}

    double y, lo, hi;

  private:
    static std::string format(double y, double lo, double hi, const std::string& context) {
        std::ostringstream os;
        os << "domain error: y = " << y << " outside [" << lo << ", " << hi << "]";
        if (!context.empty()) os << " (" << context << ")";
        return os.str();
    }
};

/// Two functions on different grids were combined.
class GridMismatchError : public Error {
  public:
    explicit GridMismatchError(const std::string& msg) : Error("grid mismatch: " + msg) {}
};

/// A documented precondition or domain-chain contract was violated.
class ContractError : public Error {
  public:
    explicit ContractError(const std::string& msg) : Error("contract violation: " + msg) {}
};

/// A small divisor fell below the discrimination threshold.
class ResonanceError : public Error {
  public:
    ResonanceError(int mode, double divisor)
        : Error(format(mode, divisor)), mode(mode), divisor(divisor) {}

    int mode;
    double divisor;

  private:
    static std::string format(int m, double d) {
        std::ostringstream os;
        os << "resonance: divisor |e^(2 pi i m alpha) - 1| = " << d << " at m = " << m;
        return os.str();
    }
};

/// alpha is (numerically) rational; Diophantine constants cannot be estimated.
class DegenerateAlphaError : public Error {
  public:
    DegenerateAlphaError(double alpha, long denominator)
        : Error(format(alpha, denominator)), alpha(alpha), denominator(denominator) {}

    double alpha;
    long denominator;

  private:
    static std::string format(double a, long q) {
        std::ostringstream os;
        os << "alpha = " << a << " is within 1e-12 of a rational with denominator " << q;
        return os.str();
    }
};

/// An iteration failed to converge or a verified numerical postcondition failed.
class NumericalError : public Error {
  public:
    explicit NumericalError(const std::string& msg) : Error("numerical failure: " + msg) {}
};

/// A sampler produced a non-finite value.
class SamplingError : public Error {
  public:
    SamplingError(double x, double y, double value)
        : Error(format(x, y, value)), x(x), y(y), value(value) {}

    double x, y, value;

  private:
    static std::string format(double x, double y, double v) {
        std::ostringstream os;
        os << "non-finite sample " << v << " at node (" << x << ", " << y << ")";
        return os.str();
    }
};

/// Expression-source syntax error with byte offset and the tokens that were expected.
class ParseError : public Error {
  public:
    ParseError(std::size_t offset, const std::string& expected, const std::string& found)
        : Error(format(offset, expected, found)), offset(offset), expected(expected) {}

    std::size_t offset;
    std::string expected;

  private:
    static std::string format(std::size_t off, const std::string& exp, const std::string& found) {
        std::ostringstream os;
        os << "parse error at offset " << off << ": expected " << exp << ", found " << found;
        return os.str();
    }
};

/// Config schema violation(s); collects every violation before failing.
class ConfigError : public Error {
  public:
    explicit ConfigError(std::vector<std::string> violations)
        : Error(join(violations)), violations(std::move(violations)) {}

    std::vector<std::string> violations;

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::ostringstream os;
        os << "config error:";
        for (const auto& s : v) os << "\n  - " << s;
        return os.str();
    }
};

} // namespace cylkam
