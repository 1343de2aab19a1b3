#ifndef FQMAG_ERRORS_HPP
#define FQMAG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fqmag {

/// Coarse failure class, used by the CLI to choose an exit code.
enum class ErrorKind { input, numerical, io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// A checked precondition of an approximation does not hold.
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class TruncationInvalid : public PreconditionError {
public:
    TruncationInvalid(double gap_ghz, double thermal_ghz, double doublet_span_ghz);
    double gap() const noexcept { return gap_; }
    double thermal_energy() const noexcept { return thermal_; }
    double doublet_span() const noexcept { return span_; }

private:
    double gap_;
    double thermal_;
    double span_;
};

class CalibrationError : public Error {
public:
    explicit CalibrationError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// Observed value outside what the model can attain.
class OutOfRangeError : public Error {
public:
    OutOfRangeError(const std::string& what, double lower, double upper)
        : Error(ErrorKind::input, what), lower_(lower), upper_(upper) {}
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }

private:
    double lower_;
    double upper_;
};

class RankDeficientError : public Error {
public:
    explicit RankDeficientError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class ModelMismatchError : public Error {
public:
    explicit ModelMismatchError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Configuration or CSV problem tied to a line of input.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, const char* label = "line")
        : Error(ErrorKind::input, std::string(label) + " " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

inline TruncationInvalid::TruncationInvalid(double gap_ghz, double thermal_ghz, double doublet_span_ghz)
    : PreconditionError("two-level truncation invalid: gap " + std::to_string(gap_ghz) +
                        " GHz, thermal energy " + std::to_string(thermal_ghz) + " GHz, doublet span " +
                        std::to_string(doublet_span_ghz) + " GHz"),
      gap_(gap_ghz),
      thermal_(thermal_ghz),
      span_(doublet_span_ghz) {}

}  // namespace fqmag

#endif  // FQMAG_ERRORS_HPP
