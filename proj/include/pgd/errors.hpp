#ifndef PGD_ERRORS_HPP
#define PGD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pgd {

// Error taxonomy shared by the library and the CLI exit-code mapping.
enum class ErrorKind {
    Config,       // bad dimensions, unparsable input, invalid experiment spec
    Degenerate,   // singular covariance, non-SPD matrix, model not strongly concave
    Numerical,    // blow-up during a run, integration failure
    Precondition, // operation called outside its stated premise (e.g. h too large)
    Unsupported,  // input shape the implementation deliberately rejects
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Run blow-ups carry the offending step so callers can report where a
// trajectory went non-finite.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(long step, const std::string& what)
        : Error(ErrorKind::Numerical, what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

[[noreturn]] inline void throw_config(const std::string& what) { throw Error(ErrorKind::Config, what); }
[[noreturn]] inline void throw_degenerate(const std::string& what) { throw Error(ErrorKind::Degenerate, what); }
[[noreturn]] inline void throw_precondition(const std::string& what) { throw Error(ErrorKind::Precondition, what); }
[[noreturn]] inline void throw_unsupported(const std::string& what) { throw Error(ErrorKind::Unsupported, what); }

} // namespace pgd

#endif
