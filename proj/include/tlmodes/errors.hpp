#pragma once

#include <stdexcept>
#include <string>

namespace tlmodes {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Netlist / scenario file problems. Exit code 2 territory in the CLI.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
    explicit ParseError(const std::string& reason) : Error(reason), line_(0) {}
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

class SyntaxError : public ParseError {
public:
    using ParseError::ParseError;
};
class DuplicateIdError : public ParseError {
public:
    using ParseError::ParseError;
};
class UnknownNodeError : public ParseError {
public:
    using ParseError::ParseError;
};
class DisconnectedGraphError : public ParseError {
public:
    using ParseError::ParseError;
};
class MissingDeclError : public ParseError {  // missing ground / port
public:
    using ParseError::ParseError;
};

/// Numerical / solver failures. Exit code 3 territory in the CLI.
class SolverError : public Error {
public:
    using Error::Error;
};

class NearPoleError : public SolverError {
public:
    NearPoleError(double omega, double nearest)
        : SolverError("response evaluated too close to an inner-circuit resonance: omega=" +
                      std::to_string(omega) + " rad/s, nearest pole " + std::to_string(nearest)),
          omega_(omega), nearest_(nearest) {}
    [[nodiscard]] double omega() const { return omega_; }
    [[nodiscard]] double nearest_pole() const { return nearest_; }

private:
    double omega_, nearest_;
};

class DegenerateCapacitanceError : public SolverError {
public:
    using SolverError::SolverError;
};
class ZeroNormError : public SolverError {
public:
    using SolverError::SolverError;
};
class NoRootsInRangeError : public SolverError {
public:
    using SolverError::SolverError;
};
class BranchCutContaminationError : public SolverError {
public:
    using SolverError::SolverError;
};
class NonConvergenceError : public SolverError {
public:
    using SolverError::SolverError;
};
class TargetUnreachableError : public SolverError {
public:
    using SolverError::SolverError;
};
class IdentificationFailureError : public SolverError {
public:
    using SolverError::SolverError;
};

}  // namespace tlmodes
