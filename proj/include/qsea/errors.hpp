#pragma once

#include <stdexcept>
#include <string>

namespace qsea {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input matrix is not Hermitian within tolerance; carries max |m - m^dag|.
class NonHermitianError : public Error {
public:
    NonHermitianError(double violation, const std::string& where)
        : Error(where + ": matrix not Hermitian, violation " + std::to_string(violation)),
          violation(violation) {}
    double violation;
};

/// Trace differs from 1 beyond tolerance; carries |tr - 1|.
class NonUnitTraceError : public Error {
public:
    explicit NonUnitTraceError(double violation)
        : Error("density matrix trace deviates from 1 by " + std::to_string(violation)),
          violation(violation) {}
    double violation;
};

/// Negative eigenvalue beyond tolerance; carries -min(eigenvalue).
class NotPsdError : public Error {
public:
    explicit NotPsdError(double violation)
        : Error("density matrix has negative eigenvalue, violation " + std::to_string(violation)),
          violation(violation) {}
    double violation;
};

/// Bell-diagonal coefficient triple produces a negative eigenvalue.
class CConfigError : public Error {
public:
    explicit CConfigError(const std::string& what) : Error(what) {}
};

/// Scalar function applied to an eigenvalue outside its domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// Gram determinant of the generator set is numerically singular.
class DegenerateGramError : public Error {
public:
    explicit DegenerateGramError(double gram)
        : Error("Gram determinant " + std::to_string(gram) + " below threshold"), gram(gram) {}
    double gram;
};

/// Integrator step produced a state too far outside the PSD cone.
class StepRejectedError : public Error {
public:
    StepRejectedError(double t, double min_eigenvalue)
        : Error("step rejected at t=" + std::to_string(t) + ", min eigenvalue " +
                std::to_string(min_eigenvalue) + " (dt too large)"),
          t(t), min_eigenvalue(min_eigenvalue) {}
    double t;
    double min_eigenvalue;
};

/// No Newton start converged for a perturbation draw.
class NoRootFoundError : public Error {
public:
    NoRootFoundError() : Error("no constraint root found from any Newton start") {}
};

/// Every converged root failed density-matrix validation.
class AllRootsInvalidError : public Error {
public:
    AllRootsInvalidError() : Error("no constraint root yields a valid density matrix") {}
};

/// Pearson correlation of a constant sequence.
class ZeroVarianceError : public Error {
public:
    explicit ZeroVarianceError(const std::string& which)
        : Error("zero variance in " + which + " sequence") {}
};

/// Scenario/configuration validation failure; carries the offending field path.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& field, const std::string& what)
        : Error("config field '" + field + "': " + what), field(field) {}
    std::string field;
};

/// Filesystem or CSV parsing failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace qsea
