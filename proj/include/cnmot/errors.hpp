#pragma once

#include <stdexcept>
#include <string>

namespace cnmot {

// Base for all library errors; exit_code() is what the CLI returns.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual int exit_code() const { return 2; }
    virtual const char* kind() const { return "Error"; }
};

class InvalidInput : public Error {
public:
    using Error::Error;
    const char* kind() const override { return "InvalidInput"; }
};

class NonPositiveSupport : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 3; }
    const char* kind() const override { return "NonPositiveSupport"; }
};

class MartingaleViolation : public Error {
public:
    using Error::Error;
    const char* kind() const override { return "MartingaleViolation"; }
};

class NotInConvexOrder : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 4; }
    const char* kind() const override { return "NotInConvexOrder"; }
};

class DegeneratePair : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 4; }
    const char* kind() const override { return "DegeneratePair"; }
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, int iterations, double residual)
        : Error(what), iterations(iterations), residual(residual) {}
    int exit_code() const override { return 5; }
    const char* kind() const override { return "NoConvergence"; }
    int iterations;
    double residual;
};

class Infeasible : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 4; }
    const char* kind() const override { return "Infeasible"; }
};

class Unbounded : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 4; }
    const char* kind() const override { return "Unbounded"; }
};

class IterationLimit : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 5; }
    const char* kind() const override { return "IterationLimit"; }
};

class RejectionBoundViolated : public Error {
public:
    RejectionBoundViolated(const std::string& what, double bound, double observed)
        : Error(what), bound(bound), observed(observed) {}
    const char* kind() const override { return "RejectionBoundViolated"; }
    double bound;
    double observed;
};

}  // namespace cnmot
