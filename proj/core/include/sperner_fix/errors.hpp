#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sperner_fix {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// n = 0 was requested where a subdivision is needed.
class TrivialDimension : public Error {
public:
    TrivialDimension() : Error("trivial dimension: the 0-simplex is a single point") {}
};

class IndexError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A vertex whose neighbourhood contains no point with f(v) != v.
class NonConstancyViolation : public Error {
public:
    NonConstancyViolation(std::vector<std::int64_t> vertex, const std::string& what)
        : Error(what), vertex_(std::move(vertex)) {}
    const std::vector<std::int64_t>& vertex() const noexcept { return vertex_; }

private:
    std::vector<std::int64_t> vertex_;
};

/// The map left the simplex (or the domain) at some evaluation point.
class RangeViolation : public Error {
public:
    RangeViolation(std::vector<double> where, const std::string& what)
        : Error(what), where_(std::move(where)) {}
    const std::vector<double>& where() const noexcept { return where_; }

private:
    std::vector<double> where_;
};

/// The labeling rule was applied at a point with |f(v) - v|_1 <= tau_fix.
class ApproximateFixedPoint : public Error {
public:
    explicit ApproximateFixedPoint(std::vector<double> point)
        : Error("approximate fixed point reached"), point_(std::move(point)) {}
    const std::vector<double>& point() const noexcept { return point_; }

private:
    std::vector<double> point_;
};

class IncompleteLabeling : public Error {
public:
    using Error::Error;
};

class InadmissibleLabeling : public Error {
public:
    using Error::Error;
};

/// Parity guarantees were contradicted; indicates a bug, never a user error.
class InternalConsistency : public Error {
public:
    using Error::Error;
};

class ModulusRequired : public Error {
public:
    ModulusRequired() : Error("modulus required: map has no modulus of continuity") {}
};

class MeshInsufficiency : public Error {
public:
    using Error::Error;
};

class ResolutionCap : public Error {
public:
    ResolutionCap(std::int64_t needed, std::int64_t cap)
        : Error("resolution cap exceeded: need m = " + std::to_string(needed) +
                ", cap is " + std::to_string(cap)),
          needed_(needed) {}
    std::int64_t needed() const noexcept { return needed_; }

private:
    std::int64_t needed_;
};

class ProjectionFailure : public Error {
public:
    ProjectionFailure(double achieved, const std::string& what)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class EmbeddingDistortion : public Error {
public:
    EmbeddingDistortion(double ambient, double simplex, const std::string& what)
        : Error(what), ambient_(ambient), simplex_(simplex) {}
    double ambient_residual() const noexcept { return ambient_; }
    double simplex_residual() const noexcept { return simplex_; }

private:
    double ambient_;
    double simplex_;
};

/// The requested net radius is below what the domain sample can certify.
class ResolutionError : public Error {
public:
    ResolutionError(double achievable, const std::string& what)
        : Error(what), achievable_(achievable) {}
    double achievable() const noexcept { return achievable_; }

private:
    double achievable_;
};

class DegenerateSampling : public Error {
public:
    using Error::Error;
};

}  // namespace sperner_fix
