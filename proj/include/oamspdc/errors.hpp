#pragma once

#include <stdexcept>
#include <string>

namespace oamspdc {

// Broad error classes; each maps to a distinct CLI exit code (see README).
enum class ErrorClass : int {
    ConfigIo = 2,
    ConfigSyntax = 3,
    ConfigValidation = 4,
    PhysicsDomain = 5,
    Geometry = 6,
    Sampling = 7,
    Io = 8,
};

class SpdcError : public std::runtime_error {
public:
    SpdcError(ErrorClass cls, const std::string& msg)
        : std::runtime_error(msg), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

// Eq.-style phase matching has no solution (arccos argument out of range).
struct NoPhaseMatch : SpdcError {
    explicit NoPhaseMatch(const std::string& m) : SpdcError(ErrorClass::PhysicsDomain, m) {}
};

// Azimuthal split equation insoluble for the requested charge/geometry.
struct NoSplitSolution : SpdcError {
    explicit NoSplitSolution(const std::string& m) : SpdcError(ErrorClass::PhysicsDomain, m) {}
};

// Requested donut radius of a mode that has no donut (l == 0).
struct NoDonut : SpdcError {
    explicit NoDonut(const std::string& m) : SpdcError(ErrorClass::PhysicsDomain, m) {}
};

struct GeometryViolation : SpdcError {
    explicit GeometryViolation(const std::string& m) : SpdcError(ErrorClass::PhysicsDomain, m) {}
};

struct DivisionByZeroRate : SpdcError {
    explicit DivisionByZeroRate(const std::string& m) : SpdcError(ErrorClass::PhysicsDomain, m) {}
};

struct TotalInternalReflection : SpdcError {
    explicit TotalInternalReflection(const std::string& m) : SpdcError(ErrorClass::Geometry, m) {}
};

struct InvalidDetectionPoint : SpdcError {
    explicit InvalidDetectionPoint(const std::string& m) : SpdcError(ErrorClass::Geometry, m) {}
};

struct DetectorOverlap : SpdcError {
    explicit DetectorOverlap(const std::string& m) : SpdcError(ErrorClass::Geometry, m) {}
};

struct EnvelopeTooLoose : SpdcError {
    explicit EnvelopeTooLoose(const std::string& m) : SpdcError(ErrorClass::Sampling, m) {}
};

struct SortOrderViolation : SpdcError {
    explicit SortOrderViolation(const std::string& m) : SpdcError(ErrorClass::Sampling, m) {}
};

struct NoSignal : SpdcError {
    explicit NoSignal(const std::string& m) : SpdcError(ErrorClass::Sampling, m) {}
};

struct ValidationError : SpdcError {
    explicit ValidationError(const std::string& m) : SpdcError(ErrorClass::ConfigValidation, m) {}
};

struct IoError : SpdcError {
    explicit IoError(const std::string& m) : SpdcError(ErrorClass::Io, m) {}
};

// Config file absent or unreadable (distinct exit code from syntax errors).
struct ConfigIoError : SpdcError {
    explicit ConfigIoError(const std::string& m) : SpdcError(ErrorClass::ConfigIo, m) {}
};

// Config-file parse error with file position attached.
class ConfigError : public SpdcError {
public:
    ConfigError(const std::string& msg, int line)
        : SpdcError(ErrorClass::ConfigSyntax, msg + " (line " + std::to_string(line) + ")"),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace oamspdc
