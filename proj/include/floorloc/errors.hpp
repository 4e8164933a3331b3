#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace floorloc {

// Base class for all library errors. The CLI maps subclasses onto distinct
// exit codes (see cli.hpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text: bad syntax, unknown key, unparseable number.
class ParseError : public Error {
public:
    using Error::Error;
    ParseError(const std::string& source, std::size_t line, const std::string& message)
        : Error(source + ":" + std::to_string(line) + ": " + message) {}
};

// Structurally valid input that violates an invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Two records with the same frame id in one file.
class DuplicateFrame : public ParseError {
public:
    using ParseError::ParseError;
};

// The 4-point calibration system is singular or ill-conditioned.
class DegenerateCalibration : public Error {
public:
    using Error::Error;
};

// Image point at or behind the vanishing line of the floor plane.
class ProjectiveHorizon : public Error {
public:
    using Error::Error;
};

class NonPositiveDistance : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyGroundTruth : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyInput : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InsufficientData : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// No frame has both annotations visible.
class NoOverlap : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnknownLabel : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Synthetic frame where occlusion removed every joint.
class FullyOccluded : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// A grid corner projects outside the synthetic camera's image.
class CornerOutsideImage : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace floorloc
