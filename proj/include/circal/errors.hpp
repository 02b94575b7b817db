#pragma once

#include <stdexcept>
#include <string>

namespace circal {

// Base of all library errors. The three direct subclasses map onto the CLI
// exit-code contract: InputError -> 2, EstimationError -> 3,
// DisambiguationError -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

class DisambiguationError : public Error {
public:
    using Error::Error;
};

// geom
class BehindCamera : public EstimationError {
public:
    BehindCamera() : EstimationError("projection-behind-camera: point has non-positive depth") {}
};

// cga / robust
class InsufficientPoints : public InputError {
public:
    explicit InsufficientPoints(const std::string& what) : InputError("insufficient-points: " + what) {}
};

class DegenerateConfiguration : public EstimationError {
public:
    explicit DegenerateConfiguration(const std::string& what)
        : EstimationError("degenerate-configuration: " + what) {}
};

class DegenerateEntity : public EstimationError {
public:
    DegenerateEntity() : EstimationError("degenerate-entity: zero square norm") {}
};

class NonCircleSolution : public EstimationError {
public:
    NonCircleSolution() : EstimationError("non-circle-solution: extracted squared radius is not positive") {}
};

class NoConsensus : public EstimationError {
public:
    NoConsensus() : EstimationError("no-consensus: no hypothesis reached the minimum inlier count") {}
};

class DegeneratePlane : public EstimationError {
public:
    DegeneratePlane() : EstimationError("degenerate-plane: input points are collinear") {}
};

// ellipse2d
class NotAnEllipse : public EstimationError {
public:
    explicit NotAnEllipse(const std::string& what) : EstimationError("not-an-ellipse: " + what) {}
};

class NoTwoIntersections : public EstimationError {
public:
    NoTwoIntersections() : EstimationError("no-two-intersections: point is not strictly inside the ellipse") {}
};

class EmptyInterior : public EstimationError {
public:
    EmptyInterior() : EstimationError("empty-interior: ellipse contains no integer pixels") {}
};

// center-refine
class DegenerateChord : public EstimationError {
public:
    DegenerateChord() : EstimationError("degenerate-chord: chord-distance denominator below 1e-12") {}
};

class InvalidCandidate : public EstimationError {
public:
    InvalidCandidate() : EstimationError("invalid-candidate: rectification scale is not real for this candidate") {}
};

class DisambiguationFailed : public DisambiguationError {
public:
    DisambiguationFailed() : DisambiguationError("disambiguation-failed: no hypothesis admits a rectifying homography") {}
};

} // namespace circal
