#pragma once

#include <stdexcept>
#include <string>

namespace collapse_lab {

// Base class for every failure the library reports.
struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside its documented domain (labels, intervals, counts, ...).
struct DomainError : SimulationError {
    using SimulationError::SimulationError;
};

// Requested grid exceeds the configured cell cap.
struct GridCapacityError : SimulationError {
    using SimulationError::SimulationError;
};

// State feature too narrow to resolve on the grid (width < 2 spacings).
struct ResolutionError : SimulationError {
    using SimulationError::SimulationError;
};

// Operands live on different grids.
struct IncompatibilityError : SimulationError {
    using SimulationError::SimulationError;
};

// Degenerate input, e.g. an all-zero superposition.
struct DegenerateInputError : SimulationError {
    using SimulationError::SimulationError;
};

// Non-finite amplitudes produced by a propagation step.
struct NumericalOverflowError : SimulationError {
    using SimulationError::SimulationError;
};

// Collapse kernel with numerically vanishing overlap with the state.
struct ZeroWeightError : SimulationError {
    using SimulationError::SimulationError;
};

// Branch weight below threshold; restricted comparison is undefined.
struct UndefinedBranchError : SimulationError {
    using SimulationError::SimulationError;
};

// Operation defined only for a specific particle count.
struct UnsupportedArityError : SimulationError {
    using SimulationError::SimulationError;
};

// Jump process exceeded the configured event cap.
struct ClockOverrunError : SimulationError {
    using SimulationError::SimulationError;
};

// Velocity field evaluated too close to a wavefunction node.
struct NodeError : SimulationError {
    using SimulationError::SimulationError;
};

// Filesystem failure while writing outputs.
struct IoError : SimulationError {
    using SimulationError::SimulationError;
};

}  // namespace collapse_lab
