#pragma once

#include <stdexcept>
#include <string>

namespace lie_reach {

// Base for every failure raised by the reachability pipeline.
struct reach_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A box was constructed (or an embedding state formed) with lower > upper.
struct OrderingViolation : reach_error {
    using reach_error::reach_error;
};

// SO(3) logarithm requested for a rotation angle at (or within 1e-9 of) pi.
struct AngleAtCut : reach_error {
    using reach_error::reach_error;
};

// Tangent interval left the region on which exp is injective.
struct InjectivityExceeded : reach_error {
    using reach_error::reach_error;
};

// Monotone mode was requested but the monotonicity hypothesis does not hold.
struct NonMonotoneStep : reach_error {
    using reach_error::reach_error;
};

// Torus relative angle left the principal branch (-pi, pi).
struct BranchViolation : reach_error {
    using reach_error::reach_error;
};

struct DimensionMismatch : reach_error {
    using reach_error::reach_error;
};

} // namespace lie_reach
