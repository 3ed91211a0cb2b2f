#pragma once

// Brute-force reference for the compartment system: classical fixed-step
// RK4 integration of the two-state ODE, independent of every closed-form
// evaluation path. Used to validate the analytic solutions.

#include <functional>
#include <vector>

#include "revkin/model.hpp"

namespace revkin {

/// Continuous arterial input, sampled analytically at interior stage times.
using InputFn = std::function<double(double)>;

/// A fixed-step trajectory of the free/bound compartment states.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> cf;
    std::vector<double> cb;

    /// Ct = Cf + Cb at node i.
    double ct(std::size_t i) const { return cf[i] + cb[i]; }
};

/// Integrates the system from zero initial state to t_end with uniform RK4
/// steps of size `step` (the final step is shortened to land on t_end).
/// Local truncation error is O(step^5).
///
/// Throws ValidationError on bad step/t_end, NonFiniteState if the state
/// leaves the finite range.
Trajectory integrate_system(const KineticParams& params, const InputFn& cp, double t_end,
                            double step);

/// Ct at each requested grid time, integrating segment-by-segment so every
/// grid point is hit exactly with substeps of size <= step.
///
/// Grid must be strictly increasing and positive.
std::vector<double> integrate_at(const KineticParams& params, const InputFn& cp,
                                 const std::vector<double>& grid, double step);

}  // namespace revkin
