#pragma once

// Shared builders for the test suites.

#include <cmath>
#include <vector>

#include "revkin/model.hpp"

namespace revkin::test {

inline PolyexpInput demo_input() {
    return PolyexpInput({{1.0, -0.05}, {0.5, -0.3}, {-0.2, -1.0}, {0.1, -3.0}});
}

inline KineticParams demo_params() { return {0.5, 0.4, 0.3, 0.1}; }

/// Seven regions with k3+k4 = 0.1 .. 0.7 and generic k2: rich enough for a
/// degree-4 input.
inline std::vector<Region> demo_regions() {
    return {
        {"r1", {0.9, 0.50, 0.08, 0.02}}, {"r2", {0.6, 0.35, 0.15, 0.05}},
        {"r3", {1.1, 0.60, 0.22, 0.08}}, {"r4", {0.4, 0.25, 0.30, 0.10}},
        {"r5", {0.8, 0.45, 0.38, 0.12}}, {"r6", {1.3, 0.70, 0.45, 0.15}},
        {"r7", {0.5, 0.30, 0.55, 0.15}},
    };
}

inline Configuration demo_config() { return Configuration(demo_regions(), demo_input()); }

inline std::vector<double> log_grid(double start, double end, int count) {
    std::vector<double> out;
    out.reserve(count);
    const double lo = std::log(start);
    const double hi = std::log(end);
    for (int i = 0; i < count; ++i) {
        out.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(count - 1)));
    }
    return out;
}

inline std::vector<double> linear_grid(double start, double end, int count) {
    std::vector<double> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        out.push_back(start + (end - start) * static_cast<double>(i) /
                                  static_cast<double>(count - 1));
    }
    return out;
}

inline double rel_dev(double a, double b) {
    return std::fabs(a - b) / std::max(1.0, std::fabs(b));
}

}  // namespace revkin::test
