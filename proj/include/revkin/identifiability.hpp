#pragma once

// Checkers for the hypotheses under which multi-region tissue curves pin
// down the kinetic parameters, and the scale-equivalence comparator that
// turns "unique up to a global constant" into a decidable predicate.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "revkin/model.hpp"

namespace revkin {

/// A named list of region ids backing one satisfied condition.
struct Witness {
    std::string label;
    std::vector<std::string> region_ids;
};

/// Result of a richness check on a configuration.
struct RichnessReport {
    bool satisfied = false;
    int distinct_k34_count = 0;    ///< distinct k3+k4 values across regions
    int distinct_alpha_count = 0;  ///< distinct values among all alpha1, alpha2
    std::vector<Witness> witnesses;
    std::vector<std::string> violations;  ///< empty iff satisfied
};

/// The per-exponent witness condition: for every input exponent mu_j0 there
/// must be three regions whose k3+k4, alpha1 and alpha2 are each pairwise
/// distinct, with mu_j0 + k3 + k4 != 0 in all three, and for each eigenvalue
/// branch either mu_j0 equals the eigenvalue or
/// sum_{j: mu_j != alpha} lambda_j/(mu_j - alpha) != 0.
///
/// Distinctness and nonzeroness use `tol` with a relative scale guard. The
/// search over region triples is exhaustive.
///
/// Throws DegenerateParams if any region is degenerate.
RichnessReport check_assumption_A(const Configuration& config, double tol = 1e-9);

/// The stronger sufficient condition: at least p+3 regions with pairwise
/// distinct k3+k4 whose eigenvalues are jointly pairwise distinct (2p+6
/// distinct values). Satisfying this implies check_assumption_A passes.
///
/// Throws DegenerateParams if any region is degenerate.
RichnessReport check_region_richness(const Configuration& config, double tol = 1e-9);

/// Result of comparing two configurations up to the global input/uptake
/// scale ambiguity.
struct EquivalenceReport {
    bool equivalent = false;
    std::optional<double> zeta;  ///< K1_a / K1_b when equivalent
    /// For each input term of `a` (canonical order), the matched term index
    /// in `b`. With both inputs canonical this is the identity.
    std::optional<std::vector<int>> reindexing;
    double max_param_deviation = 0.0;
    std::vector<std::string> diagnostics;
};

/// Decides whether configurations a and b describe the same model up to a
/// single scale zeta != 0: per-region k2,k3,k4 equal within tol, input
/// exponents equal within tol after canonical reindexing, K1_a = zeta*K1_b
/// and lambda_b = zeta*lambda_a for all terms. zeta is estimated as the
/// median of per-region K1 ratios, then residual-checked everywhere.
/// Deviations are measured as |x-y| / max(1, |x|, |y|).
EquivalenceReport equivalence_up_to_scale(const Configuration& a, const Configuration& b,
                                          double tol = 1e-6);

/// Inclusive bounds for one log-uniformly sampled parameter.
struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Log-uniform sampling bounds for random configurations. K1, k2, k3, k4
/// and lambda bounds must be positive; mu bounds negative.
struct SamplerRanges {
    Range K1{0.05, 1.5};
    Range k2{0.05, 1.0};
    Range k3{0.02, 0.8};
    Range k4{0.01, 0.5};
    Range mu{-5.0, -0.01};
    Range lambda{0.1, 10.0};

    void validate() const;
};

/// Draws a random configuration with n regions (ids "r1".."rn") and p input
/// terms, deterministically in `seed`. Degenerate regions and duplicate
/// exponents are rejected and redrawn.
///
/// Throws ValidationError on bad bounds/counts, ExhaustedRedraws after 1000
/// rejections.
Configuration sample_random_config(std::uint64_t seed, int n, int p,
                                   const SamplerRanges& ranges = {});

}  // namespace revkin
