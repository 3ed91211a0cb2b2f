#pragma once

// Algebra of exponential-polynomial sums  G(t) = sum_j P_j(t) * exp(mu_j*t)
// with polynomial coefficients P_j: symbolic expansion of tissue curves,
// canonical forms for uniqueness comparisons, and linear coefficient
// fitting over a fixed exponent basis.

#include <utility>
#include <vector>

#include "revkin/model.hpp"

namespace revkin {

/// One term P(t) * exp(exponent * t) with P(t) = coeffs[0] + coeffs[1]*t + ...
/// A canonical term has a nonzero leading coefficient.
struct ExpPolyTerm {
    double exponent = 0.0;
    std::vector<double> coeffs;  ///< c0..c_{m-1}

    int multiplicity() const { return static_cast<int>(coeffs.size()); }
};

/// A sum of exponential-polynomial terms. Canonical form: exponents
/// pairwise distinct, sorted descending, no all-zero terms.
struct ExpPolySum {
    std::vector<ExpPolyTerm> terms;
};

/// Pointwise evaluation sum_j P_j(t) * exp(mu_j * t).
double eval_sum(const ExpPolySum& sum, double t);

/// Canonical form: merges terms whose exponents agree within 1e-9
/// (absolute), drops coefficients below coeff_tol relative to the largest
/// coefficient magnitude, trims zero leading coefficients, sorts by
/// descending exponent. Idempotent.
ExpPolySum canonicalize(const ExpPolySum& sum, double coeff_tol = 1e-12);

/// Symbolic expansion of the closed-form tissue curve: the canonical sum
/// whose pointwise evaluation equals eval_ct_closed_form for all t >= 0.
/// Non-resonant input exponents contribute exp(mu_j*t) with coefficient
/// K1*lambda_j*(mu_j+k3+k4) / ((mu_j-alpha1)*(mu_j-alpha2)); eigenvalue
/// exponents carry the remaining brackets, plus t*exp(alpha*t) terms when
/// an input exponent coincides with an eigenvalue.
///
/// Throws DegenerateParams.
ExpPolySum expand_configuration(const KineticParams& params, const PolyexpInput& input);

/// The interpolation sample bound: true iff 2*(m_1+...+m_p) <= T.
bool sample_count_ok(const std::vector<int>& multiplicities, int n_samples);

/// Least-squares fit of the coefficients of sum_j P_j(t)*exp(mu_j*t) over
/// the basis { t^k * exp(mu_j*t) : 0 <= k < m_j } given samples (t_l, s_l).
/// Uses column-equilibrated Householder QR with one step of iterative
/// refinement. When the samples come exactly from a sum over this basis the
/// coefficients are recovered (they are unique once 2*sum(m_j) <= T).
///
/// Throws InsufficientSamples when the sample bound fails, ValidationError
/// on duplicate sample times or size mismatches, IllConditioned when the
/// equilibrated basis matrix condition estimate exceeds cond_limit.
ExpPolySum fit_coefficients_given_exponents(const std::vector<std::pair<double, double>>& samples,
                                            const std::vector<double>& exponents,
                                            const std::vector<int>& multiplicities,
                                            double cond_limit = 1e12);

/// Biexponential attenuation factor f(t) = a*exp(b*t) + (1-a)*exp(c*t),
/// normalized so f(0) = 1 by construction. Members of this family form a
/// degree-4 parametrized class: agreement of zeta*f with another member at
/// 4 distinct points forces zeta = 1 and equal parameters.
struct AttenuationBiexp {
    /// Throws ValidationError unless all fields are finite and b != c.
    AttenuationBiexp(double a, double b, double c);

    double a;  ///< weight of the first exponential
    double b;  ///< first rate (min^-1)
    double c;  ///< second rate (min^-1)
};

/// f(t) = a*exp(b*t) + (1-a)*exp(c*t).
double eval_attenuation(const AttenuationBiexp& f, double t);

}  // namespace revkin
