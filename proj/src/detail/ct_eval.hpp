#pragma once

// Core closed-form evaluation of the tissue curve, shared by the public
// model API and the estimation hot loop.
//
// With eigenvalues a1 > a2 of x^2 + (k2+k3+k4)x + k2*k4, the tissue curve
// under input sum_j lambda_j exp(mu_j t) regroups exactly as
//
//   Ct(t) = K1/(a2-a1) * sum_j lambda_j *
//           [ (a2+k2) * phi(mu_j, a1, t) - (a1+k2) * phi(mu_j, a2, t) ]
//
// where phi(mu, a, t) = (exp(mu t) - exp(a t)) / (mu - a) is the divided
// difference of the exponential, with limit t*exp(a t) at mu = a. The
// grouping makes the resonance limit explicit and keeps near-resonant
// evaluation cancellation-free.

#include <cmath>

namespace revkin::detail {

// mu is treated as equal to an eigenvalue when within snap * max(1, |a|);
// inside near * max(1, |a|) the divided difference goes through expm1.
inline constexpr double kResonanceSnapTol = 1e-9;
inline constexpr double kResonanceNearTol = 1e-6;

/// Divided difference (exp(mu t) - exp(a t)) / (mu - a) with a snap branch
/// (returns the limit t*exp(a t)) and an expm1 branch near the limit.
inline double exp_divided_difference(double mu, double a, double t) {
    const double d = mu - a;
    const double scale = std::max(1.0, std::fabs(a));
    const double ad = std::fabs(d);
    if (ad <= kResonanceSnapTol * scale) {
        return t * std::exp(a * t);
    }
    if (ad <= kResonanceNearTol * scale) {
        return std::exp(a * t) * std::expm1(d * t) / d;
    }
    return (std::exp(mu * t) - std::exp(a * t)) / d;
}

/// True when mu snaps to the eigenvalue a.
inline bool resonant_with(double mu, double a) {
    return std::fabs(mu - a) <= kResonanceSnapTol * std::max(1.0, std::fabs(a));
}

/// Precomputed per-region factors of the closed form.
struct CtKernel {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double front = 0.0;   // K1 / (alpha2 - alpha1)
    double coef_a1 = 0.0; // alpha2 + k2 (multiplies phi(mu, alpha1, t))
    double coef_a2 = 0.0; // alpha1 + k2 (multiplies phi(mu, alpha2, t))

    CtKernel() = default;
    CtKernel(double k1_, double k2_, double a1, double a2)
        : alpha1(a1), alpha2(a2), front(k1_ / (a2 - a1)), coef_a1(a2 + k2_), coef_a2(a1 + k2_) {}

    double eval(const double* mu, const double* lambda, int p, double t) const {
        double acc = 0.0;
        for (int j = 0; j < p; ++j) {
            // A snapped exponent is replaced by the eigenvalue itself so the
            // pointwise path agrees with the symbolic expansion bit-for-bit.
            double mj = mu[j];
            if (resonant_with(mj, alpha1)) {
                mj = alpha1;
            } else if (resonant_with(mj, alpha2)) {
                mj = alpha2;
            }
            acc += lambda[j] * (coef_a1 * exp_divided_difference(mj, alpha1, t) -
                                coef_a2 * exp_divided_difference(mj, alpha2, t));
        }
        return front * acc;
    }
};

}  // namespace revkin::detail
