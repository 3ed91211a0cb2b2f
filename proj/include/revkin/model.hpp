#pragma once

// Domain types and exact forward evaluation of the reversible two-tissue
// compartment model
//
//   dCf/dt = K1*Cp(t) - (k2+k3)*Cf + k4*Cb,   Cf(0) = 0
//   dCb/dt = k3*Cf - k4*Cb,                   Cb(0) = 0
//   Ct = Cf + Cb
//
// driven by a polyexponential arterial plasma input Cp(t) = sum_j lambda_j *
// exp(mu_j * t). All rates are per minute, times in minutes, concentrations
// in dimensionless activity units.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "revkin/errors.hpp"

namespace revkin {

/// Exchange rate constants of one tissue region. K1 is the plasma-to-free
/// rate (mL·cm^-3·min^-1); k2, k3, k4 are free->plasma, free->bound and
/// bound->free rates (min^-1).
struct KineticParams {
    double K1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double k4 = 0.0;

    /// Throws ValidationError unless all fields are finite and >= 0.
    void validate() const;

    /// (k2+k3+k4)^2 > 4*k2*k4, i.e. the tissue system matrix has two
    /// distinct real eigenvalues. Holds whenever k3 > 0, and for k3 == 0
    /// whenever k2 != k4.
    bool non_degenerate() const;
};

/// The two eigenvalues of the tissue system matrix: the real roots of
/// x^2 + (k2+k3+k4)*x + k2*k4, with alpha2 < alpha1 <= 0.
struct Alphas {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double k_half = 0.0;  ///< (k2+k3+k4)/2
};

/// Computes the eigenvalue pair. The roots satisfy
/// alpha1 + alpha2 + k2 + k3 + k4 = 0 and alpha1*alpha2 = k2*k4, and for
/// k2,k3,k4 > 0 the strict ordering alpha2 < -k2 < alpha1 < 0.
///
/// Throws DegenerateParams when (k2+k3+k4)^2 <= 4*k2*k4.
Alphas compute_alphas(const KineticParams& params);

/// One term of the arterial input: lambda * exp(mu * t).
struct PolyexpTerm {
    double lambda = 0.0;  ///< amplitude, nonzero
    double mu = 0.0;      ///< exponent (min^-1)
};

/// Arterial plasma input Cp(t) = sum_j lambda_j * exp(mu_j * t) with
/// pairwise-distinct exponents, stored in canonical order (mu strictly
/// descending).
class PolyexpInput {
public:
    /// Validates (every lambda nonzero, all mu finite and pairwise
    /// distinct) and sorts terms by descending mu.
    explicit PolyexpInput(std::vector<PolyexpTerm> terms);

    const std::vector<PolyexpTerm>& terms() const { return terms_; }
    int degree() const { return static_cast<int>(terms_.size()); }

private:
    std::vector<PolyexpTerm> terms_;
};

/// Evaluates Cp(t) = sum_j lambda_j * exp(mu_j * t).
double eval_cp(const PolyexpInput& input, double t);

/// One named tissue region.
struct Region {
    std::string id;
    KineticParams params;
};

/// A full parameter configuration: n regions sharing one arterial input.
class Configuration {
public:
    /// Validates region ids (nonempty, unique) and each region's params.
    Configuration(std::vector<Region> regions, PolyexpInput input);

    const std::vector<Region>& regions() const { return regions_; }
    const PolyexpInput& input() const { return input_; }
    int n_regions() const { return static_cast<int>(regions_.size()); }

    /// Pointer to the region with the given id, or nullptr.
    const Region* find_region(const std::string& id) const;

private:
    std::vector<Region> regions_;
    PolyexpInput input_;
};

/// Fractional blood volume mixing: Cpet = (1-vb)*Ct + vb*Cwb.
struct MixingModel {
    /// Throws ValidationError unless 0 <= vb < 1.
    explicit MixingModel(double vb);
    double vb;
};

/// One whole-blood sample (time in minutes, nonzero concentration).
struct WbSample {
    double time = 0.0;
    double value = 0.0;
};

/// One region's sampled tissue curve.
struct TacCurve {
    std::string region_id;
    std::vector<double> values;  ///< one per grid time
};

/// Sampled tissue activity curves on a shared time grid, with optional
/// whole-blood samples alongside.
struct TacTable {
    std::vector<double> time_grid;    ///< strictly increasing, all > 0
    std::vector<TacCurve> curves;     ///< each with time_grid.size() values
    std::vector<WbSample> wb_samples; ///< optional; empty when absent

    int n_times() const { return static_cast<int>(time_grid.size()); }

    /// Throws ValidationError on grid/curve/wb invariant violations
    /// (grid not strictly increasing or nonpositive, curve length
    /// mismatch, duplicate wb times, zero wb values).
    void validate() const;

    /// Pointer to the curve for the given region id, or nullptr.
    const TacCurve* find_curve(const std::string& region_id) const;
};

/// Closed-form tissue curve Ct(t) for a polyexponential input. Resonant
/// input exponents (mu_j within 1e-9*max(1,|alpha|) of an eigenvalue) take
/// the t*exp(alpha*t) branch; near-resonant ones (within 1e-6) go through a
/// cancellation-free limit expansion.
///
/// Throws DegenerateParams via compute_alphas.
double eval_ct_closed_form(const KineticParams& params, const PolyexpInput& input, double t);

/// Tissue curve for an arbitrary continuous input, via the convolution
/// representation
///
///   Ct(t) = K1/(a2-a1) * [ (a2+k2) * I(a1) - (a1+k2) * I(a2) ],
///   I(a)  = integral_0^t exp(a*(t-s)) * Cp(s) ds,
///
/// evaluated with adaptive Gauss-Kronrod quadrature to quad_tol.
///
/// Throws DegenerateParams, QuadratureFailure.
double eval_ct_convolution(const KineticParams& params, const std::function<double(double)>& cp,
                           double t, double quad_tol = 1e-10);

/// PET voxel mixture (1-vb)*ct + vb*cwb.
double eval_cpet(double ct, double cwb, const MixingModel& mixing);

/// Simulates every region of a configuration over a time grid. When
/// `mixing` is given, `cwb` must hold whole-blood values aligned with the
/// grid and the output curves are PET mixtures; the wb values are recorded
/// in the returned table. Otherwise the output is pure Ct.
///
/// Throws ValidationError (bad grid), MissingWholeBlood (mixing without
/// cwb or length mismatch), DegenerateParams.
TacTable simulate_tacs(const Configuration& config, const std::vector<double>& grid,
                       const std::optional<MixingModel>& mixing = std::nullopt,
                       const std::optional<std::vector<double>>& cwb = std::nullopt);

}  // namespace revkin
