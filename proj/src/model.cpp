#include "revkin/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "detail/ct_eval.hpp"
#include "detail/quadrature.hpp"

namespace revkin {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void KineticParams::validate() const {
    if (!finite(K1) || !finite(k2) || !finite(k3) || !finite(k4)) {
        throw ValidationError("kinetic parameters must be finite");
    }
    if (K1 < 0.0 || k2 < 0.0 || k3 < 0.0 || k4 < 0.0) {
        throw ValidationError("kinetic parameters must be non-negative");
    }
}

bool KineticParams::non_degenerate() const {
    const double b = k2 + k3 + k4;
    return b * b > 4.0 * k2 * k4;
}

Alphas compute_alphas(const KineticParams& params) {
    params.validate();
    const double b = params.k2 + params.k3 + params.k4;  // -(alpha1 + alpha2)
    const double c = params.k2 * params.k4;              // alpha1 * alpha2
    const double disc = b * b - 4.0 * c;
    if (!(disc > 0.0)) {
        std::ostringstream msg;
        msg << "degenerate parameters: (k2+k3+k4)^2 = " << b * b << " <= 4*k2*k4 = " << 4.0 * c;
        throw DegenerateParams(msg.str());
    }
    Alphas out;
    out.k_half = 0.5 * b;
    if (c == 0.0) {
        // One eigenvalue is exactly zero (k2 = 0 or k4 = 0).
        out.alpha1 = 0.0;
        out.alpha2 = -b;
    } else {
        // alpha2 = (-b - sqrt(disc))/2 has no cancellation; recover alpha1
        // from the product to keep it accurate when the roots are uneven.
        out.alpha2 = -0.5 * (b + std::sqrt(disc));
        out.alpha1 = c / out.alpha2;
    }
    return out;
}

PolyexpInput::PolyexpInput(std::vector<PolyexpTerm> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) {
        throw ValidationError("polyexponential input needs at least one term");
    }
    for (const auto& term : terms_) {
        if (!finite(term.lambda) || !finite(term.mu)) {
            throw ValidationError("polyexponential term fields must be finite");
        }
        if (term.lambda == 0.0) {
            throw ValidationError("polyexponential amplitudes must be nonzero");
        }
    }
    std::sort(terms_.begin(), terms_.end(),
              [](const PolyexpTerm& a, const PolyexpTerm& b) { return a.mu > b.mu; });
    for (std::size_t j = 1; j < terms_.size(); ++j) {
        if (!(terms_[j - 1].mu > terms_[j].mu)) {
            std::ostringstream msg;
            msg << "polyexponential exponents must be pairwise distinct (mu = " << terms_[j].mu
                << " repeats)";
            throw ValidationError(msg.str());
        }
    }
}

double eval_cp(const PolyexpInput& input, double t) {
    double acc = 0.0;
    for (const auto& term : input.terms()) acc += term.lambda * std::exp(term.mu * t);
    return acc;
}

Configuration::Configuration(std::vector<Region> regions, PolyexpInput input)
    : regions_(std::move(regions)), input_(std::move(input)) {
    if (regions_.empty()) {
        throw ValidationError("configuration needs at least one region");
    }
    std::set<std::string> seen;
    for (const auto& region : regions_) {
        if (region.id.empty()) {
            throw ValidationError("region ids must be nonempty");
        }
        if (!seen.insert(region.id).second) {
            throw ValidationError("duplicate region id: " + region.id);
        }
        region.params.validate();
    }
}

const Region* Configuration::find_region(const std::string& id) const {
    for (const auto& region : regions_) {
        if (region.id == id) return &region;
    }
    return nullptr;
}

MixingModel::MixingModel(double vb_) : vb(vb_) {
    if (!finite(vb) || vb < 0.0 || vb >= 1.0) {
        throw ValidationError("fractional blood volume must satisfy 0 <= vb < 1");
    }
}

void TacTable::validate() const {
    if (time_grid.empty()) {
        throw ValidationError("tac table needs a nonempty time grid");
    }
    double prev = 0.0;
    for (double t : time_grid) {
        if (!finite(t) || t <= prev) {
            throw ValidationError("time grid must be strictly increasing and positive");
        }
        prev = t;
    }
    std::set<std::string> seen;
    for (const auto& curve : curves) {
        if (!seen.insert(curve.region_id).second) {
            throw ValidationError("duplicate curve region id: " + curve.region_id);
        }
        if (curve.values.size() != time_grid.size()) {
            throw ValidationError("curve length mismatch for region " + curve.region_id);
        }
        for (double v : curve.values) {
            if (!finite(v)) throw ValidationError("curve values must be finite");
        }
    }
    std::set<double> wb_times;
    for (const auto& sample : wb_samples) {
        if (!finite(sample.time) || !finite(sample.value)) {
            throw ValidationError("whole-blood samples must be finite");
        }
        if (!wb_times.insert(sample.time).second) {
            throw ValidationError("whole-blood sample times must be pairwise distinct");
        }
        if (sample.value == 0.0) {
            throw ValidationError("whole-blood sample values must be nonzero");
        }
    }
}

const TacCurve* TacTable::find_curve(const std::string& region_id) const {
    for (const auto& curve : curves) {
        if (curve.region_id == region_id) return &curve;
    }
    return nullptr;
}

double eval_ct_closed_form(const KineticParams& params, const PolyexpInput& input, double t) {
    const Alphas alphas = compute_alphas(params);
    const detail::CtKernel kernel(params.K1, params.k2, alphas.alpha1, alphas.alpha2);
    const auto& terms = input.terms();
    const int p = static_cast<int>(terms.size());
    std::vector<double> mu(p), lambda(p);
    for (int j = 0; j < p; ++j) {
        mu[j] = terms[j].mu;
        lambda[j] = terms[j].lambda;
    }
    return kernel.eval(mu.data(), lambda.data(), p, t);
}

double eval_ct_convolution(const KineticParams& params, const std::function<double(double)>& cp,
                           double t, double quad_tol) {
    const Alphas alphas = compute_alphas(params);
    if (t == 0.0) return 0.0;
    if (!(t > 0.0)) throw ValidationError("evaluation time must be >= 0");
    const auto weighted = [&](double alpha) {
        return detail::integrate_adaptive(
            [&](double s) { return std::exp(alpha * (t - s)) * cp(s); }, 0.0, t, quad_tol);
    };
    const double i1 = weighted(alphas.alpha1);
    const double i2 = weighted(alphas.alpha2);
    return params.K1 / (alphas.alpha2 - alphas.alpha1) *
           ((alphas.alpha2 + params.k2) * i1 - (alphas.alpha1 + params.k2) * i2);
}

double eval_cpet(double ct, double cwb, const MixingModel& mixing) {
    return (1.0 - mixing.vb) * ct + mixing.vb * cwb;
}

TacTable simulate_tacs(const Configuration& config, const std::vector<double>& grid,
                       const std::optional<MixingModel>& mixing,
                       const std::optional<std::vector<double>>& cwb) {
    TacTable table;
    table.time_grid = grid;
    if (mixing.has_value()) {
        if (!cwb.has_value()) {
            throw MissingWholeBlood("mixing model given without whole-blood samples");
        }
        if (cwb->size() != grid.size()) {
            throw MissingWholeBlood("whole-blood samples do not cover the time grid");
        }
    }
    for (const auto& region : config.regions()) {
        TacCurve curve;
        curve.region_id = region.id;
        curve.values.reserve(grid.size());
        try {
            for (std::size_t l = 0; l < grid.size(); ++l) {
                double value = eval_ct_closed_form(region.params, config.input(), grid[l]);
                if (mixing.has_value()) {
                    value = eval_cpet(value, (*cwb)[l], *mixing);
                }
                curve.values.push_back(value);
            }
        } catch (const DegenerateParams& e) {
            throw DegenerateParams("region " + region.id + ": " + e.what());
        }
        table.curves.push_back(std::move(curve));
    }
    if (mixing.has_value()) {
        table.wb_samples.reserve(grid.size());
        for (std::size_t l = 0; l < grid.size(); ++l) {
            table.wb_samples.push_back({grid[l], (*cwb)[l]});
        }
    }
    table.validate();
    return table;
}

}  // namespace revkin
