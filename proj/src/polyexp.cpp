#include "revkin/polyexp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "detail/ct_eval.hpp"
#include "detail/linalg.hpp"

namespace revkin {

namespace {

constexpr double kExponentMergeTol = 1e-9;  // absolute, matches the resonance snap

double poly_eval(const std::vector<double>& coeffs, double t) {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * t + coeffs[k];
    return acc;
}

void add_coeff(std::vector<double>& coeffs, int power, double value) {
    if (static_cast<int>(coeffs.size()) <= power) coeffs.resize(power + 1, 0.0);
    coeffs[power] += value;
}

}  // namespace

double eval_sum(const ExpPolySum& sum, double t) {
    double acc = 0.0;
    for (const auto& term : sum.terms) {
        acc += poly_eval(term.coeffs, t) * std::exp(term.exponent * t);
    }
    return acc;
}

ExpPolySum canonicalize(const ExpPolySum& sum, double coeff_tol) {
    std::vector<ExpPolyTerm> sorted = sum.terms;
    std::sort(sorted.begin(), sorted.end(),
              [](const ExpPolyTerm& a, const ExpPolyTerm& b) { return a.exponent > b.exponent; });

    // Cluster by distance to each cluster's first (largest) exponent, so a
    // second pass finds representatives pairwise separated by more than the
    // merge tolerance and changes nothing.
    std::vector<ExpPolyTerm> merged;
    for (const auto& term : sorted) {
        if (!merged.empty() &&
            std::fabs(term.exponent - merged.back().exponent) <= kExponentMergeTol) {
            auto& into = merged.back().coeffs;
            for (std::size_t k = 0; k < term.coeffs.size(); ++k) {
                add_coeff(into, static_cast<int>(k), term.coeffs[k]);
            }
        } else {
            merged.push_back(term);
        }
    }

    double max_abs = 0.0;
    for (const auto& term : merged) {
        for (double c : term.coeffs) max_abs = std::max(max_abs, std::fabs(c));
    }
    const double drop = coeff_tol * max_abs;

    ExpPolySum out;
    for (auto& term : merged) {
        for (double& c : term.coeffs) {
            if (std::fabs(c) <= drop) c = 0.0;
        }
        while (!term.coeffs.empty() && term.coeffs.back() == 0.0) term.coeffs.pop_back();
        if (!term.coeffs.empty()) out.terms.push_back(std::move(term));
    }
    return out;
}

ExpPolySum expand_configuration(const KineticParams& params, const PolyexpInput& input) {
    const Alphas alphas = compute_alphas(params);
    const double a1 = alphas.alpha1;
    const double a2 = alphas.alpha2;
    const double front = params.K1 / (a2 - a1);
    const double coef_a1 = a2 + params.k2;
    const double coef_a2 = a1 + params.k2;

    ExpPolySum raw;
    double bracket_a1 = 0.0;  // constant coefficient accumulating at exp(a1*t)
    double bracket_a2 = 0.0;
    for (const auto& term : input.terms()) {
        const bool res1 = detail::resonant_with(term.mu, a1);
        const bool res2 = !res1 && detail::resonant_with(term.mu, a2);
        if (res1) {
            // t*exp(a1*t) with coefficient K1*(a2+k2)/(a2-a1)*lambda, plus the
            // surviving exp(a1*t) part from the other eigenvalue branch.
            ExpPolyTerm t1;
            t1.exponent = a1;
            t1.coeffs = {-front * coef_a2 * term.lambda / (a1 - a2), front * coef_a1 * term.lambda};
            raw.terms.push_back(std::move(t1));
            bracket_a2 += term.lambda / (a1 - a2);
        } else if (res2) {
            ExpPolyTerm t2;
            t2.exponent = a2;
            t2.coeffs = {front * coef_a1 * term.lambda / (a2 - a1), -front * coef_a2 * term.lambda};
            raw.terms.push_back(std::move(t2));
            bracket_a1 += term.lambda / (a2 - a1);
        } else {
            // K1*lambda*(mu+k3+k4) / ((mu-a1)(mu-a2)) at exp(mu*t).
            ExpPolyTerm tm;
            tm.exponent = term.mu;
            tm.coeffs = {params.K1 * term.lambda * (term.mu + params.k3 + params.k4) /
                         ((term.mu - a1) * (term.mu - a2))};
            raw.terms.push_back(std::move(tm));
            bracket_a1 += term.lambda / (term.mu - a1);
            bracket_a2 += term.lambda / (term.mu - a2);
        }
    }
    ExpPolyTerm e1;
    e1.exponent = a1;
    e1.coeffs = {-front * coef_a1 * bracket_a1};
    raw.terms.push_back(std::move(e1));
    ExpPolyTerm e2;
    e2.exponent = a2;
    e2.coeffs = {front * coef_a2 * bracket_a2};
    raw.terms.push_back(std::move(e2));
    return canonicalize(raw);
}

bool sample_count_ok(const std::vector<int>& multiplicities, int n_samples) {
    long total = 0;
    for (int m : multiplicities) {
        if (m < 1) return false;
        total += m;
    }
    return 2 * total <= n_samples;
}

ExpPolySum fit_coefficients_given_exponents(const std::vector<std::pair<double, double>>& samples,
                                            const std::vector<double>& exponents,
                                            const std::vector<int>& multiplicities,
                                            double cond_limit) {
    if (exponents.size() != multiplicities.size()) {
        throw ValidationError("exponents and multiplicities must have equal length");
    }
    const int T = static_cast<int>(samples.size());
    if (!sample_count_ok(multiplicities, T)) {
        std::ostringstream msg;
        msg << "sample bound violated: need 2*sum(multiplicities) <= " << T << " samples";
        throw InsufficientSamples(msg.str());
    }
    std::set<double> times;
    for (const auto& [t, s] : samples) {
        (void)s;
        if (!times.insert(t).second) {
            throw ValidationError("sample times must be pairwise distinct");
        }
    }

    int n_cols = 0;
    for (int m : multiplicities) n_cols += m;
    detail::Matrix a(static_cast<std::size_t>(T), static_cast<std::size_t>(n_cols));
    std::vector<double> b(T, 0.0);
    for (int l = 0; l < T; ++l) {
        const double t = samples[l].first;
        b[l] = samples[l].second;
        int col = 0;
        for (std::size_t j = 0; j < exponents.size(); ++j) {
            const double e = std::exp(exponents[j] * t);
            double tk = 1.0;
            for (int k = 0; k < multiplicities[j]; ++k) {
                a.at(l, col++) = tk * e;
                tk *= t;
            }
        }
    }

    const detail::LeastSquaresResult solved = detail::qr_least_squares(a, b);
    if (solved.rank_deficient || solved.condition_estimate > cond_limit) {
        std::ostringstream msg;
        msg << "basis matrix condition estimate " << solved.condition_estimate
            << " exceeds limit " << cond_limit << " (clustered exponents?)";
        throw IllConditioned(msg.str());
    }

    ExpPolySum out;
    int col = 0;
    for (std::size_t j = 0; j < exponents.size(); ++j) {
        ExpPolyTerm term;
        term.exponent = exponents[j];
        term.coeffs.assign(solved.x.begin() + col, solved.x.begin() + col + multiplicities[j]);
        col += multiplicities[j];
        out.terms.push_back(std::move(term));
    }
    // Keep every requested basis term, including near-zero ones: callers
    // inspect spurious coefficients directly. Sort for a stable order.
    std::sort(out.terms.begin(), out.terms.end(),
              [](const ExpPolyTerm& x, const ExpPolyTerm& y) { return x.exponent > y.exponent; });
    return out;
}

AttenuationBiexp::AttenuationBiexp(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
        throw ValidationError("attenuation parameters must be finite");
    }
    if (b == c) {
        throw ValidationError("attenuation rates must differ");
    }
}

double eval_attenuation(const AttenuationBiexp& f, double t) {
    return f.a * std::exp(f.b * t) + (1.0 - f.a) * std::exp(f.c * t);
}

}  // namespace revkin
