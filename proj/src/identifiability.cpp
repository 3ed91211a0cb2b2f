#include "revkin/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "detail/ct_eval.hpp"
#include "detail/rng.hpp"

namespace revkin {

namespace {

// Distinctness with a relative scale guard: values are "separated" when
// |x - y| > tol * max(1, |x|, |y|).
bool separated(double x, double y, double tol) {
    return std::fabs(x - y) > tol * std::max({1.0, std::fabs(x), std::fabs(y)});
}

struct RegionSpectral {
    std::string id;
    double k34 = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
};

std::vector<RegionSpectral> spectral_table(const Configuration& config) {
    std::vector<RegionSpectral> out;
    out.reserve(config.regions().size());
    for (const auto& region : config.regions()) {
        const Alphas alphas = compute_alphas(region.params);
        out.push_back({region.id, region.params.k3 + region.params.k4, alphas.alpha1,
                       alphas.alpha2});
    }
    return out;
}

// Number of clusters when values closer than the guarded tolerance are
// considered equal.
int distinct_count(std::vector<double> values, double tol) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    int count = 1;
    double rep = values.front();
    for (double v : values) {
        if (separated(rep, v, tol)) {
            ++count;
            rep = v;
        }
    }
    return count;
}

// sum over {j : mu_j not snapped to alpha} of lambda_j / (mu_j - alpha),
// plus the magnitude scale of its terms for the nonzeroness guard.
std::pair<double, double> eigen_weight_sum(const PolyexpInput& input, double alpha) {
    double sum = 0.0;
    double scale = 0.0;
    for (const auto& term : input.terms()) {
        if (detail::resonant_with(term.mu, alpha)) continue;
        const double contrib = term.lambda / (term.mu - alpha);
        sum += contrib;
        scale += std::fabs(contrib);
    }
    return {sum, scale};
}

}  // namespace

RichnessReport check_assumption_A(const Configuration& config, double tol) {
    const std::vector<RegionSpectral> spec = spectral_table(config);
    const int n = static_cast<int>(spec.size());
    RichnessReport report;

    {
        std::vector<double> k34s, alphas;
        for (const auto& r : spec) {
            k34s.push_back(r.k34);
            alphas.push_back(r.alpha1);
            alphas.push_back(r.alpha2);
        }
        report.distinct_k34_count = distinct_count(k34s, tol);
        report.distinct_alpha_count = distinct_count(alphas, tol);
    }

    const auto& terms = config.input().terms();
    bool all_ok = true;
    for (std::size_t j0 = 0; j0 < terms.size(); ++j0) {
        const double mu0 = terms[j0].mu;
        std::vector<std::string> witness_ids;
        for (int i1 = 0; i1 < n && witness_ids.empty(); ++i1) {
            for (int i2 = i1 + 1; i2 < n && witness_ids.empty(); ++i2) {
                for (int i3 = i2 + 1; i3 < n && witness_ids.empty(); ++i3) {
                    const RegionSpectral* triple[3] = {&spec[i1], &spec[i2], &spec[i3]};
                    bool ok = true;
                    for (int s = 0; s < 3 && ok; ++s) {
                        for (int r = s + 1; r < 3 && ok; ++r) {
                            ok = separated(triple[s]->k34, triple[r]->k34, tol) &&
                                 separated(triple[s]->alpha1, triple[r]->alpha1, tol) &&
                                 separated(triple[s]->alpha2, triple[r]->alpha2, tol);
                        }
                    }
                    for (int s = 0; s < 3 && ok; ++s) {
                        ok = separated(mu0 + triple[s]->k34, 0.0, tol);
                    }
                    for (int s = 0; s < 3 && ok; ++s) {
                        for (double alpha : {triple[s]->alpha1, triple[s]->alpha2}) {
                            if (detail::resonant_with(mu0, alpha)) continue;
                            const auto [sum, scale] = eigen_weight_sum(config.input(), alpha);
                            if (!(std::fabs(sum) > tol * std::max(1.0, scale))) {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if (ok) {
                        witness_ids = {triple[0]->id, triple[1]->id, triple[2]->id};
                    }
                }
            }
        }
        std::ostringstream label;
        label << "exponent[" << j0 << "] mu=" << mu0;
        if (!witness_ids.empty()) {
            report.witnesses.push_back({label.str(), witness_ids});
        } else {
            all_ok = false;
            report.violations.push_back("no witness triple for " + label.str());
        }
    }
    report.satisfied = all_ok;
    return report;
}

RichnessReport check_region_richness(const Configuration& config, double tol) {
    const std::vector<RegionSpectral> spec = spectral_table(config);
    const int n = static_cast<int>(spec.size());
    const int p = config.input().degree();
    const int need = p + 3;
    RichnessReport report;

    {
        std::vector<double> k34s, alphas;
        for (const auto& r : spec) {
            k34s.push_back(r.k34);
            alphas.push_back(r.alpha1);
            alphas.push_back(r.alpha2);
        }
        report.distinct_k34_count = distinct_count(k34s, tol);
        report.distinct_alpha_count = distinct_count(alphas, tol);
    }

    if (n < need) {
        std::ostringstream msg;
        msg << "need at least p+3 = " << need << " regions, have " << n;
        report.violations.push_back(msg.str());
        return report;
    }

    // Exhaustive subset search; region counts are small at desk scale.
    std::vector<int> subset(need);
    std::vector<std::string> found;
    std::function<bool(int, int)> search = [&](int next, int chosen) {
        if (chosen == need) {
            std::vector<double> k34s, alphas;
            for (int idx = 0; idx < need; ++idx) {
                const auto& r = spec[subset[idx]];
                k34s.push_back(r.k34);
                alphas.push_back(r.alpha1);
                alphas.push_back(r.alpha2);
            }
            if (distinct_count(k34s, tol) == need && distinct_count(alphas, tol) == 2 * need) {
                for (int idx = 0; idx < need; ++idx) found.push_back(spec[subset[idx]].id);
                return true;
            }
            return false;
        }
        for (int i = next; i <= n - (need - chosen); ++i) {
            subset[chosen] = i;
            if (search(i + 1, chosen + 1)) return true;
        }
        return false;
    };

    if (search(0, 0)) {
        report.satisfied = true;
        report.witnesses.push_back({"regions with distinct k3+k4 and eigenvalues", found});
    } else {
        std::ostringstream msg;
        msg << "no subset of " << need << " regions has " << need << " distinct k3+k4 and "
            << 2 * need << " distinct eigenvalues (" << report.distinct_k34_count
            << " distinct k3+k4, " << report.distinct_alpha_count
            << " distinct eigenvalues overall)";
        report.violations.push_back(msg.str());
    }
    return report;
}

namespace {

double deviation(double x, double y) {
    return std::fabs(x - y) / std::max({1.0, std::fabs(x), std::fabs(y)});
}

// Median that maps exactly to its reciprocal under elementwise inversion of
// positive inputs: middle element for odd counts, geometric mean of the two
// middle elements for even counts.
double ratio_median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    const double lo = values[n / 2 - 1];
    const double hi = values[n / 2];
    if (lo > 0.0 && hi > 0.0) return std::sqrt(lo * hi);
    if (lo < 0.0 && hi < 0.0) return -std::sqrt(lo * hi);
    return 0.5 * (lo + hi);
}

}  // namespace

EquivalenceReport equivalence_up_to_scale(const Configuration& a, const Configuration& b,
                                          double tol) {
    EquivalenceReport report;
    if (a.n_regions() != b.n_regions()) {
        report.diagnostics.push_back("region counts differ");
        return report;
    }
    if (a.input().degree() != b.input().degree()) {
        report.diagnostics.push_back("input degrees differ");
        return report;
    }

    double worst = 0.0;
    bool ok = true;

    // Inputs are held in canonical descending-mu order, so term matching is
    // positional and the reindexing permutation is the identity.
    const int p = a.input().degree();
    std::vector<int> reindex(p);
    for (int j = 0; j < p; ++j) {
        reindex[j] = j;
        const double dev = deviation(a.input().terms()[j].mu, b.input().terms()[j].mu);
        worst = std::max(worst, dev);
        if (dev > tol) {
            std::ostringstream msg;
            msg << "input exponent " << j << " differs: " << a.input().terms()[j].mu << " vs "
                << b.input().terms()[j].mu;
            report.diagnostics.push_back(msg.str());
            ok = false;
        }
    }

    std::vector<double> k1_ratios;
    for (const auto& region_a : a.regions()) {
        const Region* region_b = b.find_region(region_a.id);
        if (region_b == nullptr) {
            report.diagnostics.push_back("region " + region_a.id + " missing from second config");
            report.max_param_deviation = worst;
            return report;
        }
        const double devs[3] = {deviation(region_a.params.k2, region_b->params.k2),
                                deviation(region_a.params.k3, region_b->params.k3),
                                deviation(region_a.params.k4, region_b->params.k4)};
        static const char* names[3] = {"k2", "k3", "k4"};
        for (int i = 0; i < 3; ++i) {
            worst = std::max(worst, devs[i]);
            if (devs[i] > tol) {
                std::ostringstream msg;
                msg << "region " << region_a.id << " " << names[i] << " differs by " << devs[i];
                report.diagnostics.push_back(msg.str());
                ok = false;
            }
        }
        if (region_b->params.K1 != 0.0 && std::isfinite(region_a.params.K1 / region_b->params.K1)) {
            k1_ratios.push_back(region_a.params.K1 / region_b->params.K1);
        }
    }

    if (k1_ratios.empty()) {
        report.diagnostics.push_back("scale indeterminate: no usable K1 ratios");
        report.max_param_deviation = worst;
        return report;
    }
    const double zeta = ratio_median(k1_ratios);
    if (zeta == 0.0 || !std::isfinite(zeta)) {
        report.diagnostics.push_back("scale estimate is zero or non-finite");
        report.max_param_deviation = worst;
        return report;
    }

    // Residual check: K1_a = zeta * K1_b per region, lambda_b = zeta *
    // lambda_a per term.
    for (const auto& region_a : a.regions()) {
        const Region* region_b = b.find_region(region_a.id);
        const double dev = deviation(region_a.params.K1, zeta * region_b->params.K1);
        worst = std::max(worst, dev);
        if (dev > tol) {
            std::ostringstream msg;
            msg << "region " << region_a.id << " K1 off the common scale by " << dev;
            report.diagnostics.push_back(msg.str());
            ok = false;
        }
    }
    for (int j = 0; j < p; ++j) {
        const double dev =
            deviation(b.input().terms()[j].lambda, zeta * a.input().terms()[j].lambda);
        worst = std::max(worst, dev);
        if (dev > tol) {
            std::ostringstream msg;
            msg << "input amplitude " << j << " off the common scale by " << dev;
            report.diagnostics.push_back(msg.str());
            ok = false;
        }
    }

    report.max_param_deviation = worst;
    report.equivalent = ok;
    if (ok) {
        report.zeta = zeta;
        report.reindexing = reindex;
    }
    return report;
}

void SamplerRanges::validate() const {
    auto check_pos = [](const Range& r, const char* name) {
        if (!(r.lo > 0.0) || !(r.hi >= r.lo) || !std::isfinite(r.hi)) {
            throw ValidationError(std::string("sampler bounds for ") + name +
                                  " must be positive with lo <= hi");
        }
    };
    check_pos(K1, "K1");
    check_pos(k2, "k2");
    check_pos(k3, "k3");
    check_pos(k4, "k4");
    check_pos(lambda, "lambda");
    if (!(mu.lo < 0.0) || !(mu.hi < 0.0) || !(mu.lo <= mu.hi)) {
        throw ValidationError("sampler bounds for mu must be negative with lo <= hi");
    }
}

Configuration sample_random_config(std::uint64_t seed, int n, int p,
                                   const SamplerRanges& ranges) {
    if (n < 1 || p < 1) {
        throw ValidationError("need n >= 1 regions and p >= 1 input terms");
    }
    ranges.validate();
    detail::Rng rng(seed);
    const int max_rejections = 1000;
    int rejections = 0;

    std::vector<Region> regions;
    regions.reserve(n);
    for (int i = 0; i < n; ++i) {
        for (;;) {
            KineticParams params;
            params.K1 = rng.log_uniform(ranges.K1.lo, ranges.K1.hi);
            params.k2 = rng.log_uniform(ranges.k2.lo, ranges.k2.hi);
            params.k3 = rng.log_uniform(ranges.k3.lo, ranges.k3.hi);
            params.k4 = rng.log_uniform(ranges.k4.lo, ranges.k4.hi);
            if (params.non_degenerate()) {
                regions.push_back({"r" + std::to_string(i + 1), params});
                break;
            }
            if (++rejections > max_rejections) {
                throw ExhaustedRedraws("too many degenerate parameter draws");
            }
        }
    }

    std::vector<PolyexpTerm> terms;
    terms.reserve(p);
    for (int j = 0; j < p; ++j) {
        for (;;) {
            PolyexpTerm term;
            term.mu = -rng.log_uniform(-ranges.mu.hi, -ranges.mu.lo);
            term.lambda = rng.log_uniform(ranges.lambda.lo, ranges.lambda.hi);
            bool distinct = true;
            for (const auto& other : terms) {
                if (!(std::fabs(other.mu - term.mu) >
                      1e-6 * std::max({1.0, std::fabs(other.mu), std::fabs(term.mu)}))) {
                    distinct = false;
                    break;
                }
            }
            if (distinct) {
                terms.push_back(term);
                break;
            }
            if (++rejections > max_rejections) {
                throw ExhaustedRedraws("too many duplicate input exponents");
            }
        }
    }
    return Configuration(std::move(regions), PolyexpInput(std::move(terms)));
}

}  // namespace revkin
