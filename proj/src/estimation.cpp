#include "revkin/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

#include "detail/ct_eval.hpp"
#include "detail/linalg.hpp"
#include "detail/rng.hpp"

namespace revkin {

namespace {

constexpr double kThetaClamp = 50.0;   // exp argument bound inside the model
constexpr double kStepClamp = 5.0;     // per-iteration step bound (log scale)
constexpr double kFdStep = 1e-6;       // central-difference step in theta
constexpr double kK3BoundaryFlag = 1e-8;

double clamped_exp(double x) { return std::exp(std::clamp(x, -kThetaClamp, kThetaClamp)); }

/// Joint fitting problem: all region rates plus the shared input, in an
/// unconstrained parametrization. Layout of theta:
///   [4 per region: ln K1, ln k2, ln k3, ln k4] then [p: ln(-mu_j)] then
///   [p-1: lambda_j for j >= 1]  (lambda_0 pinned to 1 by the gauge).
struct JointProblem {
    std::vector<std::string> region_ids;
    std::vector<double> times;
    std::vector<double> y;  // row-major by region
    int n = 0;
    int T = 0;
    int p = 0;
    double sum_y2 = 0.0;

    int dim() const { return 4 * n + 2 * p - 1; }
    int n_residuals() const { return n * T; }

    void residuals(const std::vector<double>& theta, std::vector<double>& r) const {
        std::vector<double> mu(p), lambda(p);
        for (int j = 0; j < p; ++j) mu[j] = -clamped_exp(theta[4 * n + j]);
        lambda[0] = 1.0;
        for (int j = 1; j < p; ++j) lambda[j] = theta[4 * n + p + j - 1];
        for (int i = 0; i < n; ++i) {
            const double K1 = clamped_exp(theta[4 * i + 0]);
            const double k2 = clamped_exp(theta[4 * i + 1]);
            const double k3 = clamped_exp(theta[4 * i + 2]);
            const double k4 = clamped_exp(theta[4 * i + 3]);
            // Positive k3 keeps the discriminant strictly positive, so the
            // roots can be taken directly.
            const double b = k2 + k3 + k4;
            const double disc = b * b - 4.0 * k2 * k4;
            const double alpha2 = -0.5 * (b + std::sqrt(std::max(disc, 0.0)));
            const double alpha1 = (k2 * k4) / alpha2;
            const detail::CtKernel kernel(K1, k2, alpha1, alpha2);
            for (int l = 0; l < T; ++l) {
                r[i * T + l] = kernel.eval(mu.data(), lambda.data(), p, times[l]) - y[i * T + l];
            }
        }
    }

    double sse_of(const std::vector<double>& r) const {
        double acc = 0.0;
        for (double v : r) acc += v * v;
        return acc;
    }
};

struct StartOutcome {
    std::vector<double> theta;
    double sse = std::numeric_limits<double>::infinity();
    int iterations = 0;
    std::vector<std::pair<int, double>> trace;  // (iter, sse)
};

/// Damped Gauss-Newton with central finite-difference Jacobian.
StartOutcome run_start(const JointProblem& problem, std::vector<double> theta,
                       const FitOptions& options) {
    const int m = problem.n_residuals();
    const int q = problem.dim();
    std::vector<double> r(m), r_trial(m), r_plus(m), r_minus(m);
    problem.residuals(theta, r);
    double sse = problem.sse_of(r);

    StartOutcome out;
    out.trace.emplace_back(0, sse);

    // Gain-ratio damping control: lambda shrinks by up to 3x when steps
    // predict the reduction well, so near a zero-residual minimum the
    // iteration turns into plain Gauss-Newton.
    double damping = 1e-3;
    double reject_growth = 2.0;
    int stagnant = 0;
    detail::Matrix jac(m, q);
    detail::Matrix hess(q, q);
    std::vector<double> grad(q), delta(q), theta_trial(q), probe(q);

    for (int iter = 1; iter <= options.max_iters; ++iter) {
        for (int k = 0; k < q; ++k) {
            const double h = kFdStep * std::max(1.0, std::fabs(theta[k]));
            probe = theta;
            probe[k] = theta[k] + h;
            problem.residuals(probe, r_plus);
            probe[k] = theta[k] - h;
            problem.residuals(probe, r_minus);
            const double inv = 1.0 / (2.0 * h);
            for (int i = 0; i < m; ++i) jac.at(i, k) = (r_plus[i] - r_minus[i]) * inv;
        }
        for (int a = 0; a < q; ++a) {
            grad[a] = 0.0;
            for (int i = 0; i < m; ++i) grad[a] += jac.at(i, a) * r[i];
            for (int b = 0; b <= a; ++b) {
                double s = 0.0;
                for (int i = 0; i < m; ++i) s += jac.at(i, a) * jac.at(i, b);
                hess.at(a, b) = s;
                hess.at(b, a) = s;
            }
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            std::vector<double> neg_grad(q);
            for (int a = 0; a < q; ++a) neg_grad[a] = -grad[a];
            if (!detail::solve_damped_spd(hess, neg_grad, damping, delta)) {
                damping = std::max(damping, 1e-12) * reject_growth;
                reject_growth *= 2.0;
                continue;
            }
            double step_norm = 0.0;
            for (double d : delta) step_norm = std::max(step_norm, std::fabs(d));
            if (step_norm > kStepClamp) {
                const double scale = kStepClamp / step_norm;
                for (double& d : delta) d *= scale;
            }
            for (int a = 0; a < q; ++a) theta_trial[a] = theta[a] + delta[a];
            problem.residuals(theta_trial, r_trial);
            const double sse_trial = problem.sse_of(r_trial);
            if (sse_trial < sse) {
                const double improvement = sse - sse_trial;
                // Predicted reduction of the damped quadratic model.
                double predicted = 0.0;
                for (int a = 0; a < q; ++a) {
                    predicted += delta[a] * (damping * hess.at(a, a) * delta[a] - grad[a]);
                }
                predicted = std::max(0.5 * predicted, 1e-300);
                const double rho = improvement / predicted;
                const double shrink = 1.0 - std::pow(2.0 * rho - 1.0, 3);
                damping *= std::max(1.0 / 3.0, std::min(shrink, 1.0));
                damping = std::max(damping, 1e-16);
                reject_growth = 2.0;
                theta.swap(theta_trial);
                r.swap(r_trial);
                sse = sse_trial;
                accepted = true;
                out.iterations = iter;
                out.trace.emplace_back(iter, sse);
                double theta_norm = 0.0;
                for (double v : theta) theta_norm = std::max(theta_norm, std::fabs(v));
                if (step_norm <= options.param_tol * (1.0 + theta_norm)) {
                    stagnant = 100;  // converged in parameters
                } else if (improvement <= 1e-14 * sse) {
                    ++stagnant;
                } else {
                    stagnant = 0;
                }
                break;
            }
            damping = std::max(damping, 1e-12) * reject_growth;
            reject_growth *= 2.0;
        }
        if (!accepted || stagnant >= 3) break;
    }

    out.theta = std::move(theta);
    out.sse = sse;
    return out;
}

std::vector<double> theta_from_config(const Configuration& config,
                                      const std::vector<std::string>& region_ids, int p) {
    if (config.input().degree() != p) {
        throw ValidationError("start configuration input degree does not match options.p");
    }
    const double lambda0 = config.input().terms().front().lambda;
    if (!(lambda0 > 0.0)) {
        throw ValidationError(
            "start configuration needs a positive leading amplitude under the lambda-first gauge");
    }
    const int n = static_cast<int>(region_ids.size());
    std::vector<double> theta(4 * n + 2 * p - 1, 0.0);
    for (int i = 0; i < n; ++i) {
        const Region* region = config.find_region(region_ids[i]);
        if (region == nullptr) {
            throw ValidationError("start configuration misses region " + region_ids[i]);
        }
        // Absorb the gauge factor into K1 so the scaled input has lambda_0=1.
        const double k1_gauged = region->params.K1 * lambda0;
        if (!(k1_gauged > 0.0) || !(region->params.k2 > 0.0) || !(region->params.k3 > 0.0) ||
            !(region->params.k4 > 0.0)) {
            throw ValidationError("start configuration rates must be strictly positive");
        }
        theta[4 * i + 0] = std::log(k1_gauged);
        theta[4 * i + 1] = std::log(region->params.k2);
        theta[4 * i + 2] = std::log(region->params.k3);
        theta[4 * i + 3] = std::log(region->params.k4);
    }
    const auto& terms = config.input().terms();
    for (int j = 0; j < p; ++j) {
        if (!(terms[j].mu < 0.0)) {
            throw ValidationError("joint fitting keeps input exponents negative (mu = -exp)");
        }
        theta[4 * n + j] = std::log(-terms[j].mu);
    }
    for (int j = 1; j < p; ++j) theta[4 * n + p + j - 1] = terms[j].lambda / lambda0;
    return theta;
}

Configuration config_from_theta(const JointProblem& problem, const std::vector<double>& theta) {
    std::vector<Region> regions;
    regions.reserve(problem.n);
    for (int i = 0; i < problem.n; ++i) {
        KineticParams params;
        params.K1 = clamped_exp(theta[4 * i + 0]);
        params.k2 = clamped_exp(theta[4 * i + 1]);
        params.k3 = clamped_exp(theta[4 * i + 2]);
        params.k4 = clamped_exp(theta[4 * i + 3]);
        regions.push_back({problem.region_ids[i], params});
    }
    std::vector<PolyexpTerm> terms(problem.p);
    for (int j = 0; j < problem.p; ++j) {
        terms[j].mu = -clamped_exp(theta[4 * problem.n + j]);
        terms[j].lambda = (j == 0) ? 1.0 : theta[4 * problem.n + problem.p + j - 1];
    }
    PolyexpInput input(std::move(terms));  // sorts to canonical descending order

    // Exponent order may have changed during optimization; re-pin the gauge
    // to the new first term when its amplitude is positive.
    const double lambda0 = input.terms().front().lambda;
    if (lambda0 > 0.0 && lambda0 != 1.0) {
        std::vector<PolyexpTerm> regauged = input.terms();
        for (auto& term : regauged) term.lambda /= lambda0;
        for (auto& region : regions) region.params.K1 *= lambda0;
        input = PolyexpInput(std::move(regauged));
    }
    return Configuration(std::move(regions), std::move(input));
}

int thread_budget(int n_tasks) {
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("REVKIN_THREADS")) {
        const int requested = std::atoi(env);
        if (requested >= 1) threads = requested;
    }
    threads = std::max(threads, 1);
    return std::min(threads, n_tasks);
}

}  // namespace

void FitOptions::validate() const {
    if (p < 1) throw ValidationError("options.p must be >= 1");
    if (n_starts < 1) throw ValidationError("options.n_starts must be >= 1");
    if (max_iters < 1) throw ValidationError("options.max_iters must be >= 1");
    if (!(residual_tol >= 0.0) || !(param_tol >= 0.0)) {
        throw ValidationError("tolerances must be non-negative");
    }
    start_ranges.validate();
}

double residual_sse(const Configuration& config, const TacTable& tacs) {
    tacs.validate();
    double acc = 0.0;
    for (const auto& curve : tacs.curves) {
        const Region* region = config.find_region(curve.region_id);
        if (region == nullptr) {
            throw ValidationError("tac table region " + curve.region_id +
                                  " is not part of the configuration");
        }
        for (std::size_t l = 0; l < tacs.time_grid.size(); ++l) {
            const double model =
                eval_ct_closed_form(region->params, config.input(), tacs.time_grid[l]);
            const double d = model - curve.values[l];
            acc += d * d;
        }
    }
    return acc;
}

FitResult fit_joint(const TacTable& tacs, const FitOptions& options,
                    const std::vector<Configuration>& warm_starts) {
    options.validate();
    tacs.validate();
    if (tacs.curves.empty()) throw ValidationError("tac table has no curves");

    JointProblem problem;
    problem.T = tacs.n_times();
    problem.n = static_cast<int>(tacs.curves.size());
    problem.p = options.p;
    const int min_samples = 2 * (options.p + 4);
    if (problem.T < min_samples) {
        std::ostringstream msg;
        msg << "need at least 2*(p+4) = " << min_samples << " time points, have " << problem.T;
        throw InsufficientSamples(msg.str());
    }
    problem.times = tacs.time_grid;
    problem.y.resize(problem.n * problem.T);
    for (int i = 0; i < problem.n; ++i) {
        problem.region_ids.push_back(tacs.curves[i].region_id);
        for (int l = 0; l < problem.T; ++l) {
            problem.y[i * problem.T + l] = tacs.curves[i].values[l];
            problem.sum_y2 += tacs.curves[i].values[l] * tacs.curves[i].values[l];
        }
    }

    // All-zero data admits the exact K1 = 0 family; the scale gauge carries
    // no information there.
    if (problem.sum_y2 == 0.0) {
        Configuration base = warm_starts.empty()
                                 ? sample_random_config(options.seed, problem.n, options.p,
                                                        options.start_ranges)
                                 : warm_starts.front();
        std::vector<Region> regions;
        for (int i = 0; i < problem.n; ++i) {
            const Region* src = base.find_region(problem.region_ids[i]);
            KineticParams params = (src != nullptr)
                                       ? src->params
                                       : base.regions()[i % base.regions().size()].params;
            params.K1 = 0.0;
            regions.push_back({problem.region_ids[i], params});
        }
        std::vector<PolyexpTerm> terms = base.input().terms();
        const double lambda0 = terms.front().lambda;
        for (auto& term : terms) term.lambda /= lambda0;
        FitResult result{Configuration(std::move(regions), PolyexpInput(std::move(terms))),
                         0.0,
                         true,
                         0,
                         0,
                         {"gauge_indeterminate"},
                         {},
                         {}};
        result.trace.push_back({0, 0, 0.0});
        result.start_sse.push_back(0.0);
        return result;
    }

    // The model is linear in each K1 (per region) and jointly linear in the
    // free amplitudes, so a drawn start improves for free by a few rounds of
    // alternating least squares over those blocks before the nonlinear
    // iterations begin. Only the rates and exponents stay where the sampler
    // put them.
    const auto als_warmup = [&problem](std::vector<double>& theta, int rounds) {
        const int n = problem.n;
        const int T = problem.T;
        const int p = problem.p;
        std::vector<double> mu(p);
        for (int j = 0; j < p; ++j) mu[j] = -clamped_exp(theta[4 * n + j]);
        // Unit term curves c[i][j][l]: region i's response to amplitude 1 on
        // term j with K1 = 1.
        std::vector<double> curves(static_cast<std::size_t>(n) * p * T);
        for (int i = 0; i < n; ++i) {
            const double k2 = clamped_exp(theta[4 * i + 1]);
            const double k3 = clamped_exp(theta[4 * i + 2]);
            const double k4 = clamped_exp(theta[4 * i + 3]);
            const double b = k2 + k3 + k4;
            const double alpha2 = -0.5 * (b + std::sqrt(std::max(b * b - 4.0 * k2 * k4, 0.0)));
            const double alpha1 = (k2 * k4) / alpha2;
            const detail::CtKernel kernel(1.0, k2, alpha1, alpha2);
            for (int j = 0; j < p; ++j) {
                const double one = 1.0;
                for (int l = 0; l < T; ++l) {
                    curves[(static_cast<std::size_t>(i) * p + j) * T + l] =
                        kernel.eval(&mu[j], &one, 1, problem.times[l]);
                }
            }
        }
        const auto curve_at = [&](int i, int j, int l) {
            return curves[(static_cast<std::size_t>(i) * p + j) * T + l];
        };
        for (int round = 0; round < rounds; ++round) {
            // K1 step: one-dimensional projection per region.
            for (int i = 0; i < n; ++i) {
                double num = 0.0;
                double den = 0.0;
                for (int l = 0; l < T; ++l) {
                    double m = curve_at(i, 0, l);
                    for (int j = 1; j < p; ++j) {
                        m += theta[4 * n + p + j - 1] * curve_at(i, j, l);
                    }
                    num += m * problem.y[i * T + l];
                    den += m * m;
                }
                if (den > 0.0 && num > 0.0) {
                    theta[4 * i] = std::clamp(std::log(num / den), -kThetaClamp, kThetaClamp);
                }
            }
            if (p < 2) continue;
            // Amplitude step: joint least squares over the p-1 free lambdas.
            detail::Matrix a(static_cast<std::size_t>(n) * T, p - 1);
            std::vector<double> rhs(static_cast<std::size_t>(n) * T);
            for (int i = 0; i < n; ++i) {
                const double k1 = clamped_exp(theta[4 * i]);
                for (int l = 0; l < T; ++l) {
                    for (int j = 1; j < p; ++j) {
                        a.at(i * T + l, j - 1) = k1 * curve_at(i, j, l);
                    }
                    rhs[i * T + l] = problem.y[i * T + l] - k1 * curve_at(i, 0, l);
                }
            }
            const detail::LeastSquaresResult solved = detail::qr_least_squares(a, rhs);
            if (!solved.rank_deficient) {
                bool finite = true;
                for (double v : solved.x) finite = finite && std::isfinite(v);
                if (finite) {
                    for (int j = 1; j < p; ++j) theta[4 * n + p + j - 1] = solved.x[j - 1];
                }
            }
        }
    };

    // Assemble start points: warm starts first, then seeded random draws.
    std::vector<std::vector<double>> starts;
    for (const auto& warm : warm_starts) {
        starts.push_back(theta_from_config(warm, problem.region_ids, options.p));
    }
    for (int s = 0; s < options.n_starts; ++s) {
        Configuration draw =
            sample_random_config(options.seed + static_cast<std::uint64_t>(s), problem.n,
                                 options.p, options.start_ranges);
        std::vector<Region> renamed;
        for (int i = 0; i < problem.n; ++i) {
            renamed.push_back({problem.region_ids[i], draw.regions()[i].params});
        }
        Configuration start(std::move(renamed), draw.input());
        std::vector<double> theta = theta_from_config(start, problem.region_ids, options.p);
        als_warmup(theta, 3);
        starts.push_back(std::move(theta));
    }

    const int n_starts = static_cast<int>(starts.size());
    std::vector<StartOutcome> outcomes(n_starts);
    const int threads = thread_budget(n_starts);
    if (threads <= 1) {
        for (int s = 0; s < n_starts; ++s) outcomes[s] = run_start(problem, starts[s], options);
    } else {
        std::vector<std::future<StartOutcome>> futures;
        futures.reserve(n_starts);
        for (int s = 0; s < n_starts; ++s) {
            futures.push_back(std::async(std::launch::async, [&problem, &starts, &options, s] {
                return run_start(problem, starts[s], options);
            }));
        }
        for (int s = 0; s < n_starts; ++s) outcomes[s] = futures[s].get();
    }

    // Best SSE wins; ties break toward the lower start index.
    std::vector<int> order(n_starts);
    for (int s = 0; s < n_starts; ++s) order[s] = s;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return outcomes[a].sse < outcomes[b].sse; });

    std::vector<std::string> flags;
    std::optional<Configuration> best_config;
    int best_index = -1;
    for (int idx : order) {
        try {
            best_config = config_from_theta(problem, outcomes[idx].theta);
            best_index = idx;
            break;
        } catch (const ValidationError&) {
            // Collapsed exponents; fall through to the next-best start.
        }
    }
    if (!best_config.has_value()) {
        best_index = order.front();
        best_config = config_from_theta(problem, starts[best_index]);
        flags.push_back("construction_failed");
    }

    const StartOutcome& best = outcomes[best_index];
    FitResult result{std::move(*best_config), best.sse, false, best_index, best.iterations,
                     std::move(flags),        {},       {}};
    result.converged = best.sse <= options.residual_tol * problem.sum_y2;
    for (const auto& region : result.config.regions()) {
        if (region.params.k3 <= kK3BoundaryFlag) {
            result.flags.push_back("k3_boundary:" + region.id);
        }
    }
    for (int s = 0; s < n_starts; ++s) {
        for (const auto& [iter, sse] : outcomes[s].trace) {
            result.trace.push_back({s, iter, sse});
        }
        result.start_sse.push_back(outcomes[s].sse);
    }
    return result;
}

ScaleResolution resolve_scale(const FitResult& fit, const std::vector<WbSample>& wb_samples) {
    if (wb_samples.size() < 4) {
        throw ValidationError("scale resolution needs at least 4 whole-blood samples");
    }
    {
        std::vector<double> times;
        for (const auto& sample : wb_samples) {
            if (sample.value == 0.0) {
                throw ValidationError("whole-blood sample values must be nonzero");
            }
            times.push_back(sample.time);
        }
        std::sort(times.begin(), times.end());
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (!(times[i] > times[i - 1])) {
                throw ValidationError("whole-blood sample times must be pairwise distinct");
            }
        }
    }

    const std::size_t m = wb_samples.size();
    std::vector<double> s(m), ratio(m);
    double ratio_scale = 1.0;
    for (std::size_t l = 0; l < m; ++l) {
        s[l] = wb_samples[l].time;
        ratio[l] = eval_cp(fit.config.input(), s[l]) / wb_samples[l].value;
        ratio_scale = std::max(ratio_scale, std::fabs(ratio[l]));
    }

    // x = (zeta, a, b, c); residual G_l = zeta*f(s_l) - ratio_l.
    const auto residual = [&](const std::vector<double>& x, std::vector<double>& g) {
        for (std::size_t l = 0; l < m; ++l) {
            const double f = x[1] * std::exp(x[2] * s[l]) + (1.0 - x[1]) * std::exp(x[3] * s[l]);
            g[l] = x[0] * f - ratio[l];
        }
    };
    const auto jacobian = [&](const std::vector<double>& x, detail::Matrix& j) {
        for (std::size_t l = 0; l < m; ++l) {
            const double eb = std::exp(x[2] * s[l]);
            const double ec = std::exp(x[3] * s[l]);
            j.at(l, 0) = x[1] * eb + (1.0 - x[1]) * ec;
            j.at(l, 1) = x[0] * (eb - ec);
            j.at(l, 2) = x[0] * x[1] * s[l] * eb;
            j.at(l, 3) = x[0] * (1.0 - x[1]) * s[l] * ec;
        }
    };

    static const double rate_grid[6] = {-0.01, -0.03, -0.1, -0.3, -1.0, -3.0};
    static const double weight_grid[3] = {0.2, 0.5, 0.8};
    std::size_t l0 = 0;
    for (std::size_t l = 1; l < m; ++l) {
        if (std::fabs(s[l]) < std::fabs(s[l0])) l0 = l;
    }

    bool any_nonsingular = false;
    std::optional<std::vector<double>> best;
    double best_norm = std::numeric_limits<double>::infinity();
    std::vector<double> g(m), g_trial(m);
    detail::Matrix j(m, 4);
    for (double a0 : weight_grid) {
        for (int bi = 0; bi < 6; ++bi) {
            for (int ci = bi + 1; ci < 6; ++ci) {
                const double f0 = a0 * std::exp(rate_grid[bi] * s[l0]) +
                                  (1.0 - a0) * std::exp(rate_grid[ci] * s[l0]);
                std::vector<double> x = {ratio[l0] / f0, a0, rate_grid[bi], rate_grid[ci]};
                residual(x, g);
                double norm2 = 0.0;
                for (double v : g) norm2 += v * v;
                bool singular = false;
                for (int iter = 0; iter < 80; ++iter) {
                    jacobian(x, j);
                    std::vector<double> neg(m);
                    for (std::size_t l = 0; l < m; ++l) neg[l] = -g[l];
                    const detail::LeastSquaresResult step = detail::qr_least_squares(j, neg);
                    if (step.rank_deficient || step.condition_estimate > 1e14) {
                        singular = true;
                        break;
                    }
                    double alpha = 1.0;
                    bool moved = false;
                    for (int half = 0; half < 24; ++half) {
                        std::vector<double> x_trial = x;
                        for (int kk = 0; kk < 4; ++kk) x_trial[kk] += alpha * step.x[kk];
                        residual(x_trial, g_trial);
                        double norm2_trial = 0.0;
                        for (double v : g_trial) norm2_trial += v * v;
                        if (norm2_trial < norm2) {
                            x = std::move(x_trial);
                            g = g_trial;
                            norm2 = norm2_trial;
                            moved = true;
                            break;
                        }
                        alpha *= 0.5;
                    }
                    if (!moved) break;
                }
                if (!singular) any_nonsingular = true;
                double gmax = 0.0;
                for (double v : g) gmax = std::max(gmax, std::fabs(v));
                if (!singular && gmax <= 1e-12 * ratio_scale && gmax < best_norm &&
                    x[2] != x[3]) {
                    best = x;
                    best_norm = gmax;
                }
            }
        }
    }

    if (!best.has_value()) {
        if (!any_nonsingular) {
            throw RankDeficient("whole-blood sample geometry leaves the system singular");
        }
        throw NoSolution("no start of the scale-resolution solve converged");
    }
    double zeta = (*best)[0];
    double a = (*best)[1];
    double b = (*best)[2];
    double c = (*best)[3];
    if (b < c) {  // canonical order: slower decay first
        std::swap(b, c);
        a = 1.0 - a;
    }
    return {zeta, AttenuationBiexp(a, b, c)};
}

UniquenessReport verify_uniqueness(const Configuration& truth, const std::vector<double>& grid,
                                   const FitOptions& options, double equivalence_tol) {
    options.validate();
    const int min_samples = 2 * (options.p + 4);
    if (static_cast<int>(grid.size()) < min_samples) {
        std::ostringstream msg;
        msg << "uniqueness experiment needs at least " << min_samples << " grid points, have "
            << grid.size();
        throw InsufficientSamples(msg.str());
    }

    UniquenessReport report;
    report.n_starts = options.n_starts;

    const RichnessReport richness = check_region_richness(truth);
    if (!richness.satisfied) {
        report.hypothesis_ok = false;
        report.passed = false;
        report.notes.push_back("truth configuration fails the richness precheck; experiment not run");
        for (const auto& violation : richness.violations) report.notes.push_back(violation);
        return report;
    }

    const TacTable tacs = simulate_tacs(truth, grid);
    double sum_y2 = 0.0;
    for (const auto& curve : tacs.curves) {
        for (double v : curve.values) sum_y2 += v * v;
    }
    const double converged_sse = options.residual_tol * sum_y2;

    struct StartSummary {
        double sse = 0.0;
        bool converged = false;
        bool equivalent = false;
        double zeta = 0.0;
        double deviation = 0.0;
        std::string note;
    };

    const auto run_one = [&](int start_index) {
        FitOptions single = options;
        single.n_starts = 1;
        single.seed = options.seed + static_cast<std::uint64_t>(start_index);
        const FitResult fit = fit_joint(tacs, single);
        StartSummary summary;
        summary.sse = fit.sse;
        summary.converged = fit.sse <= converged_sse;
        if (summary.converged) {
            const EquivalenceReport eq =
                equivalence_up_to_scale(truth, fit.config, equivalence_tol);
            summary.equivalent = eq.equivalent;
            summary.deviation = eq.max_param_deviation;
            if (eq.equivalent) {
                summary.zeta = *eq.zeta;
            } else {
                std::ostringstream msg;
                msg << "counterexample candidate: start " << start_index << " reached sse "
                    << fit.sse << " but is not scale-equivalent (max deviation "
                    << eq.max_param_deviation << ")";
                summary.note = msg.str();
            }
        }
        return summary;
    };

    std::vector<StartSummary> summaries(options.n_starts);
    const int threads = thread_budget(options.n_starts);
    if (threads <= 1) {
        for (int start = 0; start < options.n_starts; ++start) summaries[start] = run_one(start);
    } else {
        std::vector<std::future<StartSummary>> futures;
        futures.reserve(options.n_starts);
        for (int start = 0; start < options.n_starts; ++start) {
            futures.push_back(std::async(std::launch::async, run_one, start));
        }
        for (int start = 0; start < options.n_starts; ++start) {
            summaries[start] = futures[start].get();
        }
    }

    for (const auto& summary : summaries) {
        if (!summary.converged) continue;
        ++report.n_converged;
        report.worst_deviation = std::max(report.worst_deviation, summary.deviation);
        if (summary.equivalent) {
            ++report.n_equivalent;
            report.zeta_values.push_back(summary.zeta);
        } else {
            report.notes.push_back(summary.note);
        }
    }
    if (report.n_converged == 0) {
        report.notes.push_back("no start reached the convergence threshold; claim not exercised");
    }
    report.passed = report.hypothesis_ok && report.n_equivalent == report.n_converged;
    return report;
}

TacTable add_gaussian_noise(const TacTable& tacs, double noise_frac, std::uint64_t seed) {
    if (!(noise_frac >= 0.0)) throw ValidationError("noise fraction must be >= 0");
    double peak = 0.0;
    for (const auto& curve : tacs.curves) {
        for (double v : curve.values) peak = std::max(peak, std::fabs(v));
    }
    detail::Rng rng(seed);
    TacTable noisy = tacs;
    const double sigma = noise_frac * peak;
    for (auto& curve : noisy.curves) {
        for (double& v : curve.values) v += sigma * rng.normal();
    }
    return noisy;
}

}  // namespace revkin
