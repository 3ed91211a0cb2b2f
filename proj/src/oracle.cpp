#include "revkin/oracle.hpp"

#include <cmath>

namespace revkin {

namespace {

struct State {
    double cf = 0.0;
    double cb = 0.0;
};

struct Rhs {
    double K1, k23, k3, k4;
    const InputFn& cp;

    State operator()(double t, const State& y) const {
        return {K1 * cp(t) - k23 * y.cf + k4 * y.cb, k3 * y.cf - k4 * y.cb};
    }
};

State rk4_step(const Rhs& rhs, double t, const State& y, double h) {
    const State k1 = rhs(t, y);
    const State k2 = rhs(t + 0.5 * h, {y.cf + 0.5 * h * k1.cf, y.cb + 0.5 * h * k1.cb});
    const State k3 = rhs(t + 0.5 * h, {y.cf + 0.5 * h * k2.cf, y.cb + 0.5 * h * k2.cb});
    const State k4 = rhs(t + h, {y.cf + h * k3.cf, y.cb + h * k3.cb});
    return {y.cf + h / 6.0 * (k1.cf + 2.0 * k2.cf + 2.0 * k3.cf + k4.cf),
            y.cb + h / 6.0 * (k1.cb + 2.0 * k2.cb + 2.0 * k3.cb + k4.cb)};
}

void check_finite(const State& y, double t) {
    if (!std::isfinite(y.cf) || !std::isfinite(y.cb)) {
        throw NonFiniteState("integration state became non-finite near t = " + std::to_string(t));
    }
}

}  // namespace

Trajectory integrate_system(const KineticParams& params, const InputFn& cp, double t_end,
                            double step) {
    params.validate();
    if (!(t_end > 0.0) || !(step > 0.0) || step > t_end) {
        throw ValidationError("need 0 < step <= t_end");
    }
    const Rhs rhs{params.K1, params.k2 + params.k3, params.k3, params.k4, cp};
    Trajectory out;
    out.times.push_back(0.0);
    out.cf.push_back(0.0);
    out.cb.push_back(0.0);
    State y;
    double t = 0.0;
    while (t < t_end) {
        const double h = std::min(step, t_end - t);
        y = rk4_step(rhs, t, y, h);
        t += h;
        check_finite(y, t);
        out.times.push_back(t);
        out.cf.push_back(y.cf);
        out.cb.push_back(y.cb);
        if (h < step) break;  // landed on t_end with a shortened final step
    }
    return out;
}

std::vector<double> integrate_at(const KineticParams& params, const InputFn& cp,
                                 const std::vector<double>& grid, double step) {
    params.validate();
    if (!(step > 0.0)) throw ValidationError("step must be positive");
    double prev = 0.0;
    for (double t : grid) {
        if (!(t > prev)) throw ValidationError("grid must be strictly increasing and positive");
        prev = t;
    }
    const Rhs rhs{params.K1, params.k2 + params.k3, params.k3, params.k4, cp};
    std::vector<double> out;
    out.reserve(grid.size());
    State y;
    double t = 0.0;
    for (double target : grid) {
        const double span = target - t;
        const long nsub = std::max(1L, static_cast<long>(std::ceil(span / step)));
        const double h = span / static_cast<double>(nsub);
        for (long i = 0; i < nsub; ++i) {
            y = rk4_step(rhs, t, y, h);
            t += h;
        }
        t = target;  // kill accumulated rounding drift
        check_finite(y, t);
        out.push_back(y.cf + y.cb);
    }
    return out;
}

}  // namespace revkin
