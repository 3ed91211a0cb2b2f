#pragma once

// Adaptive Gauss-Kronrod (7,15) quadrature. Intervals are split worst-first
// until the summed error estimate meets an absolute+relative target or the
// panel budget runs out.

#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "revkin/errors.hpp"

namespace revkin::detail {

struct GkPanel {
    double a = 0.0;
    double b = 0.0;
    double integral = 0.0;
    double error = 0.0;

    bool operator<(const GkPanel& other) const { return error < other.error; }
};

inline GkPanel gk15(const std::function<double(double)>& f, double a, double b) {
    // Kronrod-15 abscissae (positive half) and weights; odd indices are the
    // embedded Gauss-7 nodes.
    static const double xgk[8] = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static const double wgk[8] = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static const double wg[4] = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double result_kronrod = fc * wgk[7];
    double result_gauss = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        result_kronrod += wgk[j] * fsum;
        if (j % 2 == 1) result_gauss += wg[j / 2] * fsum;
    }
    GkPanel panel;
    panel.a = a;
    panel.b = b;
    panel.integral = result_kronrod * half;
    panel.error = std::fabs((result_kronrod - result_gauss) * half);
    return panel;
}

/// Integrates f over [a, b] until the summed panel error is below
/// tol * max(1, |integral|). Throws QuadratureFailure when the budget of
/// panel refinements is exhausted first.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol, int max_panels = 4000) {
    if (a == b) return 0.0;
    std::priority_queue<GkPanel> queue;
    GkPanel whole = gk15(f, a, b);
    double total = whole.integral;
    double total_err = whole.error;
    queue.push(whole);
    int panels = 1;
    while (total_err > tol * std::max(1.0, std::fabs(total))) {
        if (panels >= max_panels) {
            throw QuadratureFailure("quadrature budget exhausted: error " +
                                    std::to_string(total_err) + " above tolerance after " +
                                    std::to_string(panels) + " panels");
        }
        GkPanel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            throw QuadratureFailure(
                "quadrature stalled: interval at floating-point resolution with error " +
                std::to_string(worst.error));
        }
        const GkPanel left = gk15(f, worst.a, mid);
        const GkPanel right = gk15(f, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++panels;
    }
    return total;
}

}  // namespace revkin::detail
