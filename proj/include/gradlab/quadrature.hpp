#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

#include "gradlab/errors.hpp"

namespace gradlab {

struct QuadratureResult {
    double value = 0.0;
    double error_bound = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

struct SimpsonState {
    const std::function<double(double)>& f;
    double tol;
    std::size_t max_evals;
    std::size_t evals = 0;
    double accumulated = 0.0;

    double eval(double x) {
        ++evals;
        const double v = f(x);
        if (std::isnan(v)) throw numeric_error("quadrature: integrand returned NaN");
        return v;
    }

    // Classic adaptive Simpson with Richardson extrapolation; the 15x factor
    // comes from the O(h^4) error model of the composite rule.
    double recurse(double a, double b, double fa, double fm, double fb, double whole,
                   double tol_here, int depth, double& err_out) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = eval(lm);
        const double frm = eval(rm);
        const double h6 = (b - a) / 12.0;
        const double left = h6 * (fa + 4.0 * flm + fm);
        const double right = h6 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;

        if (depth <= 0 || evals > max_evals) {
            const double best = accumulated + left + right + delta / 15.0;
            throw quadrature_error("quadrature: subdivision budget exhausted", best,
                                   std::fabs(delta));
        }
        if (std::fabs(delta) <= 15.0 * tol_here) {
            err_out += std::fabs(delta) / 15.0;
            const double piece = left + right + delta / 15.0;
            accumulated += piece;
            return piece;
        }
        double result = recurse(a, m, fa, flm, fm, left, 0.5 * tol_here, depth - 1, err_out);
        result += recurse(m, b, fm, frm, fb, right, 0.5 * tol_here, depth - 1, err_out);
        return result;
    }
};

}  // namespace detail

// Adaptive Simpson on [a,b] with estimated absolute error <= tol.
inline QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                                  double tol, int max_depth = 52,
                                  std::size_t max_evals = (1u << 22)) {
    if (!(a < b)) throw config_error("quadrature: requires a < b");
    if (!(tol > 0.0)) throw config_error("quadrature: tolerance must be positive");

    detail::SimpsonState st{f, tol, max_evals};
    const double fa = st.eval(a);
    const double m = 0.5 * (a + b);
    const double fm = st.eval(m);
    const double fb = st.eval(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    QuadratureResult res;
    res.value = st.recurse(a, b, fa, fm, fb, whole, tol, max_depth, res.error_bound);
    res.evaluations = st.evals;
    return res;
}

}  // namespace gradlab
