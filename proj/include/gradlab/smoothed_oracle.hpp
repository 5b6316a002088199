#pragma once

#include <cmath>
#include <optional>

#include "gradlab/model.hpp"
#include "gradlab/quadrature.hpp"
#include "gradlab/tensor.hpp"

namespace gradlab {

// Ground truth for the Monte Carlo smoothers in one dimension: the smoothed
// gradient is the convolution of G with the Gaussian kernel,
//     integral of G(x+e) * pdf(e; sigma) de,
// taken over [x_min - x, x_max - x] when a range is given (the bounded
// variant, without renormalising the kernel) or over +-8 sigma otherwise
// (tail mass < 1e-15, below every tolerance used here).
inline double smoothed_gradient_oracle(const Model& model1d, double x, double sigma,
                                       const std::optional<DataRange>& range,
                                       double tol = 1e-9) {
    if (model1d.input_dim != 1)
        throw shape_error("smoothed gradient oracle: model must be one-dimensional");
    if (!(sigma >= 0.0)) throw config_error("smoothed gradient oracle: sigma must be >= 0");

    const double point[1] = {x};
    if (sigma == 0.0) return model1d.input_gradient(point, 0)[0];

    const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * 3.141592653589793238462643));
    auto integrand = [&](double eps) {
        const double y[1] = {x + eps};
        const double g = model1d.input_gradient(y, 0)[0];
        const double t = eps / sigma;
        return g * inv_norm * std::exp(-0.5 * t * t);
    };

    double lo, hi;
    if (range) {
        lo = range->x_min - x;
        hi = range->x_max - x;
    } else {
        lo = -8.0 * sigma;
        hi = 8.0 * sigma;
    }
    return integrate(integrand, lo, hi, tol).value;
}

}  // namespace gradlab
