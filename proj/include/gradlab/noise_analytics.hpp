#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradlab/attribution.hpp"
#include "gradlab/errors.hpp"
#include "gradlab/idx.hpp"
#include "gradlab/parallel.hpp"
#include "gradlab/quadrature.hpp"
#include "gradlab/rng.hpp"
#include "gradlab/special.hpp"
#include "gradlab/tensor.hpp"

#include "json.hpp"

namespace gradlab {

// Inherent noise: the probability that a perturbed coordinate x_i + eps
// falls outside [x_min, x_max]. Everything here is the 1-D theory; the
// empirical counters below check it against actual sampling.

struct NoiseMethod {
    enum class Kind { sg, ag } kind = Kind::sg;
    double param = 0.2;  // alpha for sg, confidence for ag

    static NoiseMethod smoothgrad(double alpha) { return {Kind::sg, alpha}; }
    static NoiseMethod adaptgrad(double confidence) { return {Kind::ag, confidence}; }

    const char* name() const { return kind == Kind::sg ? "sg" : "ag"; }
};

// P(x_i + eps outside range), eps ~ N(0, sigma^2). Computed as the sum of
// the two tail masses via erfc, which stays accurate when both tails are
// tiny. sigma = 0 is a point mass: probability 0.
inline double inherent_noise_point(double x, double sigma, const DataRange& range) {
    if (!(sigma >= 0.0)) throw config_error("inherent noise: sigma must be >= 0");
    if (!range.contains(x))
        throw domain_error("inherent noise: x=" + format_double(x) + " outside range");
    if (sigma == 0.0) return 0.0;
    const double inv = 1.0 / (std::sqrt(2.0) * sigma);
    const double upper_tail = 0.5 * special::erfc((range.x_max - x) * inv);
    const double lower_tail = 0.5 * special::erfc((x - range.x_min) * inv);
    return upper_tail + lower_tail;
}

// Closed form for the smoothgrad kernel:
//   A = 1 - erf((x_max-x)/(sqrt2 sigma))/2 + erf((x_min-x)/(sqrt2 sigma))/2,
// sigma = alpha * (x_max - x_min). Algebraically identical to the generic
// tail sum above.
inline double inherent_noise_sg(double x, double alpha, const DataRange& range) {
    if (!(alpha > 0.0)) throw config_error("inherent noise: alpha must be > 0");
    if (!range.contains(x))
        throw domain_error("inherent noise: x=" + format_double(x) + " outside range");
    const double sigma = alpha * range.width();
    const double inv = 1.0 / (std::sqrt(2.0) * sigma);
    return 1.0 - 0.5 * special::erf((range.x_max - x) * inv) +
           0.5 * special::erf((range.x_min - x) * inv);
}

// Inherent noise of the adaptive kernel; 0 on the bounds by the sigma=0
// convention.
inline double inherent_noise_ag(double x, double confidence, const DataRange& range) {
    const double point[1] = {x};
    const std::vector<double> sigma = adaptgrad_sigma(point, range, confidence);
    return inherent_noise_point(x, sigma[0], range);
}

// Expectation of the inherent noise over x_i ~ Uniform[x_min, x_max],
// 1/(x_max-x_min) * integral of A(x_i). The ag integrand has a kink at the
// midpoint, so that case integrates the two halves separately.
inline double expected_inherent_noise(const NoiseMethod& method, const DataRange& range,
                                      double tol = 1e-6) {
    const double w = range.width();
    if (method.kind == NoiseMethod::Kind::sg) {
        auto f = [&](double x) { return inherent_noise_sg(x, method.param, range); };
        return integrate(f, range.x_min, range.x_max, tol * w).value / w;
    }
    auto f = [&](double x) { return inherent_noise_ag(x, method.param, range); };
    const double mid = range.midpoint();
    const double left = integrate(f, range.x_min, mid, 0.5 * tol * w).value;
    const double right = integrate(f, mid, range.x_max, 0.5 * tol * w).value;
    return (left + right) / w;
}

// Mean analytic inherent noise over the actual pixel values of a dataset
// (the histogram-weighted variant of the uniform expectation above).
inline double mean_inherent_noise(const NoiseMethod& method, const Dataset& data,
                                  std::size_t max_images = 0) {
    if (data.size() == 0) throw data_error("mean inherent noise: dataset is empty");
    const std::size_t n_img =
        max_images == 0 ? data.size() : std::min(max_images, data.size());
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_img; ++i) {
        for (double v : data.images[i].data) {
            sum += method.kind == NoiseMethod::Kind::sg
                       ? inherent_noise_sg(v, method.param, data.range)
                       : inherent_noise_ag(v, method.param, data.range);
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

struct SigmaSolveResult {
    double sigma = 0.0;
    double residual = 0.0;
    bool degenerate = false;
    std::size_t iterations = 0;
};

// Solves A(sigma) = 1 - c for sigma by bisection; A is strictly increasing
// in sigma for x strictly inside the range, so the root is unique. On a
// bound every sigma > 0 spills at least half the mass, so no solution
// exists for the usual c > 0.5 and the result is reported degenerate.
inline SigmaSolveResult solve_sigma_exact(double x, double confidence, const DataRange& range,
                                          double tol = 1e-10) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw config_error("solve sigma: confidence must lie in (0,1)");
    if (!range.contains(x))
        throw domain_error("solve sigma: x=" + format_double(x) + " outside range");
    if (x == range.x_min || x == range.x_max) return {0.0, 0.0, true, 0};

    const double target = 1.0 - confidence;
    auto residual_at = [&](double s) { return inherent_noise_point(x, s, range) - target; };

    double hi = range.width();
    std::size_t iters = 0;
    while (residual_at(hi) < 0.0 && hi < 1e12 * range.width()) {
        hi *= 2.0;
        ++iters;
    }
    double lo = 0.0;
    SigmaSolveResult best{hi, residual_at(hi), false, iters};
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double r = residual_at(mid);
        ++iters;
        if (std::fabs(r) <= std::fabs(best.residual)) best = {mid, r, false, iters};
        if (std::fabs(r) <= 0.01 * tol) break;
        (r < 0.0 ? lo : hi) = mid;
        if (hi - lo <= 1e-17 * (1.0 + hi)) break;
    }
    best.iterations = iters;
    if (std::fabs(best.residual) > tol)
        throw numeric_error("solve sigma: bisection residual " +
                            format_double(best.residual) + " above tolerance");
    return best;
}

struct OobStats {
    double image_rate = 0.0;       // fraction of images with any OOB coordinate
    double pixel_rate = 0.0;       // fraction of (pixel, sample) pairs OOB
    double analytic_mean = 0.0;    // mean A over the same pixels
    double analytic_se = 0.0;      // standard error of pixel_rate under the analytic p_i
    std::size_t n_images = 0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

namespace detail {
constexpr std::uint64_t kTagOobImage = 0x4F4F4249ull;
}

// Draws n_samples perturbations per image with per-image streams and counts
// out-of-bounds events, alongside the analytic prediction for the same
// pixels. Parallel over images; all counters are integers, so the reduction
// is exact for any worker count.
inline OobStats empirical_oob_rate(const Dataset& data, const NoiseMethod& method,
                                   std::size_t n_samples, std::uint64_t seed,
                                   std::size_t max_images = 0) {
    if (data.size() == 0) throw data_error("oob rate: dataset is empty");
    if (n_samples < 1) throw config_error("oob rate: needs n_samples >= 1");
    const std::size_t n_img =
        max_images == 0 ? data.size() : std::min(max_images, data.size());
    const DataRange range = data.range;

    std::vector<std::uint64_t> pixel_hits(n_img, 0);
    std::vector<std::uint8_t> image_hit(n_img, 0);
    std::vector<double> var_sum(n_img, 0.0);
    std::vector<double> mean_sum(n_img, 0.0);

    parallel_for_index(n_img, [&](std::size_t img) {
        const std::vector<double>& pixels = data.images[img].data;
        const std::size_t dim = pixels.size();

        std::vector<double> sigma(dim);
        if (method.kind == NoiseMethod::Kind::sg) {
            sigma.assign(dim, method.param * range.width());
        } else {
            sigma = adaptgrad_sigma(pixels, range, method.param);
        }

        double mean_acc = 0.0, var_acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double p = inherent_noise_point(pixels[d], sigma[d], range);
            mean_acc += p;
            var_acc += p * (1.0 - p);
        }
        mean_sum[img] = mean_acc;
        var_sum[img] = var_acc * static_cast<double>(n_samples);

        const std::uint64_t img_seed = derive_seed(seed, detail::kTagOobImage, img);
        std::uint64_t hits = 0;
        bool any = false;
        const GaussianKernel kernel{std::vector<double>(sigma)};
        for (std::size_t s = 0; s < n_samples; ++s) {
            const std::vector<double> eps = sample_gaussian(RngState{img_seed, s}, kernel);
            for (std::size_t d = 0; d < dim; ++d) {
                const double v = pixels[d] + eps[d];
                if (v < range.x_min || v > range.x_max) {
                    ++hits;
                    any = true;
                }
            }
        }
        pixel_hits[img] = hits;
        image_hit[img] = any ? 1 : 0;
    });

    std::uint64_t total_hits = 0, total_pairs = 0, images_oob = 0;
    double mean_total = 0.0, var_total = 0.0;
    std::size_t pixel_count = 0;
    for (std::size_t img = 0; img < n_img; ++img) {
        total_hits += pixel_hits[img];
        total_pairs += static_cast<std::uint64_t>(data.images[img].size()) * n_samples;
        images_oob += image_hit[img];
        mean_total += mean_sum[img];
        var_total += var_sum[img];
        pixel_count += data.images[img].size();
    }

    OobStats stats;
    stats.n_images = n_img;
    stats.n_samples = n_samples;
    stats.seed = seed;
    stats.image_rate = static_cast<double>(images_oob) / static_cast<double>(n_img);
    stats.pixel_rate = static_cast<double>(total_hits) / static_cast<double>(total_pairs);
    stats.analytic_mean = mean_total / static_cast<double>(pixel_count);
    stats.analytic_se =
        std::sqrt(var_total) / static_cast<double>(total_pairs);
    return stats;
}

// Aggregated inherent-noise report; serializes to the JSON schema consumed
// by the CLI and downstream tooling.
struct NoiseReport {
    NoiseMethod method;
    DataRange range{0.0, 1.0};
    std::vector<double> per_dimension;  // per-coordinate A for a single input, when given
    double aggregate_mean = 0.0;
    double expected_area = 0.0;
    std::optional<OobStats> empirical;
};

inline NoiseReport make_noise_report(const NoiseMethod& method, const DataRange& range,
                                     std::span<const double> x = {}) {
    NoiseReport report;
    report.method = method;
    report.range = range;
    report.expected_area = expected_inherent_noise(method, range);
    if (!x.empty()) {
        report.per_dimension.reserve(x.size());
        double sum = 0.0;
        for (double v : x) {
            const double a = method.kind == NoiseMethod::Kind::sg
                                 ? inherent_noise_sg(v, method.param, range)
                                 : inherent_noise_ag(v, method.param, range);
            report.per_dimension.push_back(a);
            sum += a;
        }
        report.aggregate_mean = sum / static_cast<double>(x.size());
    } else {
        report.aggregate_mean = report.expected_area;
    }
    return report;
}

inline nlohmann::ordered_json noise_report_json(const NoiseReport& report) {
    nlohmann::ordered_json j;
    j["method"] = report.method.name();
    j["params"] = {{report.method.kind == NoiseMethod::Kind::sg ? "alpha" : "confidence",
                    report.method.param}};
    j["range"] = {{"x_min", report.range.x_min}, {"x_max", report.range.x_max}};
    j["aggregate_mean"] = report.aggregate_mean;
    j["expected_area"] = report.expected_area;
    if (!report.per_dimension.empty()) j["per_dimension"] = report.per_dimension;
    if (report.empirical) {
        j["empirical"] = {{"image_rate", report.empirical->image_rate},
                          {"pixel_rate", report.empirical->pixel_rate},
                          {"analytic_mean", report.empirical->analytic_mean},
                          {"analytic_se", report.empirical->analytic_se},
                          {"n", report.empirical->n_samples},
                          {"n_images", report.empirical->n_images},
                          {"seed", report.empirical->seed}};
    }
    return j;
}

}  // namespace gradlab
