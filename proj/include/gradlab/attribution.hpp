#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradlab/errors.hpp"
#include "gradlab/io_util.hpp"
#include "gradlab/model.hpp"
#include "gradlab/parallel.hpp"
#include "gradlab/rng.hpp"
#include "gradlab/special.hpp"
#include "gradlab/tensor.hpp"

namespace gradlab {

enum class SmootherMode { none, smoothgrad, adaptgrad };

inline const char* smoother_name(SmootherMode m) {
    switch (m) {
        case SmootherMode::none: return "none";
        case SmootherMode::smoothgrad: return "sg";
        case SmootherMode::adaptgrad: return "ag";
    }
    return "unknown";
}

// Sampling configuration for the two input-noise smoothers. alpha drives
// smoothgrad (sigma = alpha * range width), confidence drives adaptgrad;
// only the field matching mode is read.
struct SmootherConfig {
    std::size_t n_samples = 50;
    SmootherMode mode = SmootherMode::none;
    double alpha = 0.2;
    double confidence = 0.95;
    std::uint64_t seed = 0;
};

struct SaliencyMap {
    std::vector<double> values;
    std::string method_chain;
    std::string model_id;
    std::string config;
};

struct NoiseGradConfig {
    std::size_t n_models = 25;
    double relative_sigma = 0.1;
    std::uint64_t seed = 0;
};

enum class IGBaseline { black, white, custom };

struct IGConfig {
    std::size_t steps = 64;
    IGBaseline baseline = IGBaseline::black;
    std::optional<std::vector<double>> custom_baseline;
};

namespace detail {

// Seed-derivation tags for nested sampling contexts.
constexpr std::uint64_t kTagNoiseGradParams = 0x4E475053ull;  // model perturbations
constexpr std::uint64_t kTagNoiseGradBase = 0x4E474253ull;    // inner attribution
constexpr std::uint64_t kTagIGStep = 0x49475354ull;           // per-path-point smoothing

inline std::string smoother_config_json(const SmootherConfig& cfg) {
    std::string s = "{\"n\":" + std::to_string(cfg.n_samples) + ",\"mode\":\"" +
                    smoother_name(cfg.mode) + "\"";
    if (cfg.mode == SmootherMode::smoothgrad) s += ",\"alpha\":" + format_double(cfg.alpha);
    if (cfg.mode == SmootherMode::adaptgrad)
        s += ",\"confidence\":" + format_double(cfg.confidence);
    s += ",\"seed\":" + std::to_string(cfg.seed) + "}";
    return s;
}

// Mean of G(x + eps_i) over per-sample kernel draws. Sample i always uses
// stream index i and the reduction runs in ascending sample order, so the
// result is bit-identical for any worker count.
inline std::vector<double> mean_perturbed_gradient(const Model& model,
                                                   std::span<const double> x, std::size_t cls,
                                                   std::size_t n, const GaussianKernel& kernel,
                                                   std::uint64_t seed) {
    const std::size_t dim = x.size();
    std::vector<double> rows(n * dim);
    std::vector<double> base(x.begin(), x.end());
    parallel_for_index(n, [&](std::size_t i) {
        const std::vector<double> eps = sample_gaussian(RngState{seed, i}, kernel);
        std::vector<double> point(base);
        for (std::size_t d = 0; d < dim; ++d) point[d] += eps[d];
        const std::vector<double> g = model.input_gradient(point, cls);
        std::copy(g.begin(), g.end(), rows.begin() + i * dim);
    });
    std::vector<double> mean(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) mean[d] += rows[i * dim + d];
    const double inv = 1.0 / static_cast<double>(n);
    for (double& v : mean) v *= inv;
    return mean;
}

}  // namespace detail

inline SaliencyMap vanilla_saliency(const Model& model, std::span<const double> x,
                                    std::size_t cls) {
    return {model.input_gradient(x, cls), "Grad", model.id(), "{}"};
}

// Per-dimension noise scale chosen so that x_i + eps_i stays inside the
// range at confidence c: sigma_i = min(|x_i - x_min|, |x_i - x_max|) /
// (sqrt(2) * erfinv((1+c)/2)). Coordinates sitting on a bound get sigma 0.
inline std::vector<double> adaptgrad_sigma(std::span<const double> x, const DataRange& range,
                                           double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw config_error("adaptgrad: confidence must lie in (0,1)");
    const double denom = std::sqrt(2.0) * special::erfinv(0.5 * (1.0 + confidence));
    std::vector<double> sigma(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!range.contains(x[i]))
            throw domain_error("adaptgrad: x[" + std::to_string(i) + "]=" +
                               format_double(x[i]) + " outside data range");
        const double dist = std::min(std::fabs(x[i] - range.x_min),
                                     std::fabs(x[i] - range.x_max));
        sigma[i] = dist / denom;
    }
    return sigma;
}

// Mean gradient over isotropic Gaussian perturbations, sigma = alpha *
// (x_max - x_min). Samples are deliberately NOT clipped to the range:
// out-of-bounds draws are part of the method's behaviour.
inline SaliencyMap smoothgrad(const Model& model, std::span<const double> x, std::size_t cls,
                              const SmootherConfig& cfg, const DataRange& range) {
    if (cfg.mode != SmootherMode::smoothgrad)
        throw config_error("smoothgrad: config mode mismatch");
    if (!(cfg.alpha > 0.0)) throw config_error("smoothgrad: alpha must be > 0");
    if (cfg.n_samples < 1) throw config_error("smoothgrad: needs n_samples >= 1");
    const double sigma = cfg.alpha * range.width();
    const auto kernel = GaussianKernel::isotropic(x.size(), sigma);
    auto values = detail::mean_perturbed_gradient(model, x, cls, cfg.n_samples, kernel,
                                                  cfg.seed);
    return {std::move(values), "SG", model.id(), detail::smoother_config_json(cfg)};
}

// Mean gradient over the per-dimension adaptive kernel.
inline SaliencyMap adaptgrad(const Model& model, std::span<const double> x, std::size_t cls,
                             const SmootherConfig& cfg, const DataRange& range) {
    if (cfg.mode != SmootherMode::adaptgrad)
        throw config_error("adaptgrad: config mode mismatch");
    if (cfg.n_samples < 1) throw config_error("adaptgrad: needs n_samples >= 1");
    GaussianKernel kernel(adaptgrad_sigma(x, range, cfg.confidence));
    auto values = detail::mean_perturbed_gradient(model, x, cls, cfg.n_samples, kernel,
                                                  cfg.seed);
    return {std::move(values), "AG", model.id(), detail::smoother_config_json(cfg)};
}

// Smoothed or plain gradient, dispatched on the smoother mode. The building
// block the composite methods below share.
inline std::vector<double> smoothed_gradient_values(const Model& model,
                                                    std::span<const double> x, std::size_t cls,
                                                    const SmootherConfig& cfg,
                                                    const DataRange& range) {
    switch (cfg.mode) {
        case SmootherMode::none: return model.input_gradient(x, cls);
        case SmootherMode::smoothgrad: return smoothgrad(model, x, cls, cfg, range).values;
        case SmootherMode::adaptgrad: return adaptgrad(model, x, cls, cfg, range).values;
    }
    throw config_error("unknown smoother mode");
}

// Averages a base attribution over models with multiplicatively perturbed
// parameters: theta_m = theta * (1 + xi), xi ~ N(0, eta^2) elementwise.
// The base receives a derived per-model seed.
inline SaliencyMap noisegrad(
    const Model& model, std::span<const double> x, std::size_t cls,
    const NoiseGradConfig& cfg,
    const std::function<SaliencyMap(const Model&, std::span<const double>, std::size_t,
                                    std::uint64_t)>& base) {
    if (cfg.n_models < 1) throw config_error("noisegrad: needs n_models >= 1");
    if (!(cfg.relative_sigma > 0.0)) throw config_error("noisegrad: eta must be > 0");

    const std::vector<double> theta = model.parameters();
    const std::size_t dim = x.size();
    std::vector<double> sum(dim, 0.0);
    std::string chain;
    for (std::size_t m = 0; m < cfg.n_models; ++m) {
        CounterRng xi(RngState{derive_seed(cfg.seed, detail::kTagNoiseGradParams, m), 0});
        std::vector<double> perturbed(theta.size());
        for (std::size_t i = 0; i < theta.size(); ++i)
            perturbed[i] = theta[i] * (1.0 + cfg.relative_sigma * xi.next_normal());
        Model noisy = model;
        noisy.set_parameters(perturbed);
        const SaliencyMap part =
            base(noisy, x, cls, derive_seed(cfg.seed, detail::kTagNoiseGradBase, m));
        if (m == 0) chain = part.method_chain;
        for (std::size_t d = 0; d < dim; ++d) sum[d] += part.values[d];
    }
    const double inv = 1.0 / static_cast<double>(cfg.n_models);
    for (double& v : sum) v *= inv;

    std::string label = chain == "Grad" ? "NG" : (chain == "SG" ? "S-NG" : "A-NG");
    std::string cfg_json = "{\"m\":" + std::to_string(cfg.n_models) +
                           ",\"eta\":" + format_double(cfg.relative_sigma) +
                           ",\"seed\":" + std::to_string(cfg.seed) + "}";
    return {std::move(sum), label, model.id(), cfg_json};
}

// Elementwise product of the (possibly smoothed) gradient with the input.
inline SaliencyMap gradient_times_input(const Model& model, std::span<const double> x,
                                        std::size_t cls, const SmootherConfig& smoother,
                                        const DataRange& range) {
    std::vector<double> values = smoothed_gradient_values(model, x, cls, smoother, range);
    for (std::size_t d = 0; d < x.size(); ++d) values[d] *= x[d];
    const char* prefix = smoother.mode == SmootherMode::none
                             ? "GI"
                             : (smoother.mode == SmootherMode::smoothgrad ? "S-GI" : "A-GI");
    return {std::move(values), prefix, model.id(), detail::smoother_config_json(smoother)};
}

// Midpoint-Riemann path integral from the baseline to x. When a smoother is
// configured, every path-point gradient is replaced by its smoothed version
// (each path point draws from a derived per-step seed).
inline SaliencyMap integrated_gradients(const Model& model, std::span<const double> x,
                                        std::size_t cls, const IGConfig& ig,
                                        const SmootherConfig& smoother,
                                        const DataRange& range) {
    if (ig.steps < 1) throw config_error("integrated gradients: steps must be >= 1");
    const std::size_t dim = x.size();
    std::vector<double> baseline(dim);
    switch (ig.baseline) {
        case IGBaseline::black: baseline.assign(dim, range.x_min); break;
        case IGBaseline::white: baseline.assign(dim, range.x_max); break;
        case IGBaseline::custom: {
            if (!ig.custom_baseline || ig.custom_baseline->size() != dim)
                throw config_error("integrated gradients: custom baseline length mismatch");
            baseline = *ig.custom_baseline;
            for (double v : baseline)
                if (!range.contains(v))
                    throw config_error("integrated gradients: baseline outside data range");
            break;
        }
    }

    std::vector<double> sum(dim, 0.0);
    const bool plain = smoother.mode == SmootherMode::none;
    std::vector<double> rows(plain ? ig.steps * dim : 0);

    auto path_point = [&](std::size_t k) {
        const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(ig.steps);
        std::vector<double> p(dim);
        for (std::size_t d = 0; d < dim; ++d) p[d] = baseline[d] + t * (x[d] - baseline[d]);
        return p;
    };

    if (plain) {
        parallel_for_index(ig.steps, [&](std::size_t k) {
            const std::vector<double> p = path_point(k);
            const std::vector<double> g = model.input_gradient(p, cls);
            std::copy(g.begin(), g.end(), rows.begin() + k * dim);
        });
        for (std::size_t k = 0; k < ig.steps; ++k)
            for (std::size_t d = 0; d < dim; ++d) sum[d] += rows[k * dim + d];
    } else {
        for (std::size_t k = 0; k < ig.steps; ++k) {
            const std::vector<double> p = path_point(k);
            SmootherConfig step_cfg = smoother;
            step_cfg.seed = derive_seed(smoother.seed, detail::kTagIGStep, k);
            const std::vector<double> g =
                smoothed_gradient_values(model, p, cls, step_cfg, range);
            for (std::size_t d = 0; d < dim; ++d) sum[d] += g[d];
        }
    }

    const double inv = 1.0 / static_cast<double>(ig.steps);
    std::vector<double> values(dim);
    for (std::size_t d = 0; d < dim; ++d) values[d] = (x[d] - baseline[d]) * sum[d] * inv;

    std::string tag = ig.baseline == IGBaseline::black
                          ? "IG(B)"
                          : (ig.baseline == IGBaseline::white ? "IG(W)" : "IG(C)");
    if (smoother.mode == SmootherMode::smoothgrad) tag = "S-" + tag;
    if (smoother.mode == SmootherMode::adaptgrad) tag = "A-" + tag;
    std::string cfg_json = "{\"steps\":" + std::to_string(ig.steps) + ",\"smoother\":" +
                           detail::smoother_config_json(smoother) + "}";
    return {std::move(values), tag, model.id(), cfg_json};
}

// Everything compose() needs to wire a pipeline from tag strings.
struct PipelineConfig {
    SmootherConfig smoother;  // mode is overridden by the smoother tag
    NoiseGradConfig noisegrad;
    IGConfig ig;
    DataRange range{0.0, 1.0};
};

using AttributionOp =
    std::function<SaliencyMap(const Model&, std::span<const double>, std::size_t)>;

// Builds the configured pipeline for smoother in {none, SG, AG} and method
// in {Grad, GI, IG(B), IG(W), NG}; the returned op's method_chain carries
// the composed name (e.g. "A-IG(B)").
inline AttributionOp compose(const std::string& smoother_tag, const std::string& method_tag,
                             const PipelineConfig& pipeline) {
    SmootherConfig smoother = pipeline.smoother;
    if (smoother_tag == "none")
        smoother.mode = SmootherMode::none;
    else if (smoother_tag == "SG")
        smoother.mode = SmootherMode::smoothgrad;
    else if (smoother_tag == "AG")
        smoother.mode = SmootherMode::adaptgrad;
    else
        throw config_error("compose: unknown smoother tag '" + smoother_tag + "'");

    const DataRange range = pipeline.range;

    if (method_tag == "Grad") {
        return [smoother, range](const Model& m, std::span<const double> x, std::size_t cls) {
            if (smoother.mode == SmootherMode::none) return vanilla_saliency(m, x, cls);
            if (smoother.mode == SmootherMode::smoothgrad)
                return smoothgrad(m, x, cls, smoother, range);
            return adaptgrad(m, x, cls, smoother, range);
        };
    }
    if (method_tag == "GI") {
        return [smoother, range](const Model& m, std::span<const double> x, std::size_t cls) {
            return gradient_times_input(m, x, cls, smoother, range);
        };
    }
    if (method_tag == "IG(B)" || method_tag == "IG(W)") {
        IGConfig ig = pipeline.ig;
        ig.baseline = method_tag == "IG(B)" ? IGBaseline::black : IGBaseline::white;
        return [smoother, range, ig](const Model& m, std::span<const double> x,
                                     std::size_t cls) {
            return integrated_gradients(m, x, cls, ig, smoother, range);
        };
    }
    if (method_tag == "NG") {
        NoiseGradConfig ng = pipeline.noisegrad;
        return [smoother, range, ng](const Model& m, std::span<const double> x,
                                     std::size_t cls) {
            return noisegrad(m, x, cls, ng,
                             [smoother, range](const Model& pm, std::span<const double> px,
                                               std::size_t pcls, std::uint64_t seed) {
                                 if (smoother.mode == SmootherMode::none)
                                     return vanilla_saliency(pm, px, pcls);
                                 SmootherConfig inner = smoother;
                                 inner.seed = seed;
                                 if (inner.mode == SmootherMode::smoothgrad)
                                     return smoothgrad(pm, px, pcls, inner, range);
                                 return adaptgrad(pm, px, pcls, inner, range);
                             });
        };
    }
    throw config_error("compose: unknown method tag '" + method_tag + "'");
}

}  // namespace gradlab
