#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gradlab/attribution.hpp"
#include "gradlab/errors.hpp"
#include "gradlab/model.hpp"
#include "gradlab/parallel.hpp"
#include "gradlab/rng.hpp"
#include "gradlab/tensor.hpp"

namespace gradlab {

struct MetricResult {
    std::string metric;
    double value = 0.0;
    std::string method_chain;
    std::string model_id;
    std::size_t n_inputs = 0;
    std::uint64_t seed = 0;
};

// Gini index of the absolute attribution values: 0 for a uniform map,
// (n-1)/n for a one-hot map. Scale-invariant.
inline double sparseness_gini(std::span<const double> values) {
    if (values.empty()) throw metric_error("gini: empty map");
    std::vector<double> mags(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) mags[i] = std::fabs(values[i]);
    std::sort(mags.begin(), mags.end());
    double total = 0.0, weighted = 0.0;
    const double n = static_cast<double>(mags.size());
    for (std::size_t k = 0; k < mags.size(); ++k) {
        total += mags[k];
        weighted += (2.0 * static_cast<double>(k + 1) - n - 1.0) * mags[k];
    }
    if (total == 0.0) throw metric_error("gini: undefined for an all-zero map");
    return weighted / (n * total);
}

// Shannon entropy (bits) of the normalized absolute attribution values,
// with 0*log(0) = 0.
inline double information_entropy(std::span<const double> values) {
    if (values.empty()) throw metric_error("entropy: empty map");
    double total = 0.0;
    for (double v : values) total += std::fabs(v);
    if (total == 0.0) throw metric_error("entropy: undefined for an all-zero map");
    double bits = 0.0;
    for (double v : values) {
        const double q = std::fabs(v) / total;
        if (q > 0.0) bits -= q * std::log2(q);
    }
    return bits;
}

namespace detail {
constexpr std::uint64_t kTagConsistency = 0x434F4E53ull;
}

// Normalized local explanation stability: the mean over inputs and
// k_perturb uniform perturbations of
//     |E(x) - E(x+u)|_2 / (|E(x)|_2 + 1e-12),   u ~ U[-delta, delta]^D.
// Lower is more consistent. The explained class is the model argmax at the
// unperturbed x and stays fixed across its perturbations.
inline double consistency_score(const AttributionOp& explainer, const Model& model,
                                const std::vector<Tensor>& inputs, double perturb_scale,
                                std::uint64_t seed, std::size_t k_perturb = 10) {
    if (inputs.empty()) throw data_error("consistency: empty input set");
    if (!(perturb_scale > 0.0)) throw config_error("consistency: delta must be > 0");

    std::vector<double> per_input(inputs.size(), 0.0);
    parallel_for_index(inputs.size(), [&](std::size_t idx) {
        const std::vector<double>& x = inputs[idx].data;
        const std::vector<double> scores = model.forward(x);
        const std::size_t cls =
            std::max_element(scores.begin(), scores.end()) - scores.begin();
        const SaliencyMap base = explainer(model, x, cls);
        double base_norm = 0.0;
        for (double v : base.values) base_norm += v * v;
        base_norm = std::sqrt(base_norm);

        double acc = 0.0;
        for (std::size_t k = 0; k < k_perturb; ++k) {
            CounterRng gen(RngState{derive_seed(seed, detail::kTagConsistency, idx), k});
            std::vector<double> shifted(x);
            for (double& v : shifted) v += gen.uniform(-perturb_scale, perturb_scale);
            const SaliencyMap other = explainer(model, shifted, cls);
            double diff = 0.0;
            for (std::size_t d = 0; d < x.size(); ++d) {
                const double e = base.values[d] - other.values[d];
                diff += e * e;
            }
            acc += std::sqrt(diff) / (base_norm + 1e-12);
        }
        per_input[idx] = acc / static_cast<double>(k_perturb);
    });

    double total = 0.0;
    for (double v : per_input) total += v;
    return total / static_cast<double>(inputs.size());
}

// M2 acting on shifted data x + s built directly from M1: first-layer bias
// b' = b - W * s keeps the forward geometry identical, removing the
// retraining variance from the invariance check.
inline Model shift_compensated(const Model& model, double shift) {
    if (model.kind != ModelKind::mlp)
        throw config_error("shift compensation: only defined for mlp models");
    Model shifted = model;
    Layer& l1 = shifted.layers.front();
    for (std::size_t o = 0; o < l1.out; ++o) {
        const double* row = l1.w.data() + o * l1.in;
        double dot = 0.0;
        for (std::size_t i = 0; i < l1.in; ++i) dot += row[i];
        l1.b[o] -= dot * shift;
    }
    return shifted;
}

// Mean over inputs of |E(M1, x) - E(M2, x+s)|_1 / D. The two ops carry
// their own data ranges (M2's is the shifted one) so the smoothers stay
// aligned; explained class comes from M1's argmax.
inline double invariance_check(const AttributionOp& op1, const Model& m1,
                               const AttributionOp& op2, const Model& m2, double shift,
                               const std::vector<Tensor>& inputs) {
    if (inputs.empty()) throw data_error("invariance: empty input set");
    if (m1.input_dim != m2.input_dim)
        throw config_error("invariance: models have different input dims");

    std::vector<double> per_input(inputs.size(), 0.0);
    parallel_for_index(inputs.size(), [&](std::size_t idx) {
        const std::vector<double>& x = inputs[idx].data;
        if (x.size() != m1.input_dim) throw config_error("invariance: input shape mismatch");
        const std::vector<double> scores = m1.forward(x);
        const std::size_t cls =
            std::max_element(scores.begin(), scores.end()) - scores.begin();
        std::vector<double> shifted(x);
        for (double& v : shifted) v += shift;
        const SaliencyMap a = op1(m1, x, cls);
        const SaliencyMap b = op2(m2, shifted, cls);
        double l1 = 0.0;
        for (std::size_t d = 0; d < x.size(); ++d) l1 += std::fabs(a.values[d] - b.values[d]);
        per_input[idx] = l1 / static_cast<double>(x.size());
    });

    double total = 0.0;
    for (double v : per_input) total += v;
    return total / static_cast<double>(inputs.size());
}

}  // namespace gradlab
