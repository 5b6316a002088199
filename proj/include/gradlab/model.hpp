#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gradlab/errors.hpp"
#include "gradlab/rng.hpp"

namespace gradlab {

enum class ModelKind : std::uint32_t { mlp = 0, linear = 1, quadratic = 2, sinusoid1d = 3 };

inline const char* kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::mlp: return "mlp";
        case ModelKind::linear: return "linear";
        case ModelKind::quadratic: return "quadratic";
        case ModelKind::sinusoid1d: return "sinusoid1d";
    }
    return "unknown";
}

// Dense layer, weights row-major (out x in).
struct Layer {
    std::size_t out = 0;
    std::size_t in = 0;
    std::vector<double> w;
    std::vector<double> b;
};

// Differentiable scalar-per-class function F(x; theta). The mlp kind is a
// ReLU network scored by pre-softmax logits; the analytic kinds expose
// closed-form gradients and exist to give the smoothing machinery exact
// oracles:
//   linear      F(x) = w.x                grad = w
//   quadratic   F(x) = s/2 |x|^2          grad = s*x
//   sinusoid1d  F(x) = sin(k*x), D=1      grad = k*cos(k*x)
class Model {
  public:
    ModelKind kind = ModelKind::linear;
    std::vector<Layer> layers;   // mlp only
    std::vector<double> coeff;   // analytic kinds
    std::size_t input_dim = 0;
    std::size_t output_dim = 1;

    std::vector<double> forward(std::span<const double> x) const {
        check_input(x);
        switch (kind) {
            case ModelKind::linear: {
                double acc = 0.0;
                for (std::size_t i = 0; i < input_dim; ++i) acc += coeff[i] * x[i];
                return {acc};
            }
            case ModelKind::quadratic: {
                double acc = 0.0;
                for (double v : x) acc += v * v;
                return {0.5 * coeff[0] * acc};
            }
            case ModelKind::sinusoid1d:
                return {std::sin(coeff[0] * x[0])};
            case ModelKind::mlp: {
                std::vector<double> act(x.begin(), x.end());
                for (std::size_t li = 0; li < layers.size(); ++li) {
                    act = affine(layers[li], act);
                    if (li + 1 < layers.size())
                        for (double& v : act) v = v > 0.0 ? v : 0.0;
                }
                return act;
            }
        }
        throw config_error("model: unknown kind");
    }

    // Exact dF_class/dx: reverse mode for the mlp, closed form otherwise.
    std::vector<double> input_gradient(std::span<const double> x, std::size_t cls) const {
        check_input(x);
        if (cls >= output_dim)
            throw class_index_error("class index " + std::to_string(cls) +
                                    " out of range for output dim " +
                                    std::to_string(output_dim));
        switch (kind) {
            case ModelKind::linear:
                return coeff;
            case ModelKind::quadratic: {
                std::vector<double> g(x.begin(), x.end());
                for (double& v : g) v *= coeff[0];
                return g;
            }
            case ModelKind::sinusoid1d:
                return {coeff[0] * std::cos(coeff[0] * x[0])};
            case ModelKind::mlp:
                return mlp_gradient(x, cls);
        }
        throw config_error("model: unknown kind");
    }

    // Flat parameter vector in fixed order (per layer W then b; coeff for
    // analytic kinds). Matches the checkpoint payload order.
    std::vector<double> parameters() const {
        if (kind != ModelKind::mlp) return coeff;
        std::vector<double> flat;
        for (const Layer& l : layers) {
            flat.insert(flat.end(), l.w.begin(), l.w.end());
            flat.insert(flat.end(), l.b.begin(), l.b.end());
        }
        return flat;
    }

    void set_parameters(std::span<const double> flat) {
        if (kind != ModelKind::mlp) {
            if (flat.size() != coeff.size())
                throw shape_error("parameter vector length mismatch");
            coeff.assign(flat.begin(), flat.end());
            return;
        }
        std::size_t pos = 0;
        for (Layer& l : layers) {
            if (pos + l.w.size() + l.b.size() > flat.size())
                throw shape_error("parameter vector length mismatch");
            std::copy(flat.begin() + pos, flat.begin() + pos + l.w.size(), l.w.begin());
            pos += l.w.size();
            std::copy(flat.begin() + pos, flat.begin() + pos + l.b.size(), l.b.begin());
            pos += l.b.size();
        }
        if (pos != flat.size()) throw shape_error("parameter vector length mismatch");
    }

    // Stable identifier: kind, dims, and an FNV-1a hash of the parameter
    // bytes. Recorded in saliency-map provenance.
    std::string id() const {
        std::uint64_t h = 0xCBF29CE484222325ull;
        auto feed = [&h](const void* ptr, std::size_t n) {
            const auto* bytes = static_cast<const unsigned char*>(ptr);
            for (std::size_t i = 0; i < n; ++i) {
                h ^= bytes[i];
                h *= 0x100000001B3ull;
            }
        };
        const std::vector<double> flat = parameters();
        feed(flat.data(), flat.size() * sizeof(double));
        std::string dims = std::to_string(input_dim);
        for (const Layer& l : layers) dims += "x" + std::to_string(l.out);
        if (kind != ModelKind::mlp) dims += "x" + std::to_string(output_dim);
        char hex[17];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
        return std::string(kind_name(kind)) + "-" + dims + "#" + hex;
    }

    void check_input(std::span<const double> x) const {
        if (x.size() != input_dim)
            throw shape_error("input has " + std::to_string(x.size()) +
                              " elements, model expects " + std::to_string(input_dim));
        for (double v : x)
            if (!std::isfinite(v)) throw numeric_error("model input contains non-finite value");
    }

  private:
    static std::vector<double> affine(const Layer& l, const std::vector<double>& x) {
        std::vector<double> out(l.out);
        for (std::size_t o = 0; o < l.out; ++o) {
            const double* row = l.w.data() + o * l.in;
            double acc = l.b[o];
            for (std::size_t i = 0; i < l.in; ++i) acc += row[i] * x[i];
            out[o] = acc;
        }
        return out;
    }

    std::vector<double> mlp_gradient(std::span<const double> x, std::size_t cls) const {
        // Forward pass keeping pre-activations for the ReLU masks.
        std::vector<std::vector<double>> pre(layers.size());
        std::vector<double> act(x.begin(), x.end());
        for (std::size_t li = 0; li < layers.size(); ++li) {
            pre[li] = affine(layers[li], act);
            act = pre[li];
            if (li + 1 < layers.size())
                for (double& v : act) v = v > 0.0 ? v : 0.0;
        }
        // Backward: seed with e_cls on the logits.
        std::vector<double> delta(layers.back().out, 0.0);
        delta[cls] = 1.0;
        for (std::size_t li = layers.size(); li-- > 0;) {
            const Layer& l = layers[li];
            std::vector<double> prev(l.in, 0.0);
            for (std::size_t o = 0; o < l.out; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                const double* row = l.w.data() + o * l.in;
                for (std::size_t i = 0; i < l.in; ++i) prev[i] += d * row[i];
            }
            if (li > 0)
                for (std::size_t i = 0; i < l.in; ++i)
                    if (pre[li - 1][i] <= 0.0) prev[i] = 0.0;
            delta = std::move(prev);
        }
        return delta;
    }
};

inline Model make_linear(std::vector<double> weights) {
    if (weights.empty()) throw config_error("linear model needs at least one weight");
    Model m;
    m.kind = ModelKind::linear;
    m.input_dim = weights.size();
    m.output_dim = 1;
    m.coeff = std::move(weights);
    return m;
}

inline Model make_quadratic(std::size_t dim, double scale = 1.0) {
    if (dim == 0) throw config_error("quadratic model needs dim >= 1");
    Model m;
    m.kind = ModelKind::quadratic;
    m.input_dim = dim;
    m.output_dim = 1;
    m.coeff = {scale};
    return m;
}

inline Model make_sinusoid(double k) {
    Model m;
    m.kind = ModelKind::sinusoid1d;
    m.input_dim = 1;
    m.output_dim = 1;
    m.coeff = {k};
    return m;
}

// ReLU MLP with uniform +-1/sqrt(fan_in) init from the seeded generator.
// dims = {in, hidden..., out}.
inline Model make_random_mlp(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw config_error("mlp needs at least input and output dims");
    Model m;
    m.kind = ModelKind::mlp;
    m.input_dim = dims.front();
    m.output_dim = dims.back();
    CounterRng gen(RngState{seed, 0});
    for (std::size_t li = 0; li + 1 < dims.size(); ++li) {
        Layer l;
        l.in = dims[li];
        l.out = dims[li + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
        l.w.resize(l.out * l.in);
        l.b.resize(l.out);
        for (double& v : l.w) v = gen.uniform(-bound, bound);
        for (double& v : l.b) v = gen.uniform(-bound, bound);
        m.layers.push_back(std::move(l));
    }
    return m;
}

}  // namespace gradlab
