#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gradlab/errors.hpp"
#include "gradlab/idx.hpp"
#include "gradlab/model.hpp"
#include "gradlab/rng.hpp"

namespace gradlab {

struct TrainConfig {
    std::size_t epochs = 20;
    double learning_rate = 0.01;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 1) throw config_error("train: epochs must be >= 1");
        if (!(learning_rate > 0.0)) throw config_error("train: learning rate must be > 0");
        if (batch_size < 1) throw config_error("train: batch size must be >= 1");
    }
};

struct EpochStats {
    std::size_t epoch;
    double mean_loss;
};

namespace detail {

constexpr std::size_t kHiddenUnits = 200;
constexpr std::size_t kClasses = 10;

// Softmax cross-entropy on the logits row; writes dL/dlogits into grad.
inline double softmax_ce(const double* logits, std::size_t n, std::size_t label, double* grad) {
    double mx = logits[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        grad[i] = std::exp(logits[i] - mx);
        sum += grad[i];
    }
    const double loss = std::log(sum) - (logits[label] - mx);
    const double inv = 1.0 / sum;
    for (std::size_t i = 0; i < n; ++i) grad[i] *= inv;
    grad[label] -= 1.0;
    return loss;
}

}  // namespace detail

// Minibatch SGD on the fixed 784 -> 200 -> ReLU -> 10 architecture.
// Single-threaded with a fixed accumulation order: the same seed gives
// bit-identical parameters on every run.
inline Model train_mlp(const Dataset& train, const TrainConfig& cfg,
                       std::vector<EpochStats>* epoch_log = nullptr) {
    cfg.validate();
    if (train.size() == 0) throw data_error("train: dataset is empty");
    const std::size_t dim = train.images.front().size();
    if (dim != 784)
        throw shape_error("train: architecture is fixed at 784-200-10, got input dim " +
                          std::to_string(dim));
    for (const Tensor& img : train.images)
        if (img.size() != dim) throw shape_error("train: inconsistent image sizes");
    for (std::uint8_t l : train.labels)
        if (l >= detail::kClasses) throw data_error("train: label out of range");

    Model model = make_random_mlp({dim, detail::kHiddenUnits, detail::kClasses}, cfg.seed);
    Layer& l1 = model.layers[0];
    Layer& l2 = model.layers[1];

    const std::size_t n = train.size();
    const std::size_t bsz = std::min(cfg.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> x(bsz * dim), z1(bsz * detail::kHiddenUnits),
        h(bsz * detail::kHiddenUnits), logits(bsz * detail::kClasses),
        dlogits(bsz * detail::kClasses), dh(bsz * detail::kHiddenUnits);
    std::vector<double> dw1(l1.w.size()), db1(l1.b.size()), dw2(l2.w.size()), db2(l2.b.size());

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        CounterRng shuffle_rng(RngState{cfg.seed, 1 + epoch});
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = shuffle_rng.next_u64() % (i + 1);
            std::swap(order[i], order[j]);
        }

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += bsz) {
            const std::size_t b = std::min(bsz, n - start);

            for (std::size_t r = 0; r < b; ++r) {
                const std::vector<double>& img = train.images[order[start + r]].data;
                std::copy(img.begin(), img.end(), x.begin() + r * dim);
            }

            // forward
            for (std::size_t r = 0; r < b; ++r) {
                const double* xr = x.data() + r * dim;
                double* zr = z1.data() + r * detail::kHiddenUnits;
                double* hr = h.data() + r * detail::kHiddenUnits;
                for (std::size_t o = 0; o < detail::kHiddenUnits; ++o) {
                    const double* w = l1.w.data() + o * dim;
                    double acc = l1.b[o];
                    for (std::size_t i = 0; i < dim; ++i) acc += w[i] * xr[i];
                    zr[o] = acc;
                    hr[o] = acc > 0.0 ? acc : 0.0;
                }
                double* sr = logits.data() + r * detail::kClasses;
                for (std::size_t o = 0; o < detail::kClasses; ++o) {
                    const double* w = l2.w.data() + o * detail::kHiddenUnits;
                    double acc = l2.b[o];
                    for (std::size_t i = 0; i < detail::kHiddenUnits; ++i) acc += w[i] * hr[i];
                    sr[o] = acc;
                }
            }

            // loss and dL/dlogits (mean over the batch)
            const double inv_b = 1.0 / static_cast<double>(b);
            for (std::size_t r = 0; r < b; ++r) {
                loss_sum += detail::softmax_ce(logits.data() + r * detail::kClasses,
                                               detail::kClasses, train.labels[order[start + r]],
                                               dlogits.data() + r * detail::kClasses);
                for (std::size_t o = 0; o < detail::kClasses; ++o)
                    dlogits[r * detail::kClasses + o] *= inv_b;
            }

            // backward
            std::fill(dw2.begin(), dw2.end(), 0.0);
            std::fill(db2.begin(), db2.end(), 0.0);
            std::fill(dh.begin(), dh.begin() + b * detail::kHiddenUnits, 0.0);
            for (std::size_t r = 0; r < b; ++r) {
                const double* hr = h.data() + r * detail::kHiddenUnits;
                const double* dr = dlogits.data() + r * detail::kClasses;
                double* dhr = dh.data() + r * detail::kHiddenUnits;
                for (std::size_t o = 0; o < detail::kClasses; ++o) {
                    const double d = dr[o];
                    db2[o] += d;
                    double* w2row = dw2.data() + o * detail::kHiddenUnits;
                    const double* w2 = l2.w.data() + o * detail::kHiddenUnits;
                    for (std::size_t i = 0; i < detail::kHiddenUnits; ++i) {
                        w2row[i] += d * hr[i];
                        dhr[i] += d * w2[i];
                    }
                }
            }
            std::fill(dw1.begin(), dw1.end(), 0.0);
            std::fill(db1.begin(), db1.end(), 0.0);
            for (std::size_t r = 0; r < b; ++r) {
                const double* xr = x.data() + r * dim;
                const double* zr = z1.data() + r * detail::kHiddenUnits;
                double* dhr = dh.data() + r * detail::kHiddenUnits;
                for (std::size_t o = 0; o < detail::kHiddenUnits; ++o) {
                    if (zr[o] <= 0.0) continue;
                    const double d = dhr[o];
                    if (d == 0.0) continue;
                    db1[o] += d;
                    double* w1row = dw1.data() + o * dim;
                    for (std::size_t i = 0; i < dim; ++i) w1row[i] += d * xr[i];
                }
            }

            const double lr = cfg.learning_rate;
            for (std::size_t i = 0; i < l1.w.size(); ++i) l1.w[i] -= lr * dw1[i];
            for (std::size_t i = 0; i < l1.b.size(); ++i) l1.b[i] -= lr * db1[i];
            for (std::size_t i = 0; i < l2.w.size(); ++i) l2.w[i] -= lr * dw2[i];
            for (std::size_t i = 0; i < l2.b.size(); ++i) l2.b[i] -= lr * db2[i];
        }
        if (epoch_log)
            epoch_log->push_back({epoch + 1, loss_sum / static_cast<double>(n)});
    }
    return model;
}

inline double accuracy(const Model& model, const Dataset& data) {
    if (data.size() == 0) throw data_error("accuracy: dataset is empty");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::vector<double> scores = model.forward(data.images[i].data);
        const std::size_t pred =
            std::max_element(scores.begin(), scores.end()) - scores.begin();
        if (pred == data.labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace gradlab
