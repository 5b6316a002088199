#pragma once

#include <cstdint>
#include <vector>

#include "gradlab/errors.hpp"
#include "gradlab/special.hpp"

namespace gradlab {

// Counter-based generation: every random word is a pure function of
// (seed, stream, position), so Monte Carlo sample i can always use
// stream=i and results never depend on evaluation order or thread count.

namespace detail {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

// Derives an independent child seed for nested sampling contexts
// (per-model, per-path-step, per-image streams). tag keeps unrelated
// contexts from colliding.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    return detail::mix64(seed ^ detail::mix64(tag + 0x632BE59BD9B4E019ull) ^
                         detail::mix64(index));
}

struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

class CounterRng {
  public:
    explicit CounterRng(RngState s)
        : state_(detail::mix64(detail::mix64(s.seed) ^
                               (s.stream * 0xD1B54A32D192ED03ull + 1))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0,1); never returns an endpoint so the
    // quantile transform below stays finite.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via the inverse-CDF transform: one word per draw,
    // fixed once for bit-reproducibility of every saliency map.
    double next_normal() { return special::normal_quantile(next_unit()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  private:
    std::uint64_t state_;
};

// Diagonal Gaussian N(0, diag(sigma^2)); zero entries are point masses.
struct GaussianKernel {
    std::vector<double> sigma;

    explicit GaussianKernel(std::vector<double> sigmas) : sigma(std::move(sigmas)) {
        for (double s : sigma)
            if (!(s >= 0.0)) throw config_error("gaussian kernel: sigma must be >= 0");
    }

    static GaussianKernel isotropic(std::size_t dim, double s) {
        if (!(s >= 0.0)) throw config_error("gaussian kernel: sigma must be >= 0");
        return GaussianKernel(std::vector<double>(dim, s));
    }

    std::size_t dim() const { return sigma.size(); }
};

// One perturbation draw; dimension i with sigma=0 yields exactly 0.
inline std::vector<double> sample_gaussian(RngState rng, const GaussianKernel& kernel) {
    CounterRng gen(rng);
    std::vector<double> out(kernel.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double z = gen.next_normal();
        out[i] = kernel.sigma[i] == 0.0 ? 0.0 : kernel.sigma[i] * z;
    }
    return out;
}

}  // namespace gradlab
