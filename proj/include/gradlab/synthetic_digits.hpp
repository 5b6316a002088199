#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gradlab/idx.hpp"
#include "gradlab/rng.hpp"
#include "gradlab/tensor.hpp"

namespace gradlab {

// Deterministic stand-in corpus: 28x28 grayscale digits rendered from
// stroke skeletons with seeded affine jitter, stroke-width variation and
// pixel noise. Same shape and value range as the usual IDX digit sets, so
// the whole pipeline (loader, training, attribution, OOB statistics) runs
// unchanged when no real dataset is available.

namespace synth_detail {

struct P {
    double x, y;
};

using Polyline = std::vector<P>;

inline Polyline arc(P c, double rx, double ry, double deg0, double deg1, int steps = 48) {
    Polyline pts;
    pts.reserve(steps + 1);
    const double a0 = deg0 * 3.141592653589793 / 180.0;
    const double a1 = deg1 * 3.141592653589793 / 180.0;
    for (int i = 0; i <= steps; ++i) {
        const double a = a0 + (a1 - a0) * i / steps;
        pts.push_back({c.x + rx * std::cos(a), c.y + ry * std::sin(a)});
    }
    return pts;
}

// Stroke skeletons on the unit square, y pointing down.
inline const std::vector<std::vector<Polyline>>& glyphs() {
    static const std::vector<std::vector<Polyline>> table = [] {
        std::vector<std::vector<Polyline>> g(10);
        g[0] = {arc({0.5, 0.5}, 0.26, 0.36, 0, 360)};
        g[1] = {{{0.35, 0.3}, {0.53, 0.14}, {0.53, 0.86}}, {{0.38, 0.86}, {0.68, 0.86}}};
        g[2] = {arc({0.5, 0.33}, 0.215, 0.19, -165, 15),
                {{0.707, 0.382}, {0.52, 0.6}, {0.31, 0.84}},
                {{0.31, 0.84}, {0.72, 0.84}}};
        g[3] = {arc({0.47, 0.32}, 0.21, 0.19, -140, 80),
                arc({0.47, 0.68}, 0.23, 0.2, -80, 140)};
        g[4] = {{{0.62, 0.14}, {0.28, 0.6}}, {{0.28, 0.6}, {0.76, 0.6}},
                {{0.62, 0.14}, {0.62, 0.86}}};
        g[5] = {{{0.68, 0.16}, {0.36, 0.16}}, {{0.36, 0.16}, {0.34, 0.47}},
                arc({0.48, 0.64}, 0.22, 0.2, -100, 150)};
        g[6] = {{{0.64, 0.13}, {0.46, 0.34}, {0.34, 0.56}, {0.305, 0.66}},
                arc({0.5, 0.66}, 0.195, 0.185, 0, 360)};
        g[7] = {{{0.3, 0.16}, {0.72, 0.16}}, {{0.72, 0.16}, {0.44, 0.86}}};
        g[8] = {arc({0.5, 0.31}, 0.185, 0.165, 0, 360), arc({0.5, 0.675}, 0.215, 0.19, 0, 360)};
        g[9] = {arc({0.5, 0.33}, 0.19, 0.18, 0, 360),
                {{0.69, 0.35}, {0.655, 0.62}, {0.52, 0.86}}};
        return g;
    }();
    return table;
}

}  // namespace synth_detail

// Renders one digit image as 28x28 bytes. All randomness comes from the
// (seed, index) pair.
inline std::vector<std::uint8_t> render_synthetic_digit(int digit, std::uint64_t seed,
                                                        std::uint64_t index) {
    constexpr int N = 28;
    CounterRng gen(RngState{seed, index});

    const double angle = gen.uniform(-0.2, 0.2);
    const double scale = gen.uniform(0.82, 1.08);
    const double shear = gen.uniform(-0.12, 0.12);
    const double dx = gen.uniform(-0.06, 0.06);
    const double dy = gen.uniform(-0.06, 0.06);
    const double brush = gen.uniform(1.0, 1.6);  // stroke radius in pixels
    const double brightness = gen.uniform(0.8, 1.0);
    const double ca = std::cos(angle), sa = std::sin(angle);

    auto transform = [&](synth_detail::P p) {
        double x = (p.x - 0.5) * scale, y = (p.y - 0.5) * scale;
        x += shear * y;
        const double xr = ca * x - sa * y, yr = sa * x + ca * y;
        return synth_detail::P{(xr + 0.5 + dx) * N, (yr + 0.5 + dy) * N};
    };

    std::vector<double> ink(N * N, 0.0);
    auto stamp = [&](synth_detail::P q) {
        const int x0 = std::max(0, static_cast<int>(q.x - 3 * brush));
        const int x1 = std::min(N - 1, static_cast<int>(q.x + 3 * brush));
        const int y0 = std::max(0, static_cast<int>(q.y - 3 * brush));
        const int y1 = std::min(N - 1, static_cast<int>(q.y + 3 * brush));
        for (int py = y0; py <= y1; ++py)
            for (int px = x0; px <= x1; ++px) {
                const double ddx = px + 0.5 - q.x, ddy = py + 0.5 - q.y;
                const double v = std::exp(-(ddx * ddx + ddy * ddy) / (2.0 * brush * brush));
                ink[py * N + px] = std::max(ink[py * N + px], v);
            }
    };

    for (const auto& polyline : synth_detail::glyphs()[digit]) {
        for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
            const auto a = transform(polyline[i]);
            const auto b = transform(polyline[i + 1]);
            const double len = std::hypot(b.x - a.x, b.y - a.y);
            const int steps = std::max(1, static_cast<int>(len / 0.35));
            for (int s = 0; s <= steps; ++s) {
                const double t = static_cast<double>(s) / steps;
                stamp({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
            }
        }
    }

    std::vector<std::uint8_t> out(N * N);
    for (int i = 0; i < N * N; ++i) {
        double v = ink[i] * brightness + 0.02 * gen.next_normal();
        v = std::clamp(v, 0.0, 1.0);
        out[i] = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
    return out;
}

// In-memory corpus; labels cycle 0..9 so classes stay balanced.
inline Dataset generate_synthetic_digits(std::size_t count, std::uint64_t seed) {
    Dataset ds;
    ds.range = DataRange(0.0, 1.0);
    ds.images.reserve(count);
    ds.labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const int digit = static_cast<int>(i % 10);
        const std::vector<std::uint8_t> raw = render_synthetic_digit(digit, seed, i);
        std::vector<double> pixels(raw.size());
        for (std::size_t p = 0; p < raw.size(); ++p) pixels[p] = raw[p] / 255.0;
        ds.images.emplace_back(std::vector<std::size_t>{28, 28}, std::move(pixels));
        ds.labels.push_back(static_cast<std::uint8_t>(digit));
    }
    return ds;
}

// IDX-file corpus (same bytes the in-memory variant would load to).
inline void write_synthetic_digits(const std::filesystem::path& images_path,
                                   const std::filesystem::path& labels_path,
                                   std::size_t count, std::uint64_t seed) {
    std::vector<std::vector<std::uint8_t>> images;
    std::vector<std::uint8_t> labels;
    images.reserve(count);
    labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const int digit = static_cast<int>(i % 10);
        images.push_back(render_synthetic_digit(digit, seed, i));
        labels.push_back(static_cast<std::uint8_t>(digit));
    }
    save_idx_images(images_path, images, 28, 28);
    save_idx_labels(labels_path, labels);
}

}  // namespace gradlab
