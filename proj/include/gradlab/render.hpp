#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gradlab/errors.hpp"
#include "gradlab/io_util.hpp"

namespace gradlab {

struct RenderOptions {
    double percentile_clip = 99.0;  // in (0, 100]

    void validate() const {
        if (!(percentile_clip > 0.0 && percentile_clip <= 100.0))
            throw config_error("render: percentile must lie in (0,100]");
    }
};

// p-th percentile of |values| by sorting; rank = ceil(p/100 * n), 1-based.
inline double percentile_abs(std::span<const double> values, double p) {
    if (values.empty()) throw config_error("percentile: empty input");
    std::vector<double> mags(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) mags[i] = std::fabs(values[i]);
    std::sort(mags.begin(), mags.end());
    const double n = static_cast<double>(mags.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, mags.size());
    return mags[rank - 1];
}

// Grayscale rendering: v' = min(|v|, P) / P with P the percentile clip,
// scaled to 0..255. Multi-channel maps (channel-major planes) are reduced
// by the absolute sum across channels first. All-equal maps render as
// all-zero.
inline std::vector<std::uint8_t> render_saliency(std::span<const double> values,
                                                 const RenderOptions& opts, std::size_t width,
                                                 std::size_t height) {
    opts.validate();
    const std::size_t pixels = width * height;
    if (pixels == 0 || values.empty() || values.size() % pixels != 0)
        throw shape_error("render: map length " + std::to_string(values.size()) +
                          " is not a multiple of width*height");
    const std::size_t channels = values.size() / pixels;

    std::vector<double> reduced(pixels, 0.0);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t p = 0; p < pixels; ++p) reduced[p] += std::fabs(values[c * pixels + p]);

    const auto [mn, mx] = std::minmax_element(reduced.begin(), reduced.end());
    std::vector<std::uint8_t> out(pixels, 0);
    if (*mn == *mx) return out;  // degenerate: constant map

    const double clip = percentile_abs(reduced, opts.percentile_clip);
    if (clip <= 0.0) return out;
    for (std::size_t p = 0; p < pixels; ++p) {
        const double v = std::min(reduced[p], clip) / clip;
        out[p] = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
    return out;
}

// Binary PGM (P5, maxval 255); the comment line carries the provenance
// JSON so the artifact embeds its config.
inline void write_pgm(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& pixels, std::size_t width,
                      std::size_t height, const std::string& comment = {}) {
    if (pixels.size() != width * height) throw shape_error("pgm: pixel count mismatch");
    std::string bytes = "P5\n";
    if (!comment.empty()) {
        if (comment.find('\n') != std::string::npos)
            throw config_error("pgm: comment must be a single line");
        bytes += "# " + comment + "\n";
    }
    bytes += std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    bytes.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    atomic_write_file(path, bytes);
}

}  // namespace gradlab
