#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gradlab/errors.hpp"

namespace gradlab {

// Dense row-major tensor of finite doubles. Flat vectors are the common case;
// images carry their 2-D shape for rendering and IDX round-trips.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shp, std::vector<double> values)
        : shape(std::move(shp)), data(std::move(values)) {
        validate();
    }

    static Tensor vector(std::vector<double> values) {
        return Tensor({values.size()}, std::move(values));
    }

    std::size_t size() const { return data.size(); }

    void validate() const {
        std::size_t n = 1;
        for (std::size_t d : shape) {
            if (d == 0) throw shape_error("tensor shape has a zero dimension");
            n *= d;
        }
        if (n != data.size())
            throw shape_error("tensor data length " + std::to_string(data.size()) +
                              " does not match shape product " + std::to_string(n));
        for (double v : data)
            if (!std::isfinite(v)) throw numeric_error("tensor contains a non-finite value");
    }
};

// Valid per-dimension domain [x_min, x_max] shared by all coordinates.
struct DataRange {
    double x_min;
    double x_max;

    DataRange(double lo, double hi) : x_min(lo), x_max(hi) {
        if (!(std::isfinite(lo) && std::isfinite(hi)))
            throw config_error("data range bounds must be finite");
        if (!(lo < hi)) throw config_error("data range requires x_min < x_max");
    }

    double width() const { return x_max - x_min; }
    double midpoint() const { return x_min + 0.5 * (x_max - x_min); }
    bool contains(double x) const { return x >= x_min && x <= x_max; }

    bool contains(std::span<const double> xs) const {
        for (double x : xs)
            if (!contains(x)) return false;
        return true;
    }
};

}  // namespace gradlab
