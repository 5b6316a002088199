#pragma once

#include <stdexcept>
#include <string>

namespace gradlab {

// Error taxonomy mirrored by the CLI exit codes:
//   config_error -> 2, data_error -> 3, numeric_error -> 4.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input tensor does not match the model/operation shape contract.
struct shape_error : config_error {
    using config_error::config_error;
};

// Class index outside [0, output_dim).
struct class_index_error : config_error {
    using config_error::config_error;
};

// A value lies outside the configured DataRange.
struct domain_error : config_error {
    using config_error::config_error;
};

// Malformed input file (IDX and friends); message carries the byte offset.
struct format_error : data_error {
    using data_error::data_error;
};

struct checkpoint_error : data_error {
    using data_error::data_error;
};

// Metric is undefined for the given input (e.g. all-zero saliency map).
struct metric_error : numeric_error {
    using numeric_error::numeric_error;
};

// Adaptive integration ran out of budget; carries the best estimate.
struct quadrature_error : numeric_error {
    quadrature_error(const std::string& msg, double estimate, double bound)
        : numeric_error(msg), best_estimate(estimate), error_bound(bound) {}
    double best_estimate;
    double error_bound;
};

}  // namespace gradlab
