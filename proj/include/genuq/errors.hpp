#pragma once

#include <stdexcept>
#include <string>

namespace genuq {

// Base class for all library errors. The CLI maps the three concrete
// categories onto its exit codes (config 2, data 3, numeric 4).
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or usage: bad field values, out-of-range knobs,
// malformed requests.
struct config_error : error {
    using error::error;
};

// I/O and data problems: missing files, malformed CSV, unwritable paths,
// corrupt checkpoints.
struct data_error : error {
    using error::error;
};

// Numerical failures: non-finite states, vanishing weights, degenerate
// metrics.
struct numeric_error : error {
    using error::error;
};

}  // namespace genuq
