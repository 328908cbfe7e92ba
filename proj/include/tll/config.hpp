#pragma once

// Run configuration shared by the CLI and the acceptance battery: jet
// truncation order, quadrature resolutions, comparison tolerance, RNG seed
// and output directory.  Defaults can be overridden by a JSON file named in
// the TLL_CONFIG environment variable and then by command-line flags.

#include <cstdint>
#include <string>

namespace tll {

struct Config {
    int jet_order = 6;        // default truncation order for jet arithmetic
    int grid_phi = 64;        // latitude slices of the S^3 quadrature
    int grid_theta = 64;      // nodes per torus angle
    double tolerance = 1e-6;  // generic comparison tolerance
    std::uint64_t seed = 42;  // seed for randomized property checks
    std::string out_dir;      // optional directory for report files ("" = stdout only)

    // Throws std::invalid_argument when orders/resolutions are not positive
    // or the tolerance is outside (0, 1).
    void validate() const;
};

// Parse a config JSON file ({"jet_order": ..., "grid_phi": ..., ...}); absent
// keys keep the passed-in defaults.  Throws std::runtime_error on I/O or
// parse failure, std::invalid_argument on invalid values.
Config load_config_file(const std::string& path, Config base = Config{});

// Built-in defaults overlaid with the file named by TLL_CONFIG when set.
Config default_config();

}  // namespace tll
