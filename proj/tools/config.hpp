#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nhsta/contour.hpp"
#include "nhsta/optomech.hpp"
#include "nhsta/protocol.hpp"
#include "nhsta/robustness.hpp"
#include "nhsta/sta.hpp"

namespace nhsta::cli {

using nlohmann::json;

// Values along one sweep axis; empty means "use the base value".
struct Axis {
    std::vector<double> values;
    bool empty() const { return values.empty(); }
};

struct NoiseConfig {
    NoiseModel model;
    bool adaptive = false;  // adaptive Gauss-Kronrod instead of the Hermite rule
    double rel_tol = 1e-6;
    std::size_t mc_samples = 0;  // 0 disables the Monte-Carlo spot check
};

struct OptomechConfig {
    OptomechParams params;
    DetuningBranch branch = DetuningBranch::Lower;
    double field_scale = 1.0;  // target fields are multiplied by this before inversion
    // explicit schedule for a round trip instead of the loop protocol
    std::vector<double> times, P_L, delta0;
};

struct RunConfig {
    CircularLoop loop{0.5, 0.5, 1.0, 0.0, 1};
    Schedule schedule{5.0, 1};
    ProtocolKind protocol = ProtocolKind::Uncorrected;
    std::size_t grid_size = kDefaultGridSize;
    std::size_t output_points = 1025;
    double tol = 1e-10;
    std::optional<Mask> mask;  // fixed RADD mask; otherwise optimized
    std::optional<double> mask_nu_over_t0;
    RaddRanges radd_ranges;
    std::optional<NoiseConfig> noise;
    std::vector<ProtocolKind> kinds;  // protocols compared by sweeps
    Axis sweep_t0;
    Axis sweep_delta0;
    std::optional<OptomechConfig> optomech;
    json raw;  // echoed into the manifest

    std::optional<Mask> mask_at(double t0) const;
    std::vector<double> t0_values() const;
    std::vector<double> delta0_values() const;
};

// Throws ConfigError naming the offending field path.
RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);

}  // namespace nhsta::cli
