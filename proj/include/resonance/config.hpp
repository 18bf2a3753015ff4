#pragma once

// Run configuration: plain `key = value` lines, `#` starts a comment.
//
//   key            default                 meaning
//   family         symmetric               symmetric | asymmetric
//   eps            0.01                    forcing period on the fast scale
//   sigma          0.08                    noise intensity
//   a0             0.02                    minimal barrier parameter
//   seed           42                      master seed of the noise streams
//   n_paths        2000                    paths per ensemble
//   steps_per_eps  100                     grid steps per eps of slow time
//   T              0.25 | 0.1              half window [-T, T] (family default)
//   kappa          0.2                     saddle neighbourhood parameter
//   delta0..2      -0.5, 0.2, 3            asymmetric reference levels
//   c1, c2         1, 1                    window constants (t2 = c2 sqrt(sigma))
//   h              3                       band half-width in units of sqrt(zeta)
//   target_p       0.25 | 0.5              threshold-scan target (family default)
//   bracket_lo     0.5                     scan bracket, in units of the threshold scale
//   bracket_hi     8
//   sweep_paths    1000                    paths per threshold-scan probe
//   sweep_eps      1e-4, ..., 3e-3         six values
//   det_eps        1e-4, ..., 1e-2         eight values for detcheck fits
//   experiment     default                 free-form label
//   out            out                     output directory

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "resonance/mc.hpp"
#include "resonance/model.hpp"
#include "resonance/sde.hpp"

namespace resonance {

struct RunConfig {
    Family family = Family::Symmetric;
    double eps = 0.01;
    double sigma = 0.08;
    double a0 = 0.02;
    std::uint64_t seed = 42;
    std::size_t n_paths = 2000;
    int steps_per_eps = 100;
    double T = 0.25;
    double kappa = 0.2;
    DeltaLevels delta_levels;
    double c1 = 1.0;
    double c2 = 1.0;
    double h = 3.0;
    double target_p = 0.25;
    double bracket_lo = 0.5;
    double bracket_hi = 8.0;
    std::size_t sweep_paths = 1000;
    std::vector<double> sweep_eps = {1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3, 3e-3};
    std::vector<double> det_eps = {1e-4, 1.93e-4, 3.73e-4, 7.2e-4, 1.39e-3, 2.68e-3, 5.18e-3, 1e-2};
    std::string experiment = "default";
    std::string out = "out";

    bool operator==(const RunConfig&) const = default;

    ModelSpec model() const;
    /// Window [-T, T] at the configured eps and sigma.
    SimParams sim_params() const;
};

/// Throws ParseError naming the line and key of the first problem.
RunConfig parse_config(std::string_view text);
/// Inverse of parse_config: every field, one per line.
std::string emit_config(const RunConfig& config);

}  // namespace resonance
