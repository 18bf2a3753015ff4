#pragma once

// Experiment orchestration behind the resonance-lab executable.
//
//   resonance-lab <simulate|ensemble|sweep|detcheck> --config <path> [--seed N] [--out DIR]
//
// Each subcommand writes its CSVs plus config.txt (the effective configuration)
// into the output directory.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "resonance/config.hpp"
#include "resonance/mc.hpp"

namespace resonance {

struct SweepPoint {
    double eps;
    ThresholdResult result;
};

struct SweepReport {
    std::vector<SweepPoint> points;
    PowerLawFit fit;
};

/// Threshold scan at every sweep_eps value and the power-law fit of sigma_c against eps.
SweepReport run_sweep(const RunConfig& config);

struct DetCheckRow {
    double eps;
    /// Crossing of x_det with the right well; empty if it never crosses.
    std::optional<double> crossing;
    double min_x;
    /// lag t^2 / eps (symmetric) or lag |t| / eps (asymmetric) at t = -T/2.
    double lag_scaled;
    /// Range of zeta(t) times its predicted scale over the window.
    double zeta_band_min;
    double zeta_band_max;
    /// Largest |eps zeta' - 2 abar zeta - 1| at interior grid points.
    double zeta_residual;
    /// Largest |v - sigma^2 zeta| / sigma^2 zeta once alphabar <= -10 eps |log eps|; NaN if never.
    double variance_rel_err;
};

struct DetCheckReport {
    std::vector<DetCheckRow> rows;
    std::optional<PowerLawFit> crossing_fit;
    /// Symmetric family only.
    std::optional<PowerLawFit> floor_fit;
};

DetCheckRow detcheck_row(const RunConfig& config, double eps);
DetCheckReport run_detcheck(const RunConfig& config);

inline constexpr const char* kDetCheckCsvHeader =
    "eps,crossing_time,min_x,lag_scaled,zeta_band_min,zeta_band_max,zeta_residual,variance_rel_err";
inline constexpr const char* kProbeCsvHeader = "eps,sigma,n_paths,n_transitions,p_hat,ci_lo,ci_hi";

/// Runs one subcommand; args excludes the program name. Returns the exit status.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace resonance
