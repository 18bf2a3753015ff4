#pragma once

// Ensemble experiments over sample paths keyed by path index.
//
// Every ensemble draws path i from NoiseStream{seed, i}, collects one small
// outcome record per path, and reduces the records in index order. Summaries
// are therefore bit-identical for any worker count.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "resonance/model.hpp"
#include "resonance/sde.hpp"

namespace resonance {

/// How a transition is recognised on a single path.
enum class Convention {
    /// Symmetric family: x(t1) < 0 having started in the right well.
    SignAtPeriodEnd,
    /// Asymmetric family: min over the window of x_t reaches delta0.
    ReachedDelta0,
};

Convention default_convention(Family family);

/// Asymmetric reference levels delta0 < delta1 < x_c < delta2.
struct DeltaLevels {
    double delta0 = -0.5;
    double delta1 = 0.2;
    double delta2 = 3.0;

    bool operator==(const DeltaLevels&) const = default;
};

/// Checks delta0 < delta1 < x_c < delta2 and f < 0 on [delta0, delta1] x [-T, T] on a grid.
void verify_delta_levels(const ModelSpec& spec, const DeltaLevels& levels, double half_window);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// 95% Wilson score interval by default.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct EnsembleMetadata {
    Family family = Family::Symmetric;
    double eps = 0.0;
    double sigma = 0.0;
    double a0 = 0.0;
    std::uint64_t seed = 0;
    int steps_per_eps = 0;
    Convention convention = Convention::SignAtPeriodEnd;
};

struct EnsembleSummary {
    std::size_t n_paths = 0;
    std::size_t n_transitions = 0;
    std::size_t n_escaped_domain = 0;
    /// Paths that crossed the saddle level at least once.
    std::size_t n_crossed = 0;
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    /// Quantile -> first saddle-crossing time, over paths that crossed.
    std::map<double, double> crossing_quantiles;
    EnsembleMetadata metadata;
};

struct PathOutcome {
    double final_x = 0.0;
    double min_x = 0.0;
    std::optional<double> first_crossing;
    bool escaped = false;
    bool transitioned = false;
};

std::vector<PathOutcome> simulate_outcomes(const ModelSpec& spec, const SimParams& params,
                                           std::size_t n_paths, Convention convention,
                                           const DeltaLevels& levels = {});

EnsembleSummary run_ensemble(const ModelSpec& spec, const SimParams& params, std::size_t n_paths,
                             Convention convention, const DeltaLevels& levels = {});

/// run_ensemble with the convention checked against the family.
EnsembleSummary estimate_transition_prob(const ModelSpec& spec, const SimParams& params,
                                         std::size_t n_paths, Convention convention,
                                         const DeltaLevels& levels = {});

struct BandExitResult {
    /// n_transitions counts paths with tau_B(h) < t_probe.
    EnsembleSummary summary;
    /// C(t, eps) exp(-h^2 / 2 sigma^2) with C = |alphabar(t, t0)| / eps^2 + 2; for display only.
    double bound = 0.0;
};

BandExitResult band_exit_prob(const ModelSpec& spec, const SimParams& params, double h,
                              double t_probe, std::size_t n_paths);

inline constexpr double kWindowQuantiles[] = {0.05, 0.25, 0.5, 0.75, 0.95};

/// Quantiles of the first saddle crossing over transitioning paths.
/// Throws InsufficientDataError below 50 such paths.
std::map<double, double> transition_window_stats(const ModelSpec& spec, const SimParams& params,
                                                 std::size_t n_paths,
                                                 const DeltaLevels& levels = {});

struct SurvivalPoint {
    double t;
    double survival;
};

/// Empirical P[tau_D(kappa) >= t] for paths started at (params.x0 or 0, t2), run until params.t1.
std::vector<SurvivalPoint> escape_time_stats(const ModelSpec& spec, const SimParams& params,
                                             double kappa, double t2, std::size_t n_paths,
                                             double delta = 1.0);

struct ScanProbe {
    double sigma;
    EnsembleSummary summary;
};

struct ThresholdResult {
    double sigma_c = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    std::vector<ScanProbe> probes;
};

/// max(a0, eps^{2/3}) for the symmetric family, max(a0^{3/4}, eps^{3/4}) for the asymmetric one.
double threshold_scale(const ModelSpec& spec, double eps);
double default_target(Family family);

/// Geometric bisection on sigma for p_hat(sigma) = target. Stops once a probe's
/// Wilson interval contains the target or the bracket is narrower than rel_width.
/// sigma_c interpolates log sigma linearly in p_hat between the nearest probes
/// below and above the target.
ThresholdResult threshold_scan(const ModelSpec& spec, const SimParams& params, double target_p,
                               Interval sigma_bracket, std::size_t n_paths,
                               const DeltaLevels& levels = {}, double rel_width = 0.05);

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> points;
};

/// OLS of log y on log x.
PowerLawFit powerlaw_fit(std::span<const std::pair<double, double>> points);

/// Type-7 sample quantile of unsorted data.
double sample_quantile(std::vector<double> values, double q);

inline constexpr const char* kSummaryCsvHeader =
    "family,eps,sigma,a0,n_paths,n_transitions,n_escaped,p_hat,ci_lo,ci_hi";
inline constexpr const char* kSweepCsvHeader = "eps,a0,sigma_c,bracket_lo,bracket_hi";
inline constexpr const char* kFitCsvHeader = "slope,intercept,stderr_slope,r_squared";

void write_summary_row(std::ostream& out, const EnsembleSummary& summary);
void write_sweep_row(std::ostream& out, double eps, double a0, const ThresholdResult& result);
void write_fit_row(std::ostream& out, const PowerLawFit& fit);

}  // namespace resonance
