#pragma once

// Sample paths of dx = (1/eps) f(x, t) dt + (sigma / sqrt(eps)) dW on slow time.

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "resonance/det.hpp"
#include "resonance/model.hpp"
#include "resonance/noise.hpp"

namespace resonance {

struct SimParams {
    double eps = 0.01;
    double sigma = 0.08;
    double t0 = -0.25;
    double t1 = 0.25;
    int steps_per_eps = 100;
    std::uint64_t seed = 42;
    double domain_guard = kDefaultDomain;
    /// Start position; defaults to right_well(t0) + eps.
    std::optional<double> x0;
    /// Worker threads for ensembles; 0 reads RESONANCE_THREADS or uses the hardware count.
    /// Never affects results.
    unsigned workers = 0;

    double dt() const { return eps / steps_per_eps; }
    std::size_t steps() const { return grid_steps(t0, t1, dt()); }
    double start(const ModelSpec& spec) const;
    void validate() const;

    /// Window [-T, T] with the family default T.
    static SimParams for_model(const ModelSpec& spec, double eps, double sigma);
};

/// Drift f(x, t_k) = c0[k] + c1[k] x + c3 x^3 tabulated on a uniform grid.
struct DriftTable {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> c0;
    std::vector<double> c1;
    double c3 = 0.0;

    std::size_t steps() const { return c0.size(); }
    double force(std::size_t k, double x) const { return c0[k] + (c1[k] + c3 * x * x) * x; }

    static DriftTable of(const ModelSpec& spec, double t0, double dt, std::size_t steps);
    /// Linear drift f = slope[k] x.
    static DriftTable linear(std::span<const double> slope, double t0, double dt);
};

struct SamplePath {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> xs;
    bool escaped_domain = false;
    std::optional<double> escape_time;

    std::size_t size() const { return xs.size(); }
    double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
};

/// {(x, t) : t_lo <= t <= t_hi, lower(t) < x < upper(t)}.
struct SpaceTimeSet {
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    Branch lower = [](double) { return -std::numeric_limits<double>::infinity(); };
    Branch upper = [](double) { return std::numeric_limits<double>::infinity(); };

    bool contains(double x, double t) const { return lower(t) < x && x < upper(t); }
};

struct EmOutcome {
    /// Index of the last grid point written.
    std::size_t last = 0;
    bool escaped = false;
};

/// Euler-Maruyama on the drift grid. observe(k, x) is called for k = 0 .. steps
/// and may return false to stop early. The path stops once |x| > guard.
template <class Noise, class Observer>
EmOutcome integrate_em(const DriftTable& drift, double eps, double sigma, double guard, double x0,
                       Noise&& noise, Observer&& observe)
{
    const double rate = drift.dt / eps;
    const double kick = sigma * std::sqrt(rate);
    double x = x0;
    if (!observe(std::size_t{0}, x)) return {0, false};
    const std::size_t n = drift.steps();
    for (std::size_t k = 0; k < n; ++k) {
        x += rate * drift.force(k, x) + kick * noise();
        if (!(std::abs(x) <= guard)) {
            observe(k + 1, x);
            return {k + 1, true};
        }
        if (!observe(k + 1, x)) return {k + 1, false};
    }
    return {n, false};
}

SamplePath sample_path(const ModelSpec& spec, const SimParams& params, NoiseStream stream);
SamplePath sample_path(const DriftTable& drift, const SimParams& params, NoiseStream stream,
                       double x0);

/// v(t) from its integral representation sigma^2/eps * int exp(2 alphabar(t,s)/eps) ds.
double ou_variance_integral(const Trajectory& traj, double t, double sigma);
/// One exact Gaussian draw of the linearized process at time t.
double exact_ou_sample(const Trajectory& traj, double t, double sigma, NoiseStream stream);

/// First time (x_t, t) leaves the set, refined by linear interpolation; none if never.
std::optional<double> first_exit(const SamplePath& path, const SpaceTimeSet& set);

/// Band of half-width h sqrt(zeta(t)) around x_det.
SpaceTimeSet band_B(const Trajectory& traj, double h);

/// Saddle neighbourhood where f(x, t)/x > kappa a(t), clipped to |x| <= delta.
SpaceTimeSet region_D(const ModelSpec& spec, double kappa, double t_start, double delta = 1.0,
                      double t_end = std::numeric_limits<double>::infinity());

struct CoupledPair {
    /// x_t started at x_det(t0) + y0.
    SamplePath nonlinear;
    /// Offset process y0_t of the linearization around the reference.
    SamplePath linearized;
    /// Zero-noise solution of the same scheme from x_det(t0): the x_det the two are compared against.
    std::vector<double> reference;
};

CoupledPair coupled_pair(const ModelSpec& spec, const Trajectory& traj, const SimParams& params,
                         NoiseStream stream, double y0, double delta = 1.0);

/// All sign changes of x_t - level(t), linearly interpolated.
std::vector<double> crossing_events(const SamplePath& path, const Branch& level);

/// Rows path_id,t,x (no header).
void write_path_rows(std::ostream& out, std::uint64_t path_id, const SamplePath& path);
inline constexpr const char* kPathCsvHeader = "path_id,t,x";
inline constexpr const char* kEscapeCsvHeader = "path_id,escape_time";

}  // namespace resonance
