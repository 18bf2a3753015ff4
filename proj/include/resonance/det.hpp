#pragma once

// Deterministic slow-fast dynamics eps * dx/dt = f(x, t).
//
// The solver uses classical RK4 with a fixed step dt = eps / steps_per_eps so
// trajectories are reproducible bit for bit. Along the solution it records the
// linearization abar(t) = df/dx(x_det(t), t) and its running integral, from
// which the variance profile zeta and the linearized variance v are obtained.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "resonance/model.hpp"

namespace resonance {

/// A scalar drift field f(x, t) with its x-derivative and an admissible |x| bound.
struct Drift {
    std::function<double(double, double)> force;
    std::function<double(double, double)> slope;
    double bound = kDefaultDomain;

    static Drift of(const ModelSpec& spec);
};

using Branch = std::function<double(double)>;

struct Trajectory {
    double t0 = 0.0;
    double dt = 0.0;
    double eps = 0.0;
    std::vector<double> xs;
    std::vector<double> dxdt;
    /// df/dx along the solution, at grid points and at step midpoints.
    std::vector<double> abar;
    std::vector<double> abar_mid;
    /// Trapezoid running integral of abar from t0.
    std::vector<double> alphabar_cum;

    std::size_t size() const { return xs.size(); }
    double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    double t1() const { return time(size() - 1); }

    /// Cubic Hermite interpolation of x_det at any t in the window.
    double position(double t) const;
    /// Linear interpolation of alphabar_cum.
    double alphabar(double t) const;
};

Trajectory solve_deterministic(const Drift& drift, double x0, double t0, double t1, double eps,
                               int steps_per_eps = 100);
Trajectory solve_deterministic(const ModelSpec& spec, double x0, double t0, double t1, double eps,
                               int steps_per_eps = 100);

/// Canonical run: t in [-T, T] starting at right_well(-T) + eps.
Trajectory default_trajectory(const ModelSpec& spec, double eps, int steps_per_eps = 100,
                              std::optional<double> half_window = std::nullopt);

/// Running trapezoid integral with a leading zero.
std::vector<double> trapezoid_cumulative(std::span<const double> values, double dt);

/// Number of grid steps covering [t0, t1]; t0 + n*dt lands on t1 up to rounding.
std::size_t grid_steps(double t0, double t1, double dt);

/// Linear interpolation of grid samples starting at t0 with spacing dt.
double interpolate_grid(std::span<const double> values, double t0, double dt, double t);

/// The single time where x_det crosses the branch, or none. Throws AmbiguityError on more than one.
std::optional<double> crossing_time(const Trajectory& traj, const Branch& branch);

/// Signed lag x_det(t) - branch(t).
double tracking_lag(const Trajectory& traj, const Branch& branch, double t);

/// zeta on the trajectory grid: eps zeta' = 2 abar zeta + 1, zeta(t0) = 1 / (2 |abar(t0)|).
std::vector<double> zeta_profile(const Trajectory& traj);
double zeta(const Trajectory& traj, double t);

/// v on the trajectory grid: eps v' = 2 abar v + sigma^2, v(t0) = 0.
std::vector<double> variance_profile(const Trajectory& traj, double sigma);
double linearized_variance(const Trajectory& traj, double t, double sigma);

/// Exact solution of dz/ds = (a0_tilde + s^2) z - z^3 through (s0, z0).
double bernoulli_oracle(double z0, double s0, double s, double a0_tilde);

/// Adaptive solution of dz/ds = a0_tilde + s^2 - z^2 through (s0, z0).
/// Throws DivergedError with the blow-up time when z runs off to -infinity.
double riccati_oracle(double z0, double s0, double s, double a0_tilde);

/// Affine change of variables x = x_origin + x_scale z, t = t_scale s that maps the
/// dynamics near the minimal-barrier instant onto a parameter-free normal form.
struct Rescaling {
    double x_origin = 0.0;
    double x_scale = 1.0;
    double t_scale = 1.0;
    double a0_tilde = 0.0;

    double to_z(double x) const { return (x - x_origin) / x_scale; }
    double to_x(double z) const { return x_origin + x_scale * z; }
    double to_s(double t) const { return t / t_scale; }
    double to_t(double s) const { return s * t_scale; }
};

/// Symmetric family: maps onto dz/ds = (a0_tilde + s^2) z - z^3 with error O(eps^{1/3}).
Rescaling bernoulli_rescaling(const ModelSpec& spec, double eps);
/// Asymmetric family: maps onto dz/ds = a0_tilde + s^2 - z^2 with error O(eps^{1/2}).
Rescaling riccati_rescaling(const ModelSpec& spec, double eps);

/// CSV with header t,x,abar,alphabar_cum.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace resonance
