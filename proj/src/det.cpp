#include "resonance/det.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "resonance/csv.hpp"
#include "resonance/errors.hpp"

namespace resonance {

namespace {

constexpr double kTwoPiSquared = 2.0 * std::numbers::pi * std::numbers::pi;

std::size_t locate(std::size_t n, double t0, double dt, double t, double* frac)
{
    const double u = (t - t0) / dt;
    if (u <= 0.0) {
        *frac = 0.0;
        return 0;
    }
    auto k = static_cast<std::size_t>(std::floor(u));
    if (k + 1 >= n) {
        *frac = 1.0;
        return n - 2;
    }
    *frac = u - static_cast<double>(k);
    return k;
}

// RK4 for eps y' = 2 a(t) y + source, with a given at step ends and midpoints.
std::vector<double> solve_linear_profile(const Trajectory& traj, double y0, double source)
{
    const std::size_t n = traj.size();
    std::vector<double> ys(n);
    ys[0] = y0;
    const double h = traj.dt;
    const double inv_eps = 1.0 / traj.eps;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a0 = traj.abar[k];
        const double am = traj.abar_mid[k];
        const double a1 = traj.abar[k + 1];
        const double y = ys[k];
        const double k1 = (2.0 * a0 * y + source) * inv_eps;
        const double k2 = (2.0 * am * (y + 0.5 * h * k1) + source) * inv_eps;
        const double k3 = (2.0 * am * (y + 0.5 * h * k2) + source) * inv_eps;
        const double k4 = (2.0 * a1 * (y + h * k3) + source) * inv_eps;
        ys[k + 1] = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return ys;
}

}  // namespace

Drift Drift::of(const ModelSpec& spec)
{
    spec.validate();
    return Drift{
        [spec](double x, double t) { return resonance::force(spec, x, t); },
        [spec](double x, double t) { return resonance::linearization(spec, x, t); },
        spec.domain,
    };
}

double Trajectory::position(double t) const
{
    double s = 0.0;
    const std::size_t k = locate(size(), t0, dt, t, &s);
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * xs[k] + h10 * dt * dxdt[k] + h01 * xs[k + 1] + h11 * dt * dxdt[k + 1];
}

double Trajectory::alphabar(double t) const
{
    return interpolate_grid(alphabar_cum, t0, dt, t);
}

std::size_t grid_steps(double t0, double t1, double dt)
{
    return static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9));
}

double interpolate_grid(std::span<const double> values, double t0, double dt, double t)
{
    if (values.size() == 1) return values[0];
    double s = 0.0;
    const std::size_t k = locate(values.size(), t0, dt, t, &s);
    return (1.0 - s) * values[k] + s * values[k + 1];
}

std::vector<double> trapezoid_cumulative(std::span<const double> values, double dt)
{
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t k = 1; k < values.size(); ++k)
        out[k] = out[k - 1] + 0.5 * dt * (values[k - 1] + values[k]);
    return out;
}

Trajectory solve_deterministic(const Drift& drift, double x0, double t0, double t1, double eps,
                               int steps_per_eps)
{
    if (!(eps > 0.0)) throw UsageError("eps must be positive");
    if (!(t1 > t0)) throw UsageError("t1 must exceed t0");
    if (steps_per_eps < 10) throw UsageError("steps_per_eps must be at least 10");

    Trajectory traj;
    traj.t0 = t0;
    traj.eps = eps;
    traj.dt = eps / steps_per_eps;
    const double h = traj.dt;
    const std::size_t steps = grid_steps(t0, t1, h);

    traj.xs.resize(steps + 1);
    traj.dxdt.resize(steps + 1);
    traj.abar.resize(steps + 1);
    traj.abar_mid.resize(steps);

    auto rate = [&](double x, double t) { return drift.force(x, t) / eps; };
    double x = x0;
    traj.xs[0] = x;
    traj.dxdt[0] = rate(x, t0);
    traj.abar[0] = drift.slope(x, t0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = traj.time(k);
        const double k1 = traj.dxdt[k];
        const double k2 = rate(x + 0.5 * h * k1, t + 0.5 * h);
        const double k3 = rate(x + 0.5 * h * k2, t + 0.5 * h);
        const double k4 = rate(x + h * k3, t + h);
        const double next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t_next = traj.time(k + 1);
        if (!std::isfinite(next) || std::abs(next) > drift.bound)
            throw DivergedError("deterministic solution left |x| <= " + format_g17(drift.bound),
                                t_next);
        traj.xs[k + 1] = next;
        traj.dxdt[k + 1] = rate(next, t_next);
        traj.abar[k + 1] = drift.slope(next, t_next);
        // Hermite midpoint keeps abar_mid fourth-order accurate.
        const double x_mid = 0.5 * (x + next) + h / 8.0 * (traj.dxdt[k] - traj.dxdt[k + 1]);
        traj.abar_mid[k] = drift.slope(x_mid, t + 0.5 * h);
        x = next;
    }
    traj.alphabar_cum = trapezoid_cumulative(traj.abar, h);
    return traj;
}

Trajectory solve_deterministic(const ModelSpec& spec, double x0, double t0, double t1, double eps,
                               int steps_per_eps)
{
    return solve_deterministic(Drift::of(spec), x0, t0, t1, eps, steps_per_eps);
}

Trajectory default_trajectory(const ModelSpec& spec, double eps, int steps_per_eps,
                              std::optional<double> half_window)
{
    const double T = half_window.value_or(default_half_window(spec.family));
    return solve_deterministic(spec, right_well(spec, -T) + eps, -T, T, eps, steps_per_eps);
}

std::optional<double> crossing_time(const Trajectory& traj, const Branch& branch)
{
    auto gap = [&](double t) { return traj.position(t) - branch(t); };
    auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };

    int crossings = 0;
    std::size_t lo = 0, hi = 0;
    std::size_t last = 0;
    int last_sign = 0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const int s = sign(traj.xs[k] - branch(traj.time(k)));
        if (s == 0) continue;
        if (last_sign != 0 && s != last_sign) {
            ++crossings;
            lo = last;
            hi = k;
        }
        last = k;
        last_sign = s;
    }
    if (crossings == 0) return std::nullopt;
    if (crossings > 1)
        throw AmbiguityError(std::to_string(crossings) + " crossings where one was expected",
                             crossings);

    double a = traj.time(lo);
    double b = traj.time(hi);
    const double sign_a = sign(gap(a));
    while (b - a > traj.dt / 100.0) {
        const double mid = 0.5 * (a + b);
        if (sign(gap(mid)) == sign_a)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

double tracking_lag(const Trajectory& traj, const Branch& branch, double t)
{
    return traj.position(t) - branch(t);
}

std::vector<double> zeta_profile(const Trajectory& traj)
{
    if (!(traj.abar[0] < 0.0))
        throw PreconditionError("zeta requires abar(t0) < 0 (stable start)");
    return solve_linear_profile(traj, 1.0 / (2.0 * std::abs(traj.abar[0])), 1.0);
}

double zeta(const Trajectory& traj, double t)
{
    return interpolate_grid(zeta_profile(traj), traj.t0, traj.dt, t);
}

std::vector<double> variance_profile(const Trajectory& traj, double sigma)
{
    return solve_linear_profile(traj, 0.0, sigma * sigma);
}

double linearized_variance(const Trajectory& traj, double t, double sigma)
{
    return interpolate_grid(variance_profile(traj, sigma), traj.t0, traj.dt, t);
}

double bernoulli_oracle(double z0, double s0, double s, double a0_tilde)
{
    if (!(z0 > 0.0)) throw UsageError("bernoulli_oracle requires z0 > 0");
    if (s == s0) return z0;
    // alpha(s, u) = int_u^s (a0 + v^2) dv
    auto alpha = [&](double u) { return a0_tilde * (s - u) + (s * s * s - u * u * u) / 3.0; };
    auto integrand = [&](double u) { return std::exp(-2.0 * alpha(u)); };
    using boost::math::quadrature::gauss_kronrod;
    const double integral = gauss_kronrod<double, 31>::integrate(integrand, s0, s, 20, 1e-12);
    return z0 / std::sqrt(std::exp(-2.0 * alpha(s0)) + 2.0 * z0 * z0 * integral);
}

double riccati_oracle(double z0, double s0, double s, double a0_tilde)
{
    if (s == s0) return z0;
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 1>;

    constexpr double kBlowUp = -1e8;
    struct BlowUp {
        double at;
    };

    State z{z0};
    auto rhs = [a0_tilde](const State& y, State& dy, double u) { dy[0] = a0_tilde + u * u - y[0] * y[0]; };
    auto watch = [](const State& y, double u) {
        if (y[0] < kBlowUp || !std::isfinite(y[0])) throw BlowUp{u};
    };
    auto stepper = odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<State>{});
    const double dt0 = (s > s0 ? 1e-3 : -1e-3);
    try {
        odeint::integrate_adaptive(stepper, rhs, z, s0, s, dt0, watch);
    } catch (const BlowUp& b) {
        throw DivergedError("Riccati solution blew up", b.at);
    }
    if (z[0] < kBlowUp) throw DivergedError("Riccati solution blew up", s);
    return z[0];
}

Rescaling bernoulli_rescaling(const ModelSpec& spec, double eps)
{
    if (spec.family != Family::Symmetric)
        throw UsageError("bernoulli_rescaling requires the symmetric family");
    // a(t) = a0 + a1 t^2 + O(t^4), a1 = 2 pi^2
    const double a1 = kTwoPiSquared;
    const double e13 = std::cbrt(eps);
    Rescaling r;
    r.x_origin = 0.0;
    r.x_scale = e13 * std::pow(a1, 1.0 / 6.0);
    r.t_scale = e13 * std::pow(a1, -1.0 / 3.0);
    r.a0_tilde = spec.a0 / (e13 * e13 * std::cbrt(a1));
    return r;
}

Rescaling riccati_rescaling(const ModelSpec& spec, double eps)
{
    if (spec.family != Family::Asymmetric)
        throw UsageError("riccati_rescaling requires the asymmetric family");
    // f(x_c + y, t) = a0 + a1 t^2 - sqrt3 y^2 - y^3 + O(t^4), a1 = 2 pi^2 (lambda_c - a0)
    const double a1 = kTwoPiSquared * (kLambdaCritical - spec.a0);
    const double sqrt3 = std::numbers::sqrt3;
    const double ct = std::pow(sqrt3 * a1, -0.25);
    const double cy = 1.0 / (sqrt3 * ct);
    Rescaling r;
    r.x_origin = kInflection;
    r.x_scale = cy * std::sqrt(eps);
    r.t_scale = ct * std::sqrt(eps);
    r.a0_tilde = sqrt3 * ct * ct * spec.a0 / eps;
    return r;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    out << "t,x,abar,alphabar_cum\n";
    for (std::size_t k = 0; k < traj.size(); ++k)
        out << format_g17(traj.time(k)) << ',' << format_g17(traj.xs[k]) << ','
            << format_g17(traj.abar[k]) << ',' << format_g17(traj.alphabar_cum[k]) << '\n';
}

}  // namespace resonance
