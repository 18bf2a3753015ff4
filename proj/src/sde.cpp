#include "resonance/sde.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include "resonance/csv.hpp"
#include "resonance/errors.hpp"

namespace resonance {

namespace {

SamplePath record(const DriftTable& drift, const SimParams& params, NoiseStream stream, double x0)
{
    SamplePath path;
    path.t0 = drift.t0;
    path.dt = drift.dt;
    path.xs.assign(drift.steps() + 1, 0.0);
    NormalSequence noise(stream);
    const auto outcome = integrate_em(
        drift, params.eps, params.sigma, params.domain_guard, x0, [&] { return noise.next(); },
        [&](std::size_t k, double x) {
            path.xs[k] = x;
            return true;
        });
    if (outcome.escaped) {
        // Frozen at the first out-of-guard value.
        std::fill(path.xs.begin() + static_cast<std::ptrdiff_t>(outcome.last) + 1, path.xs.end(),
                  path.xs[outcome.last]);
        path.escaped_domain = true;
        path.escape_time = path.time(outcome.last);
    }
    return path;
}

}  // namespace

double SimParams::start(const ModelSpec& spec) const
{
    return x0.value_or(right_well(spec, t0) + eps);
}

void SimParams::validate() const
{
    if (!(eps > 0.0)) throw UsageError("eps must be positive");
    if (!(sigma >= 0.0)) throw UsageError("sigma must be non-negative");
    if (!(t1 > t0)) throw UsageError("time window must satisfy t1 > t0");
    if (steps_per_eps < 10) throw UsageError("steps_per_eps must be at least 10");
    if (!(domain_guard > 0.0)) throw UsageError("domain guard must be positive");
}

SimParams SimParams::for_model(const ModelSpec& spec, double eps, double sigma)
{
    SimParams p;
    p.eps = eps;
    p.sigma = sigma;
    const double T = default_half_window(spec.family);
    p.t0 = -T;
    p.t1 = T;
    p.domain_guard = spec.domain;
    return p;
}

DriftTable DriftTable::of(const ModelSpec& spec, double t0, double dt, std::size_t steps)
{
    DriftTable table;
    table.t0 = t0;
    table.dt = dt;
    table.c0.resize(steps);
    table.c1.resize(steps);
    table.c3 = -1.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        if (spec.family == Family::Symmetric) {
            table.c0[k] = 0.0;
            table.c1[k] = drive_a(spec, t);
        } else {
            table.c0[k] = drive_lambda(spec, t);
            table.c1[k] = 1.0;
        }
    }
    return table;
}

DriftTable DriftTable::linear(std::span<const double> slope, double t0, double dt)
{
    DriftTable table;
    table.t0 = t0;
    table.dt = dt;
    table.c0.assign(slope.size(), 0.0);
    table.c1.assign(slope.begin(), slope.end());
    table.c3 = 0.0;
    return table;
}

SamplePath sample_path(const ModelSpec& spec, const SimParams& params, NoiseStream stream)
{
    params.validate();
    const auto drift = DriftTable::of(spec, params.t0, params.dt(), params.steps());
    return record(drift, params, stream, params.start(spec));
}

SamplePath sample_path(const DriftTable& drift, const SimParams& params, NoiseStream stream,
                       double x0)
{
    params.validate();
    return record(drift, params, stream, x0);
}

double ou_variance_integral(const Trajectory& traj, double t, double sigma)
{
    // Trapezoid rule for (sigma^2/eps) int_{t0}^{t} exp(2 (A(t) - A(s)) / eps) ds on the grid,
    // with the end point handled by linear interpolation of A.
    const double eps = traj.eps;
    const double at = traj.alphabar(t);
    auto weight = [&](double a_s) { return std::exp(2.0 * (at - a_s) / eps); };
    double integral = 0.0;
    double prev_t = traj.t0;
    double prev_w = weight(traj.alphabar_cum[0]);
    for (std::size_t k = 1; k < traj.size() && prev_t < t; ++k) {
        const double tk = std::min(traj.time(k), t);
        const double wk = tk < traj.time(k) ? weight(traj.alphabar(tk)) : weight(traj.alphabar_cum[k]);
        integral += 0.5 * (tk - prev_t) * (prev_w + wk);
        prev_t = tk;
        prev_w = wk;
    }
    return sigma * sigma / eps * integral;
}

double exact_ou_sample(const Trajectory& traj, double t, double sigma, NoiseStream stream)
{
    if (t <= traj.t0) return 0.0;
    return std::sqrt(ou_variance_integral(traj, t, sigma)) * stream.normal(0);
}

std::optional<double> first_exit(const SamplePath& path, const SpaceTimeSet& set)
{
    const double slack = 1e-9 * path.dt;
    bool have_prev = false;
    double prev_t = 0.0, prev_x = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        const double t = path.time(k);
        if (t < set.t_lo - slack) continue;
        if (t > set.t_hi + slack) break;
        const double x = path.xs[k];
        const double lo = set.lower(t);
        const double hi = set.upper(t);
        if (!(lo < x && x < hi)) {
            if (!have_prev) return t;
            // Interpolate against whichever boundary was hit.
            const bool upper_hit = x >= hi;
            const double g0 = upper_hit ? prev_x - set.upper(prev_t) : set.lower(prev_t) - prev_x;
            const double g1 = upper_hit ? x - hi : lo - x;
            const double theta = g0 / (g0 - g1);
            return prev_t + std::clamp(theta, 0.0, 1.0) * (t - prev_t);
        }
        have_prev = true;
        prev_t = t;
        prev_x = x;
    }
    return std::nullopt;
}

SpaceTimeSet band_B(const Trajectory& traj, double h)
{
    if (!(h > 0.0)) throw UsageError("band width h must be positive");
    const auto z = zeta_profile(traj);
    auto lower = std::make_shared<std::vector<double>>(traj.size());
    auto upper = std::make_shared<std::vector<double>>(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double half = h * std::sqrt(z[k]);
        (*lower)[k] = traj.xs[k] - half;
        (*upper)[k] = traj.xs[k] + half;
    }
    SpaceTimeSet set;
    set.t_lo = traj.t0;
    set.t_hi = traj.t1();
    const double t0 = traj.t0, dt = traj.dt;
    set.lower = [lower, t0, dt](double t) { return interpolate_grid(*lower, t0, dt, t); };
    set.upper = [upper, t0, dt](double t) { return interpolate_grid(*upper, t0, dt, t); };
    return set;
}

SpaceTimeSet region_D(const ModelSpec& spec, double kappa, double t_start, double delta,
                      double t_end)
{
    if (spec.family != Family::Symmetric) throw UsageError("region_D requires the symmetric family");
    if (!(kappa > 0.0 && kappa < 1.0)) throw UsageError("kappa must lie in (0, 1)");
    SpaceTimeSet set;
    set.t_lo = t_start;
    set.t_hi = t_end;
    // a x - x^3 > kappa a x  <=>  x^2 < (1 - kappa) a
    set.upper = [spec, kappa, delta](double t) {
        return std::min(std::sqrt((1.0 - kappa) * drive_a(spec, t)), delta);
    };
    set.lower = [upper = set.upper](double t) { return -upper(t); };
    return set;
}

CoupledPair coupled_pair(const ModelSpec& spec, const Trajectory& traj, const SimParams& params,
                         NoiseStream stream, double y0, double delta)
{
    if (spec.family != Family::Symmetric)
        throw UsageError("coupled_pair requires the symmetric family");
    const double x_start = traj.xs[0];
    if (!(y0 >= 0.0 && y0 <= delta - x_start))
        throw UsageError("coupled_pair requires 0 <= y0 <= delta - x_det(t0)");

    const std::size_t n = traj.size();
    const double dt = traj.dt;
    const double rate = dt / params.eps;
    const double kick = params.sigma * std::sqrt(rate);
    const auto drift = DriftTable::of(spec, traj.t0, dt, n - 1);

    CoupledPair out;
    out.nonlinear = SamplePath{traj.t0, dt, std::vector<double>(n), false, std::nullopt};
    out.linearized = SamplePath{traj.t0, dt, std::vector<double>(n), false, std::nullopt};
    out.reference.resize(n);

    double x = x_start + y0;
    double ref = x_start;
    double y = y0;
    out.nonlinear.xs[0] = x;
    out.linearized.xs[0] = y;
    out.reference[0] = ref;
    NormalSequence noise(stream);
    bool frozen = false;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double xi = noise.next();
        const double slope = drift.c1[k] - 3.0 * ref * ref;
        if (!frozen) {
            x += rate * drift.force(k, x) + kick * xi;
            if (!(std::abs(x) <= params.domain_guard)) {
                frozen = true;
                out.nonlinear.escaped_domain = true;
                out.nonlinear.escape_time = out.nonlinear.time(k + 1);
            }
        }
        y += rate * slope * y + kick * xi;
        ref += rate * drift.force(k, ref);
        out.nonlinear.xs[k + 1] = x;
        out.linearized.xs[k + 1] = y;
        out.reference[k + 1] = ref;
    }
    return out;
}

std::vector<double> crossing_events(const SamplePath& path, const Branch& level)
{
    std::vector<double> events;
    if (path.size() == 0) return events;
    // Compare against the last nonzero sample so touching the level is not a crossing.
    double last_t = path.time(0);
    double last_g = path.xs[0] - level(last_t);
    for (std::size_t k = 1; k < path.size(); ++k) {
        const double t = path.time(k);
        const double g = path.xs[k] - level(t);
        if (g == 0.0) continue;
        if (last_g != 0.0 && (g > 0.0) != (last_g > 0.0)) {
            const double theta = last_g / (last_g - g);
            events.push_back(last_t + theta * (t - last_t));
        }
        last_t = t;
        last_g = g;
    }
    return events;
}

void write_path_rows(std::ostream& out, std::uint64_t path_id, const SamplePath& path)
{
    const std::string id = std::to_string(path_id);
    for (std::size_t k = 0; k < path.size(); ++k)
        out << id << ',' << format_g17(path.time(k)) << ',' << format_g17(path.xs[k]) << '\n';
}

}  // namespace resonance
