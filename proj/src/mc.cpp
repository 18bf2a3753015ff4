#include "resonance/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "resonance/csv.hpp"
#include "resonance/errors.hpp"
#include "resonance/parallel.hpp"

namespace resonance {

namespace {

constexpr std::size_t kMinWindowCrossings = 50;

std::vector<double> saddle_table(const ModelSpec& spec, double t0, double dt, std::size_t n)
{
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = saddle(spec, t0 + static_cast<double>(k) * dt);
    return out;
}

void fill_probability(EnsembleSummary& s)
{
    s.p_hat = s.n_paths ? static_cast<double>(s.n_transitions) / static_cast<double>(s.n_paths) : 0.0;
    const auto ci = wilson_interval(s.n_transitions, s.n_paths);
    s.ci_lo = std::min(ci.lo, s.p_hat);
    s.ci_hi = std::max(ci.hi, s.p_hat);
}

EnsembleMetadata metadata_for(const ModelSpec& spec, const SimParams& params, Convention convention)
{
    return {spec.family, params.eps, params.sigma, spec.a0, params.seed, params.steps_per_eps, convention};
}

}  // namespace

Convention default_convention(Family family)
{
    return family == Family::Symmetric ? Convention::SignAtPeriodEnd : Convention::ReachedDelta0;
}

void verify_delta_levels(const ModelSpec& spec, const DeltaLevels& levels, double half_window)
{
    if (!(levels.delta0 < levels.delta1 && levels.delta1 < kInflection && kInflection < levels.delta2))
        throw UsageError("delta levels must satisfy delta0 < delta1 < 1/sqrt(3) < delta2");
    if (spec.family != Family::Asymmetric) return;
    constexpr int kGrid = 200;
    for (int i = 0; i <= kGrid; ++i) {
        const double t = -half_window + 2.0 * half_window * i / kGrid;
        for (int j = 0; j <= kGrid; ++j) {
            const double x = levels.delta0 + (levels.delta1 - levels.delta0) * j / kGrid;
            if (!(force(spec, x, t) < 0.0))
                throw UsageError("force is not negative on [delta0, delta1] x [-T, T]");
        }
    }
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z)
{
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<PathOutcome> simulate_outcomes(const ModelSpec& spec, const SimParams& params,
                                           std::size_t n_paths, Convention convention,
                                           const DeltaLevels& levels)
{
    params.validate();
    if (n_paths < 1) throw UsageError("n_paths must be at least 1");
    const double dt = params.dt();
    const std::size_t steps = params.steps();
    const auto drift = DriftTable::of(spec, params.t0, dt, steps);
    const auto level = saddle_table(spec, params.t0, dt, steps + 1);
    const double x0 = params.start(spec);
    const bool stop_at_delta0 = convention == Convention::ReachedDelta0;

    return parallel_map(n_paths, params.workers, [&](std::size_t i) {
        PathOutcome out;
        out.min_x = x0;
        NormalSequence noise(NoiseStream{params.seed, i});
        double prev_gap = 0.0;
        const auto result = integrate_em(
            drift, params.eps, params.sigma, params.domain_guard, x0, [&] { return noise.next(); },
            [&](std::size_t k, double x) {
                out.final_x = x;
                out.min_x = std::min(out.min_x, x);
                const double gap = x - level[k];
                if (!out.first_crossing && k > 0 && prev_gap > 0.0 && gap <= 0.0) {
                    const double theta = prev_gap / (prev_gap - gap);
                    out.first_crossing = params.t0 + (static_cast<double>(k - 1) + theta) * dt;
                }
                prev_gap = gap;
                return !(stop_at_delta0 && x <= levels.delta0);
            });
        out.escaped = result.escaped;
        if (!out.escaped) {
            out.transitioned = convention == Convention::SignAtPeriodEnd ? out.final_x < 0.0
                                                                         : out.min_x <= levels.delta0;
        }
        return out;
    });
}

EnsembleSummary run_ensemble(const ModelSpec& spec, const SimParams& params, std::size_t n_paths,
                             Convention convention, const DeltaLevels& levels)
{
    const auto outcomes = simulate_outcomes(spec, params, n_paths, convention, levels);
    EnsembleSummary s;
    s.metadata = metadata_for(spec, params, convention);
    s.n_paths = outcomes.size();
    std::vector<double> crossings;
    for (const auto& o : outcomes) {
        s.n_transitions += o.transitioned ? 1 : 0;
        s.n_escaped_domain += o.escaped ? 1 : 0;
        if (o.first_crossing) crossings.push_back(*o.first_crossing);
    }
    s.n_crossed = crossings.size();
    fill_probability(s);
    if (!crossings.empty())
        for (double q : kWindowQuantiles) s.crossing_quantiles[q] = sample_quantile(crossings, q);
    return s;
}

EnsembleSummary estimate_transition_prob(const ModelSpec& spec, const SimParams& params,
                                         std::size_t n_paths, Convention convention,
                                         const DeltaLevels& levels)
{
    if (convention != default_convention(spec.family))
        throw UsageError("SignAtPeriodEnd applies to the symmetric family, ReachedDelta0 to the "
                         "asymmetric family");
    if (spec.family == Family::Asymmetric)
        verify_delta_levels(spec, levels, std::max(std::abs(params.t0), std::abs(params.t1)));
    return run_ensemble(spec, params, n_paths, convention, levels);
}

BandExitResult band_exit_prob(const ModelSpec& spec, const SimParams& params, double h,
                              double t_probe, std::size_t n_paths)
{
    params.validate();
    if (!(h > 0.0)) throw UsageError("band width h must be positive");
    if (n_paths < 1) throw UsageError("n_paths must be at least 1");
    const double x0 = params.start(spec);
    const auto traj = solve_deterministic(spec, x0, params.t0, params.t1, params.eps, params.steps_per_eps);
    const auto z = zeta_profile(traj);
    std::vector<double> half(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) half[k] = h * std::sqrt(z[k]);

    const double dt = traj.dt;
    const auto drift = DriftTable::of(spec, params.t0, dt, traj.size() - 1);
    const auto exits = parallel_map(n_paths, params.workers, [&](std::size_t i) {
        NormalSequence noise(NoiseStream{params.seed, i});
        bool exited = false;
        double prev_excess = -1.0;
        integrate_em(drift, params.eps, params.sigma, params.domain_guard, x0,
                     [&] { return noise.next(); },
                     [&](std::size_t k, double x) {
                         const double t = traj.time(k);
                         const double excess = std::abs(x - traj.xs[k]) - half[k];
                         if (excess >= 0.0) {
                             double tau = t;
                             if (k > 0) tau -= dt * excess / (excess - prev_excess);
                             exited = tau < t_probe;
                             return false;
                         }
                         prev_excess = excess;
                         return t < t_probe;
                     });
        return exited ? 1 : 0;
    });

    BandExitResult r;
    r.summary.metadata = metadata_for(spec, params, default_convention(spec.family));
    r.summary.n_paths = n_paths;
    r.summary.n_transitions = static_cast<std::size_t>(std::accumulate(exits.begin(), exits.end(), 0));
    fill_probability(r.summary);
    const double alpha = std::abs(traj.alphabar(t_probe));
    const double prefactor = alpha / (params.eps * params.eps) + 2.0;
    r.bound = prefactor * std::exp(-0.5 * h * h / (params.sigma * params.sigma));
    return r;
}

std::map<double, double> transition_window_stats(const ModelSpec& spec, const SimParams& params,
                                                 std::size_t n_paths, const DeltaLevels& levels)
{
    const auto outcomes = simulate_outcomes(spec, params, n_paths, default_convention(spec.family), levels);
    std::vector<double> crossings;
    for (const auto& o : outcomes)
        if (o.transitioned && o.first_crossing) crossings.push_back(*o.first_crossing);
    if (crossings.size() < kMinWindowCrossings)
        throw InsufficientDataError("only " + std::to_string(crossings.size()) +
                                    " transitions with a saddle crossing; need at least 50");
    std::map<double, double> quantiles;
    for (double q : kWindowQuantiles) quantiles[q] = sample_quantile(crossings, q);
    return quantiles;
}

std::vector<SurvivalPoint> escape_time_stats(const ModelSpec& spec, const SimParams& params,
                                             double kappa, double t2, std::size_t n_paths,
                                             double delta)
{
    params.validate();
    if (!(params.t1 > t2)) throw UsageError("escape window needs t1 > t2");
    if (n_paths < 1) throw UsageError("n_paths must be at least 1");
    const auto region = region_D(spec, kappa, t2, delta);
    const double dt = params.dt();
    const std::size_t steps = grid_steps(t2, params.t1, dt);
    const auto drift = DriftTable::of(spec, t2, dt, steps);
    std::vector<double> bound(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) bound[k] = region.upper(t2 + static_cast<double>(k) * dt);
    const double x_start = params.x0.value_or(0.0);

    // Exit step index per path; steps + 1 marks "never left".
    const auto exit_step = parallel_map(n_paths, params.workers, [&](std::size_t i) {
        NormalSequence noise(NoiseStream{params.seed, i});
        std::size_t exit_at = steps + 1;
        integrate_em(drift, params.eps, params.sigma, params.domain_guard, x_start,
                     [&] { return noise.next(); },
                     [&](std::size_t k, double x) {
                         if (std::abs(x) >= bound[k]) {
                             exit_at = k;
                             return false;
                         }
                         return true;
                     });
        return exit_at;
    });

    // survival(t_k) = #{tau >= t_k} / n, with tau taken at the first grid point outside D.
    std::vector<std::size_t> exits_at(steps + 2, 0);
    for (std::size_t e : exit_step) ++exits_at[e];
    std::vector<SurvivalPoint> curve(steps + 1);
    std::size_t alive = n_paths;
    for (std::size_t k = 0; k <= steps; ++k) {
        curve[k] = {t2 + static_cast<double>(k) * dt,
                    static_cast<double>(alive) / static_cast<double>(n_paths)};
        alive -= exits_at[k];
    }
    return curve;
}

double threshold_scale(const ModelSpec& spec, double eps)
{
    if (spec.family == Family::Symmetric) return std::max(spec.a0, std::pow(eps, 2.0 / 3.0));
    return std::max(std::pow(spec.a0, 0.75), std::pow(eps, 0.75));
}

double default_target(Family family)
{
    return family == Family::Symmetric ? 0.25 : 0.5;
}

ThresholdResult threshold_scan(const ModelSpec& spec, const SimParams& params, double target_p,
                               Interval sigma_bracket, std::size_t n_paths,
                               const DeltaLevels& levels, double rel_width)
{
    if (!(target_p > 0.0 && target_p < 1.0)) throw UsageError("target probability must lie in (0, 1)");
    if (!(sigma_bracket.lo > 0.0 && sigma_bracket.hi > sigma_bracket.lo))
        throw UsageError("sigma bracket must satisfy 0 < lo < hi");

    const auto convention = default_convention(spec.family);
    ThresholdResult result;
    auto probe = [&](double sigma) {
        SimParams p = params;
        p.sigma = sigma;
        auto s = estimate_transition_prob(spec, p, n_paths, convention, levels);
        result.probes.push_back({sigma, s});
        return s;
    };

    double lo = sigma_bracket.lo;
    double hi = sigma_bracket.hi;
    const auto at_lo = probe(lo);
    const auto at_hi = probe(hi);
    if (!(at_lo.p_hat < target_p && at_hi.p_hat > target_p))
        throw BracketError("bracket [" + format_g17(lo) + ", " + format_g17(hi) +
                           "] does not straddle target " + format_g17(target_p) + " (p_hat " +
                           format_g17(at_lo.p_hat) + " .. " + format_g17(at_hi.p_hat) + ")");

    while (hi / lo - 1.0 >= rel_width) {
        const double mid = std::sqrt(lo * hi);
        const auto s = probe(mid);
        if (s.p_hat < target_p)
            lo = mid;
        else
            hi = mid;
        if (s.ci_lo <= target_p && target_p <= s.ci_hi) break;
    }
    result.bracket_lo = lo;
    result.bracket_hi = hi;

    // Interpolate log sigma linearly in p_hat between the closest probes on either side.
    const ScanProbe* below = nullptr;
    const ScanProbe* above = nullptr;
    for (const auto& p : result.probes) {
        if (p.summary.p_hat < target_p) {
            if (!below || p.sigma > below->sigma) below = &p;
        } else if (!above || p.sigma < above->sigma) {
            above = &p;
        }
    }
    const double p_lo = below->summary.p_hat;
    const double p_hi = above->summary.p_hat;
    const double w = p_hi > p_lo ? std::clamp((target_p - p_lo) / (p_hi - p_lo), 0.0, 1.0) : 0.5;
    result.sigma_c = std::exp(std::log(below->sigma) + w * (std::log(above->sigma) - std::log(below->sigma)));
    return result;
}

PowerLawFit powerlaw_fit(std::span<const std::pair<double, double>> points)
{
    if (points.size() < 3) throw DomainError("power-law fit needs at least 3 points");
    PowerLawFit fit;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0 && y > 0.0)) throw DomainError("power-law fit needs positive x and y");
        fit.points.emplace_back(std::log(x), std::log(y));
    }
    const double n = static_cast<double>(fit.points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [lx, ly] : fit.points) {
        mx += lx;
        my += ly;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [lx, ly] : fit.points) {
        sxx += (lx - mx) * (lx - mx);
        sxy += (lx - mx) * (ly - my);
        syy += (ly - my) * (ly - my);
    }
    if (sxx == 0.0) throw DomainError("power-law fit needs distinct x values");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (const auto& [lx, ly] : fit.points) {
        const double r = ly - (fit.intercept + fit.slope * lx);
        ss_res += r * r;
    }
    fit.stderr_slope = std::sqrt(ss_res / (n - 2.0) / sxx);
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

double sample_quantile(std::vector<double> values, double q)
{
    if (values.empty()) throw InsufficientDataError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void write_summary_row(std::ostream& out, const EnsembleSummary& s)
{
    const auto& m = s.metadata;
    out << to_string(m.family) << ',' << format_g17(m.eps) << ',' << format_g17(m.sigma) << ','
        << format_g17(m.a0) << ',' << s.n_paths << ',' << s.n_transitions << ','
        << s.n_escaped_domain << ',' << format_g17(s.p_hat) << ',' << format_g17(s.ci_lo) << ','
        << format_g17(s.ci_hi) << '\n';
}

void write_sweep_row(std::ostream& out, double eps, double a0, const ThresholdResult& r)
{
    out << format_g17(eps) << ',' << format_g17(a0) << ',' << format_g17(r.sigma_c) << ','
        << format_g17(r.bracket_lo) << ',' << format_g17(r.bracket_hi) << '\n';
}

void write_fit_row(std::ostream& out, const PowerLawFit& fit)
{
    out << format_g17(fit.slope) << ',' << format_g17(fit.intercept) << ','
        << format_g17(fit.stderr_slope) << ',' << format_g17(fit.r_squared) << '\n';
}

}  // namespace resonance
