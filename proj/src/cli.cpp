#include "resonance/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

#include "resonance/csv.hpp"
#include "resonance/det.hpp"
#include "resonance/errors.hpp"
#include "resonance/sde.hpp"
#include "resonance/svg.hpp"

namespace resonance {

namespace fs = std::filesystem;

namespace {

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::ofstream open_output(const fs::path& dir, const char* name)
{
    std::ofstream out(dir / name);
    if (!out) throw UsageError("cannot write '" + (dir / name).string() + "'");
    return out;
}

fs::path prepare_output(const RunConfig& config)
{
    const fs::path dir(config.out);
    fs::create_directories(dir);
    open_output(dir, "config.txt") << emit_config(config);
    return dir;
}

void simulate(const RunConfig& config, std::ostream& out)
{
    const auto dir = prepare_output(config);
    const auto spec = config.model();
    const auto params = config.sim_params();
    const auto path = sample_path(spec, params, NoiseStream{params.seed, 0});
    const auto traj = solve_deterministic(spec, params.start(spec), params.t0, params.t1, params.eps,
                                          params.steps_per_eps);

    auto path_csv = open_output(dir, "path.csv");
    path_csv << kPathCsvHeader << '\n';
    write_path_rows(path_csv, 0, path);
    auto det_csv = open_output(dir, "deterministic.csv");
    write_trajectory_csv(det_csv, traj);
    auto esc_csv = open_output(dir, "escapes.csv");
    esc_csv << kEscapeCsvHeader << '\n';
    if (path.escape_time) esc_csv << "0," << format_g17(*path.escape_time) << '\n';
    auto svg = open_output(dir, "figure.svg");
    write_figure_svg(svg, spec, path);

    out << "simulate: " << path.size() << " points, x(t1) = " << format_g17(path.xs.back())
        << (path.escaped_domain ? " (left the domain)" : "") << '\n';
}

void ensemble(const RunConfig& config, std::ostream& out)
{
    const auto dir = prepare_output(config);
    const auto spec = config.model();
    const auto summary = estimate_transition_prob(spec, config.sim_params(), config.n_paths,
                                                  default_convention(spec.family), config.delta_levels);
    auto csv = open_output(dir, "summary.csv");
    csv << kSummaryCsvHeader << '\n';
    write_summary_row(csv, summary);
    auto window = open_output(dir, "window.csv");
    window << "quantile,t\n";
    for (const auto& [q, t] : summary.crossing_quantiles) window << format_g17(q) << ',' << format_g17(t) << '\n';

    out << "ensemble: p_hat = " << format_g17(summary.p_hat) << " [" << format_g17(summary.ci_lo) << ", "
        << format_g17(summary.ci_hi) << "], " << summary.n_transitions << '/' << summary.n_paths
        << " transitions, " << summary.n_escaped_domain << " left the domain\n";
}

void sweep(const RunConfig& config, std::ostream& out)
{
    const auto dir = prepare_output(config);
    const auto report = run_sweep(config);
    auto sweep_csv = open_output(dir, "sweep.csv");
    sweep_csv << kSweepCsvHeader << '\n';
    auto probes_csv = open_output(dir, "probes.csv");
    probes_csv << kProbeCsvHeader << '\n';
    for (const auto& p : report.points) {
        write_sweep_row(sweep_csv, p.eps, config.a0, p.result);
        for (const auto& probe : p.result.probes) {
            const auto& s = probe.summary;
            probes_csv << format_g17(p.eps) << ',' << format_g17(probe.sigma) << ',' << s.n_paths << ','
                       << s.n_transitions << ',' << format_g17(s.p_hat) << ',' << format_g17(s.ci_lo) << ','
                       << format_g17(s.ci_hi) << '\n';
        }
    }
    auto fit_csv = open_output(dir, "fit.csv");
    fit_csv << kFitCsvHeader << '\n';
    write_fit_row(fit_csv, report.fit);
    out << "sweep: sigma_c ~ eps^" << format_g17(report.fit.slope) << " (stderr "
        << format_g17(report.fit.stderr_slope) << ")\n";
}

void detcheck(const RunConfig& config, std::ostream& out)
{
    const auto dir = prepare_output(config);
    const auto report = run_detcheck(config);
    auto csv = open_output(dir, "detcheck.csv");
    csv << kDetCheckCsvHeader << '\n';
    for (const auto& r : report.rows) {
        csv << format_g17(r.eps) << ','
            << (r.crossing ? format_g17(*r.crossing) : std::string("nan")) << ',' << format_g17(r.min_x) << ','
            << format_g17(r.lag_scaled) << ',' << format_g17(r.zeta_band_min) << ','
            << format_g17(r.zeta_band_max) << ',' << format_g17(r.zeta_residual) << ','
            << format_g17(r.variance_rel_err) << '\n';
    }
    if (report.crossing_fit) {
        auto fit = open_output(dir, "crossing_fit.csv");
        fit << kFitCsvHeader << '\n';
        write_fit_row(fit, *report.crossing_fit);
        out << "detcheck: crossing time ~ eps^" << format_g17(report.crossing_fit->slope) << '\n';
    }
    if (report.floor_fit) {
        auto fit = open_output(dir, "floor_fit.csv");
        fit << kFitCsvHeader << '\n';
        write_fit_row(fit, *report.floor_fit);
        out << "detcheck: min x_det ~ eps^" << format_g17(report.floor_fit->slope) << '\n';
    }
}

}  // namespace

SweepReport run_sweep(const RunConfig& config)
{
    const auto spec = config.model();
    SweepReport report;
    std::vector<std::pair<double, double>> points;
    for (double eps : config.sweep_eps) {
        RunConfig c = config;
        c.eps = eps;
        const double scale = threshold_scale(spec, eps);
        auto result = threshold_scan(spec, c.sim_params(), config.target_p,
                                     {config.bracket_lo * scale, config.bracket_hi * scale},
                                     config.sweep_paths, config.delta_levels);
        points.emplace_back(eps, result.sigma_c);
        report.points.push_back({eps, std::move(result)});
    }
    report.fit = powerlaw_fit(points);
    return report;
}

DetCheckRow detcheck_row(const RunConfig& config, double eps)
{
    const auto spec = config.model();
    const bool symmetric = spec.family == Family::Symmetric;
    const auto traj = default_trajectory(spec, eps, config.steps_per_eps, config.T);
    const Branch well = [&spec](double t) { return right_well(spec, t); };

    DetCheckRow row{};
    row.eps = eps;
    row.crossing = crossing_time(traj, well);
    row.min_x = *std::min_element(traj.xs.begin(), traj.xs.end());
    const double t_lag = -config.T / 2.0;
    const double lag = tracking_lag(traj, well, t_lag);
    row.lag_scaled = symmetric ? lag * t_lag * t_lag / eps : lag * std::abs(t_lag) / eps;

    const auto z = zeta_profile(traj);
    const auto v = variance_profile(traj, 1.0);
    row.zeta_band_min = std::numeric_limits<double>::infinity();
    row.zeta_band_max = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.time(k);
        const double scale = symmetric
                                 ? std::max({t * t, spec.a0, std::pow(eps, 2.0 / 3.0)})
                                 : std::max({std::abs(t), std::sqrt(spec.a0), std::sqrt(eps)});
        row.zeta_band_min = std::min(row.zeta_band_min, z[k] * scale);
        row.zeta_band_max = std::max(row.zeta_band_max, z[k] * scale);
    }
    // Fourth-order central differences keep truncation well below the tolerance at dt = eps / 100.
    const double dt = traj.dt;
    for (std::size_t k = 2; k + 2 < traj.size(); ++k) {
        const double dz = (-z[k + 2] + 8.0 * z[k + 1] - 8.0 * z[k - 1] + z[k - 2]) / (12.0 * dt);
        row.zeta_residual = std::max(row.zeta_residual, std::abs(eps * dz - 2.0 * traj.abar[k] * z[k] - 1.0));
    }
    const double relaxed = -10.0 * eps * std::abs(std::log(eps));
    row.variance_rel_err = traj.alphabar_cum.back() <= relaxed ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.alphabar_cum[k] > relaxed) continue;
        row.variance_rel_err = std::max(row.variance_rel_err, std::abs(v[k] - z[k]) / z[k]);
    }
    return row;
}

DetCheckReport run_detcheck(const RunConfig& config)
{
    DetCheckReport report;
    std::vector<std::pair<double, double>> crossings, floors;
    for (double eps : config.det_eps) {
        report.rows.push_back(detcheck_row(config, eps));
        const auto& r = report.rows.back();
        if (r.crossing && *r.crossing > 0.0) crossings.emplace_back(eps, *r.crossing);
        if (r.min_x > 0.0) floors.emplace_back(eps, r.min_x);
    }
    if (crossings.size() >= 3) report.crossing_fit = powerlaw_fit(crossings);
    if (config.family == Family::Symmetric && floors.size() >= 3) report.floor_fit = powerlaw_fit(floors);
    return report;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Noise-induced transitions in periodically forced double-well potentials",
                 "resonance-lab"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    const std::pair<const char*, const char*> commands[] = {
        {"simulate", "one sample path with the deterministic overlay and an SVG figure"},
        {"ensemble", "transition probability with a Wilson interval"},
        {"sweep", "threshold scans over sweep_eps and the power-law fit"},
        {"detcheck", "deterministic scaling report over det_eps"},
    };
    for (const auto& [name, description] : commands) {
        auto* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "key = value configuration file")->required();
        sub->add_option("--seed", seed, "override the master seed");
        sub->add_option("--out", out_dir, "override the output directory");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    const auto* sub = app.get_subcommands().front();
    try {
        RunConfig config = load_config(config_path);
        if (seed) config.seed = *seed;
        if (out_dir) config.out = *out_dir;
        const std::string& name = sub->get_name();
        if (name == "simulate") simulate(config, out);
        else if (name == "ensemble") ensemble(config, out);
        else if (name == "sweep") sweep(config, out);
        else detcheck(config, out);
    } catch (const std::exception& e) {
        err << "resonance-lab " << sub->get_name() << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace resonance
