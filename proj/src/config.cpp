#include "resonance/config.hpp"

#include <charconv>
#include <map>
#include <optional>
#include <sstream>

#include "resonance/csv.hpp"
#include "resonance/errors.hpp"

namespace resonance {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view text, int line, const std::string& key)
{
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw ParseError(line, key, "malformed number '" + std::string(text) + "'");
    return value;
}

std::vector<double> parse_list(std::string_view text, int line, const std::string& key)
{
    std::vector<double> values;
    while (true) {
        const auto comma = text.find(',');
        values.push_back(parse_number<double>(trim(text.substr(0, comma)), line, key));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return values;
}

std::string join(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += format_g17(values[i]);
    }
    return out;
}

}  // namespace

ModelSpec RunConfig::model() const
{
    return family == Family::Symmetric ? ModelSpec::symmetric(a0) : ModelSpec::asymmetric(a0);
}

SimParams RunConfig::sim_params() const
{
    SimParams p;
    p.eps = eps;
    p.sigma = sigma;
    p.t0 = -T;
    p.t1 = T;
    p.steps_per_eps = steps_per_eps;
    p.seed = seed;
    return p;
}

RunConfig parse_config(std::string_view text)
{
    RunConfig c;
    std::map<std::string, int> seen;
    std::optional<double> T, target_p;

    int line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "", "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "", "missing key");
        if (!seen.emplace(key, line_no).second) throw ParseError(line_no, key, "duplicate key");

        auto real = [&] { return parse_number<double>(value, line_no, key); };
        if (key == "family") {
            try {
                c.family = family_from_string(value);
            } catch (const Error& e) {
                throw ParseError(line_no, key, e.what());
            }
        } else if (key == "eps") c.eps = real();
        else if (key == "sigma") c.sigma = real();
        else if (key == "a0") c.a0 = real();
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(value, line_no, key);
        else if (key == "n_paths") c.n_paths = parse_number<std::size_t>(value, line_no, key);
        else if (key == "steps_per_eps") c.steps_per_eps = parse_number<int>(value, line_no, key);
        else if (key == "T") T = real();
        else if (key == "kappa") c.kappa = real();
        else if (key == "delta0") c.delta_levels.delta0 = real();
        else if (key == "delta1") c.delta_levels.delta1 = real();
        else if (key == "delta2") c.delta_levels.delta2 = real();
        else if (key == "c1") c.c1 = real();
        else if (key == "c2") c.c2 = real();
        else if (key == "h") c.h = real();
        else if (key == "target_p") target_p = real();
        else if (key == "bracket_lo") c.bracket_lo = real();
        else if (key == "bracket_hi") c.bracket_hi = real();
        else if (key == "sweep_paths") c.sweep_paths = parse_number<std::size_t>(value, line_no, key);
        else if (key == "sweep_eps") c.sweep_eps = parse_list(value, line_no, key);
        else if (key == "det_eps") c.det_eps = parse_list(value, line_no, key);
        else if (key == "experiment") c.experiment = std::string(value);
        else if (key == "out") c.out = std::string(value);
        else throw ParseError(line_no, key, "unknown key");
    }

    c.T = T.value_or(default_half_window(c.family));
    c.target_p = target_p.value_or(default_target(c.family));

    auto fail = [&](const std::string& key, const std::string& message) {
        const auto it = seen.find(key);
        throw ParseError(it == seen.end() ? 0 : it->second, key, message);
    };
    if (!(c.eps > 0.0)) fail("eps", "must be positive");
    if (!(c.sigma >= 0.0)) fail("sigma", "must be non-negative");
    if (!(c.a0 >= 0.0)) fail("a0", "must be non-negative");
    if (c.family == Family::Asymmetric && !(c.a0 < kLambdaCritical))
        fail("a0", "asymmetric family requires a0 < lambda_c = " + format_g17(kLambdaCritical));
    if (c.n_paths < 1) fail("n_paths", "must be at least 1");
    if (c.steps_per_eps < 10) fail("steps_per_eps", "must be at least 10");
    if (!(c.T > 0.0 && c.T < 0.5)) fail("T", "must lie in (0, 0.5)");
    if (!(c.kappa > 0.0 && c.kappa < 1.0)) fail("kappa", "must lie in (0, 1)");
    const auto& d = c.delta_levels;
    if (!(d.delta0 < d.delta1)) fail("delta1", "requires delta0 < delta1");
    if (!(d.delta1 < kInflection)) fail("delta1", "requires delta1 < 1/sqrt(3)");
    if (!(d.delta2 > kInflection)) fail("delta2", "requires delta2 > 1/sqrt(3)");
    if (!(c.c1 > 0.0)) fail("c1", "must be positive");
    if (!(c.c2 > 0.0)) fail("c2", "must be positive");
    if (!(c.h > 0.0)) fail("h", "must be positive");
    if (!(c.target_p > 0.0 && c.target_p < 1.0)) fail("target_p", "must lie in (0, 1)");
    if (!(c.bracket_lo > 0.0)) fail("bracket_lo", "must be positive");
    if (!(c.bracket_hi > c.bracket_lo)) fail("bracket_hi", "must exceed bracket_lo");
    if (c.sweep_paths < 1) fail("sweep_paths", "must be at least 1");
    for (const char* key : {"sweep_eps", "det_eps"}) {
        const auto& list = std::string_view(key) == "sweep_eps" ? c.sweep_eps : c.det_eps;
        if (list.size() < 3) fail(key, "needs at least 3 values");
        for (double e : list)
            if (!(e > 0.0)) fail(key, "values must be positive");
    }
    if (c.experiment.empty()) fail("experiment", "must not be empty");
    if (c.out.empty()) fail("out", "must not be empty");
    return c;
}

std::string emit_config(const RunConfig& c)
{
    std::ostringstream out;
    auto put = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
    put("family", std::string(to_string(c.family)));
    put("eps", format_g17(c.eps));
    put("sigma", format_g17(c.sigma));
    put("a0", format_g17(c.a0));
    put("seed", std::to_string(c.seed));
    put("n_paths", std::to_string(c.n_paths));
    put("steps_per_eps", std::to_string(c.steps_per_eps));
    put("T", format_g17(c.T));
    put("kappa", format_g17(c.kappa));
    put("delta0", format_g17(c.delta_levels.delta0));
    put("delta1", format_g17(c.delta_levels.delta1));
    put("delta2", format_g17(c.delta_levels.delta2));
    put("c1", format_g17(c.c1));
    put("c2", format_g17(c.c2));
    put("h", format_g17(c.h));
    put("target_p", format_g17(c.target_p));
    put("bracket_lo", format_g17(c.bracket_lo));
    put("bracket_hi", format_g17(c.bracket_hi));
    put("sweep_paths", std::to_string(c.sweep_paths));
    put("sweep_eps", join(c.sweep_eps));
    put("det_eps", join(c.det_eps));
    put("experiment", c.experiment);
    put("out", c.out);
    return out.str();
}

}  // namespace resonance
