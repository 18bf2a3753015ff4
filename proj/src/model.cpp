#include "resonance/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "resonance/errors.hpp"

namespace resonance {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDoubleRootTolerance = 1e-12;

struct CubicRoot {
    double x;
    bool double_root;
};

// Real roots of x^3 + p x + q = 0, ascending. A repeated root is reported once.
std::vector<CubicRoot> depressed_cubic_roots(double p, double q)
{
    const double disc = -(4.0 * p * p * p + 27.0 * q * q);
    std::vector<CubicRoot> roots;
    if (std::abs(disc) <= kDoubleRootTolerance) {
        if (p == 0.0) {
            roots.push_back({0.0, true});
            return roots;
        }
        const double simple = 3.0 * q / p;
        const double repeated = -1.5 * q / p;
        roots.push_back({simple, false});
        roots.push_back({repeated, true});
    } else if (disc > 0.0) {
        // Three distinct real roots; p < 0 here.
        const double m = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(1.5 * q / p * std::sqrt(-3.0 / p), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k)
            roots.push_back({m * std::cos(theta - kTwoPi * k / 3.0), false});
    } else {
        // Single real root (Cardano).
        const double s = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
        roots.push_back({std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s), false});
    }
    std::sort(roots.begin(), roots.end(),
              [](const CubicRoot& l, const CubicRoot& r) { return l.x < r.x; });
    return roots;
}

Stability classify(double slope)
{
    if (slope < 0.0) return Stability::Stable;
    if (slope > 0.0) return Stability::Unstable;
    return Stability::Marginal;
}

void require_family(const ModelSpec& spec, Family family, const char* op)
{
    if (spec.family != family)
        throw UsageError(std::string(op) + " requires the " + std::string(to_string(family)) +
                         " family");
}

}  // namespace

std::string_view to_string(Family family)
{
    return family == Family::Symmetric ? "symmetric" : "asymmetric";
}

Family family_from_string(std::string_view name)
{
    if (name == "symmetric") return Family::Symmetric;
    if (name == "asymmetric") return Family::Asymmetric;
    throw UsageError("unknown family '" + std::string(name) + "'");
}

ModelSpec ModelSpec::symmetric(double a0, double domain)
{
    ModelSpec spec{Family::Symmetric, a0, domain};
    spec.validate();
    return spec;
}

ModelSpec ModelSpec::asymmetric(double a0, double domain)
{
    ModelSpec spec{Family::Asymmetric, a0, domain};
    spec.validate();
    return spec;
}

void ModelSpec::validate() const
{
    if (!(a0 >= 0.0)) throw UsageError("a0 must be >= 0");
    if (family == Family::Asymmetric && !(a0 < kLambdaCritical))
        throw UsageError("a0 must be < lambda_c = 2/(3 sqrt 3) for the asymmetric family");
    if (!(domain > 0.0)) throw UsageError("domain bound must be positive");
}

double unit_phase(double t)
{
    return t - std::round(t);
}

double drive_a(const ModelSpec& spec, double t)
{
    require_family(spec, Family::Symmetric, "drive_a");
    return spec.a0 + 1.0 - std::cos(kTwoPi * unit_phase(t));
}

double drive_lambda(const ModelSpec& spec, double t)
{
    require_family(spec, Family::Asymmetric, "drive_lambda");
    return -(kLambdaCritical - spec.a0) * std::cos(kTwoPi * unit_phase(t));
}

double force(const ModelSpec& spec, double x, double t)
{
    if (spec.family == Family::Symmetric) return drive_a(spec, t) * x - x * x * x;
    return x - x * x * x + drive_lambda(spec, t);
}

double potential(const ModelSpec& spec, double x, double t)
{
    const double quartic = 0.25 * x * x * x * x;
    if (spec.family == Family::Symmetric) return -0.5 * drive_a(spec, t) * x * x + quartic;
    return -0.5 * x * x + quartic - drive_lambda(spec, t) * x;
}

double linearization(const ModelSpec& spec, double x, double t)
{
    if (spec.family == Family::Symmetric) return drive_a(spec, t) - 3.0 * x * x;
    return 1.0 - 3.0 * x * x;
}

double curvature(const ModelSpec&, double x, double)
{
    return -6.0 * x;
}

std::vector<Equilibrium> equilibria(const ModelSpec& spec, double t)
{
    std::vector<Equilibrium> out;
    if (spec.family == Family::Symmetric) {
        const double a = drive_a(spec, t);
        if (a <= 0.0) {
            out.push_back({0.0, Stability::Marginal});
        } else {
            const double well = std::sqrt(a);
            out.push_back({-well, Stability::Stable});
            out.push_back({0.0, Stability::Unstable});
            out.push_back({well, Stability::Stable});
        }
    } else {
        // x - x^3 + lambda = 0  <=>  x^3 - x - lambda = 0
        for (const auto& r : depressed_cubic_roots(-1.0, -drive_lambda(spec, t))) {
            const auto stability =
                r.double_root ? Stability::Marginal : classify(linearization(spec, r.x, t));
            out.push_back({r.x, stability});
        }
    }
    std::erase_if(out, [&](const Equilibrium& e) { return std::abs(e.x) > spec.domain; });
    return out;
}

std::optional<double> barrier_height(const ModelSpec& spec, double t, Side side)
{
    const auto eq = equilibria(spec, t);
    auto barrier = [&](const Equilibrium& top, const Equilibrium& well) {
        return potential(spec, top.x, t) - potential(spec, well.x, t);
    };
    if (eq.size() == 3) return side == Side::FromRight ? barrier(eq[1], eq[2]) : barrier(eq[1], eq[0]);
    if (eq.size() == 2) {
        // One well merged with the saddle; the other still sits below the inflection.
        const bool right_merged = eq[1].stability == Stability::Marginal;
        if (side == Side::FromRight && right_merged) return std::nullopt;
        if (side == Side::FromLeft && !right_merged) return std::nullopt;
        return right_merged ? barrier(eq[1], eq[0]) : barrier(eq[0], eq[1]);
    }
    return std::nullopt;
}

double right_well(const ModelSpec& spec, double t)
{
    if (spec.family == Family::Symmetric) return std::sqrt(std::max(drive_a(spec, t), 0.0));
    return equilibria(spec, t).back().x;
}

double left_well(const ModelSpec& spec, double t)
{
    if (spec.family == Family::Symmetric) return -std::sqrt(std::max(drive_a(spec, t), 0.0));
    return equilibria(spec, t).front().x;
}

double saddle(const ModelSpec& spec, double t)
{
    if (spec.family == Family::Symmetric) return 0.0;
    const auto eq = equilibria(spec, t);
    if (eq.size() == 3) return eq[1].x;
    for (const auto& e : eq)
        if (e.stability == Stability::Marginal) return e.x;
    return kInflection;
}

double default_half_window(Family family)
{
    return family == Family::Symmetric ? 0.25 : 0.1;
}

}  // namespace resonance
