#pragma once

// Periodically modulated double-well potentials on slow time t.
//
//   Symmetric:   V(x,t) = -a(t) x^2 / 2 + x^4 / 4,   a(t) = a0 + 1 - cos(2 pi t)
//   Asymmetric:  V(x,t) = -x^2 / 2 + x^4 / 4 - lambda(t) x,
//                lambda(t) = -(lambda_c - a0) cos(2 pi t)
//
// The force is f = -dV/dx. Both families have period one in t.

#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

namespace resonance {

enum class Family { Symmetric, Asymmetric };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

/// Critical tilt 2/(3 sqrt 3): the asymmetric potential has two wells iff |lambda| < this.
inline constexpr double kLambdaCritical = 2.0 / 3.0 * std::numbers::inv_sqrt3;
/// Inflection point 1/sqrt 3 of x - x^3, where the right well meets the saddle.
inline constexpr double kInflection = std::numbers::inv_sqrt3;

inline constexpr double kDefaultDomain = 3.0;

struct ModelSpec {
    Family family = Family::Symmetric;
    double a0 = 0.02;
    /// Half-width d of the admissible position interval [-d, d].
    double domain = kDefaultDomain;

    static ModelSpec symmetric(double a0, double domain = kDefaultDomain);
    static ModelSpec asymmetric(double a0, double domain = kDefaultDomain);

    /// Throws UsageError unless a0 >= 0 (and a0 < lambda_c for the asymmetric family).
    void validate() const;

    bool operator==(const ModelSpec&) const = default;
};

/// Fractional part of t in [-1/2, 1/2); exact for representable t, so drives are exactly periodic.
double unit_phase(double t);

double drive_a(const ModelSpec& spec, double t);
double drive_lambda(const ModelSpec& spec, double t);

double force(const ModelSpec& spec, double x, double t);
double potential(const ModelSpec& spec, double x, double t);

/// df/dx at (x, t).
double linearization(const ModelSpec& spec, double x, double t);
/// d^2 f/dx^2 at (x, t); equal to -6x for both families.
double curvature(const ModelSpec& spec, double x, double t);

enum class Stability { Stable, Unstable, Marginal };

struct Equilibrium {
    double x;
    Stability stability;
};

/// Real roots of force(., t) inside the domain, ascending.
std::vector<Equilibrium> equilibria(const ModelSpec& spec, double t);

enum class Side { FromRight, FromLeft };

/// V(saddle) - V(well) for the chosen well; empty once that well has merged with the saddle.
std::optional<double> barrier_height(const ModelSpec& spec, double t, Side side);

// Branch helpers used as crossing levels. They assume the branch exists at t.
double right_well(const ModelSpec& spec, double t);
double left_well(const ModelSpec& spec, double t);
double saddle(const ModelSpec& spec, double t);

/// Default half-window T around the minimal-barrier instant.
double default_half_window(Family family);

}  // namespace resonance
