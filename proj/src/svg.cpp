#include "resonance/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace resonance {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 40.0;
constexpr std::size_t kMaxPoints = 2000;

struct Frame {
    double t_lo, t_hi, x_lo, x_hi;

    double px(double t) const { return kMargin + (t - t_lo) / (t_hi - t_lo) * (kWidth - 2 * kMargin); }
    double py(double x) const { return kHeight - kMargin - (x - x_lo) / (x_hi - x_lo) * (kHeight - 2 * kMargin); }
};

std::string point(const Frame& f, double t, double x)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", f.px(t), f.py(x));
    return buf;
}

template <class Fn>
void polyline(std::ostream& out, const char* cls, const char* style, std::size_t n, Fn sample)
{
    out << "  <polyline class=\"" << cls << "\" " << style << " points=\"";
    for (std::size_t i = 0; i < n; ++i) out << sample(i);
    out << "\"/>\n";
}

}  // namespace

void write_figure_svg(std::ostream& out, const ModelSpec& spec, const SamplePath& path)
{
    const double t_lo = path.t0;
    const double t_hi = path.time(path.size() - 1);
    double x_lo = -1.6, x_hi = 1.6;
    for (double x : path.xs) {
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
    }
    const Frame f{t_lo, t_hi, x_lo, x_hi};

    const std::size_t stride = std::max<std::size_t>(1, path.size() / kMaxPoints);
    const std::size_t n_path = (path.size() - 1) / stride + 1;
    constexpr std::size_t n_curve = 401;
    auto curve_t = [&](std::size_t i) { return t_lo + (t_hi - t_lo) * static_cast<double>(i) / (n_curve - 1); };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    const double y0 = std::clamp(f.py(0.0), kMargin, kHeight - kMargin);
    out << "  <line class=\"axis\" x1=\"" << kMargin << "\" y1=\"" << y0 << "\" x2=\"" << kWidth - kMargin
        << "\" y2=\"" << y0 << "\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";

    const char* heavy = "fill=\"none\" stroke=\"black\" stroke-width=\"3\"";
    polyline(out, "well", heavy, n_curve, [&](std::size_t i) {
        const double t = curve_t(i);
        return point(f, t, right_well(spec, t));
    });
    polyline(out, "well", heavy, n_curve, [&](std::size_t i) {
        const double t = curve_t(i);
        return point(f, t, left_well(spec, t));
    });
    polyline(out, "saddle", "fill=\"none\" stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"4 3\"",
             n_curve, [&](std::size_t i) {
                 const double t = curve_t(i);
                 return point(f, t, saddle(spec, t));
             });
    polyline(out, "path", "fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1\"", n_path, [&](std::size_t i) {
        const std::size_t k = std::min(i * stride, path.size() - 1);
        return point(f, path.time(k), path.xs[k]);
    });
    out << "</svg>\n";
}

}  // namespace resonance
