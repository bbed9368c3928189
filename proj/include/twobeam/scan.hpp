#ifndef TWOBEAM_SCAN_HPP
#define TWOBEAM_SCAN_HPP

// Small-aperture detector swept along a line: count rates, node location,
// and the aperture overlap integral that diagnoses which-path consistency
// failure in the continuum.
//
// A detector is a top-hat square of half-width `aperture` centered at
// `center`.  Its rate is the integral of the mode density over the aperture,
// sampled either at a fixed instant, averaged over a time window, or at the
// arrival time of an assigned beam (the time the packet center passes
// closest to the detector).  All integrals share one composite
// Gauss-Legendre rule, which makes the additivity identity
//   coherent rate = diag_c + diag_d + 2 Re(overlap)
// hold to machine precision by construction.

#include <cmath>
#include <complex>
#include <cstddef>
#include <variant>
#include <vector>

#include "twobeam/errors.hpp"
#include "twobeam/geometry.hpp"
#include "twobeam/wavefield.hpp"

namespace twobeam {

struct SampleInstant {
    double time = 0.0;
};
struct SampleWindow {
    double t_begin = 0.0;
    double t_end = 1.0;
    std::size_t steps = 40; // Simpson subintervals (even)
};
struct SampleArrival {
    PacketLabel beam = PacketLabel::c;
};
using SampleMode = std::variant<SampleInstant, SampleWindow, SampleArrival>;

struct DetectorSpec {
    Vec2 center;
    double aperture = 0.01; // half-width of the square top-hat
    SampleMode sample = SampleInstant{0.0};
};

struct RateBreakdown {
    double rate = 0.0;   // mode-appropriate total
    double diag_c = 0.0; // per-packet aperture integrals (weights included)
    double diag_d = 0.0;
    Cd overlap{0.0, 0.0}; // integral of conj(w_c psi_c) w_d psi_d
};

namespace detail {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr double kGlNode[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr double kGlWeight[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Composite GL panels sized to resolve both the packet envelope and the
// fringe oscillation.
inline std::size_t panel_count(const FieldConfig& f, double halfwidth, double t) {
    const double st = f.packets[0].sigma(t);
    double res = st / 2.0;
    if (f.mode == FieldMode::coherent) res = std::min(res, f.fringe_spacing() / 4.0);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(2.0 * halfwidth / res)));
}

inline RateBreakdown aperture_integral(const FieldConfig& f, const DetectorSpec& d, double t) {
    RateBreakdown out;
    const double a = d.aperture;
    const std::size_t panels = panel_count(f, a, t);
    const double w = 2.0 * a / static_cast<double>(panels);
    for (std::size_t px = 0; px < panels; ++px)
        for (std::size_t py = 0; py < panels; ++py) {
            const double x0 = d.center.x - a + px * w;
            const double y0 = d.center.y - a + py * w;
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) {
                    const Vec2 pt{x0 + 0.5 * w * (1.0 + kGlNode[i]),
                                  y0 + 0.5 * w * (1.0 + kGlNode[j])};
                    const double wt = 0.25 * w * w * kGlWeight[i] * kGlWeight[j];
                    const FieldSample s = field_amplitude(f, pt, t);
                    out.rate += wt * s.density;
                    out.diag_c += wt * std::norm(s.psi_each[0]);
                    out.diag_d += wt * std::norm(s.psi_each[1]);
                    out.overlap += wt * std::conj(s.psi_each[0]) * s.psi_each[1];
                }
        }
    return out;
}

inline double arrival_time(const FieldConfig& f, PacketLabel beam, Vec2 p) {
    const PacketParams& pk = f.packet(beam);
    const double v2 = pk.velocity.norm2();
    if (v2 == 0.0) return 0.0;
    return std::max(0.0, (p - pk.center0).dot(pk.velocity) / v2);
}

inline RateBreakdown sampled_integral(const FieldConfig& f, const DetectorSpec& d) {
    if (const auto* inst = std::get_if<SampleInstant>(&d.sample))
        return aperture_integral(f, d, inst->time);
    if (const auto* arr = std::get_if<SampleArrival>(&d.sample))
        return aperture_integral(f, d, arrival_time(f, arr->beam, d.center));
    const auto& win = std::get<SampleWindow>(d.sample);
    // Simpson average over the window.
    std::size_t n = win.steps;
    if (n < 2) n = 2;
    if (n % 2 != 0) ++n;
    const double h = (win.t_end - win.t_begin) / static_cast<double>(n);
    RateBreakdown acc;
    double wsum = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double wt = (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        const RateBreakdown r = aperture_integral(f, d, win.t_begin + k * h);
        acc.rate += wt * r.rate;
        acc.diag_c += wt * r.diag_c;
        acc.diag_d += wt * r.diag_d;
        acc.overlap += wt * r.overlap;
        wsum += wt;
    }
    acc.rate /= wsum;
    acc.diag_c /= wsum;
    acc.diag_d /= wsum;
    acc.overlap /= wsum;
    return acc;
}

} // namespace detail

inline RateBreakdown count_rate_breakdown(const FieldConfig& f, const DetectorSpec& d) {
    if (d.aperture <= 0.0) throw Error("detector aperture must be positive");
    return detail::sampled_integral(f, d);
}

// Aperture integral of the density; proportional to Pr(detector fires).
inline double count_rate(const FieldConfig& f, const DetectorSpec& d) {
    return count_rate_breakdown(f, d).rate;
}

// The off-diagonal term whose magnitude measures which-path consistency
// failure at this detector: integral over the aperture of
// conj(w_c psi_c) w_d psi_d.  Zero (to packet-separation accuracy) wherever
// only one beam reaches the detector.
inline Cd aperture_decoherence(const FieldConfig& f, const DetectorSpec& d) {
    if (f.mode != FieldMode::coherent)
        throw Error("aperture_decoherence is defined for the coherent field");
    return count_rate_breakdown(f, d).overlap;
}

// Rates at n detector positions along `line`, using d_template for aperture
// and sampling; nodes are local minima below node_tol x curve max, refined
// on the continuous rate.
inline ScanCurve sweep(const FieldConfig& f, const Segment& line, const DetectorSpec& d_template,
                       std::size_t n, double node_tol = 1e-3) {
    if (n < 3) throw Error("sweep needs n >= 3 positions");
    ScanCurve curve;
    curve.line = line;
    curve.node_tol = node_tol;
    curve.fringe_free = f.mode == FieldMode::incoherent;
    curve.aperture_warning =
        f.mode == FieldMode::coherent && d_template.aperture >= f.fringe_spacing() / 4.0;
    if (const auto* inst = std::get_if<SampleInstant>(&d_template.sample))
        curve.time = inst->time;

    const double len = line.length();
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(n - 1);
        DetectorSpec d = d_template;
        d.center = line.point(u);
        const RateBreakdown r = count_rate_breakdown(f, d);
        curve.positions.push_back(u * len);
        curve.values.push_back(r.rate);
        curve.overlap_abs.push_back(std::abs(r.overlap));
    }
    const auto rate_at = [&](double s) {
        DetectorSpec d = d_template;
        d.center = line.point(s / len);
        return count_rate(f, d);
    };
    curve.nodes = detail::locate_nodes(rate_at, curve.positions, curve.values, node_tol);
    return curve;
}

} // namespace twobeam

#endif
