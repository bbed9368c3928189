#ifndef TWOBEAM_WAVEFIELD_HPP
#define TWOBEAM_WAVEFIELD_HPP

// Closed-form wavefield for two converging free Gaussian beams, hbar = m = 1.
//
// One-dimensional packet with initial density standard deviation sigma0,
// center x0, group velocity v (= wavevector in these units):
//
//   psi(x,t) = (2 pi sigma0^2)^(-1/4) z^(-1/2)
//              exp( -xp^2 / (4 sigma0^2 z) + i (v (x - x0) - v^2 t / 2) )
//   z  = 1 + i t / (2 sigma0^2),   xp = x - x0 - v t
//
// This solves i dpsi/dt = -(1/2) d2psi/dx2 exactly and stays normalized; the
// 2D packet is the product of one per axis.  Everything downstream (density,
// velocity field, quantum potential) is evaluated from these closed forms --
// there is no grid solver anywhere.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "twobeam/errors.hpp"
#include "twobeam/geometry.hpp"

namespace twobeam {

using Cd = std::complex<double>;

enum class PacketLabel { c, d }; // c: off mirror M1 (upper), d: off mirror M2 (lower)

struct PacketParams {
    Vec2 center0;
    Vec2 velocity;
    double sigma0 = 1.0;
    PacketLabel label = PacketLabel::c;

    Vec2 center(double t) const { return center0 + velocity * t; }
    double sigma(double t) const {
        const double tau = t / (2.0 * sigma0 * sigma0);
        return sigma0 * std::sqrt(1.0 + tau * tau);
    }
};

// Value and per-axis log-derivatives of one 2D packet at (x, t).  The log
// form keeps gradient and Laplacian assembly exact and cheap:
//   d_psi/d_q   = psi * dlog[q]
//   d2_psi/d_q2 = psi * (d2log[q] + dlog[q]^2)
struct PacketEval {
    Cd psi;
    std::array<Cd, 2> dlog;
    std::array<Cd, 2> d2log;
};

inline PacketEval eval_packet(const PacketParams& p, Vec2 pos, double t) {
    const double s2 = p.sigma0 * p.sigma0;
    const Cd z{1.0, t / (2.0 * s2)};
    const Cd inv4s2z = 1.0 / (4.0 * s2 * z);

    PacketEval out;
    // (2 pi s2)^(-1/4) z^(-1/2) per axis; two axes folded together.
    out.psi = std::pow(2.0 * M_PI * s2, -0.5) / z;
    const double coords[2] = {pos.x, pos.y};
    const double cents[2] = {p.center0.x, p.center0.y};
    const double vels[2] = {p.velocity.x, p.velocity.y};
    Cd expo{0.0, 0.0};
    for (int q = 0; q < 2; ++q) {
        const double xp = coords[q] - cents[q] - vels[q] * t;
        expo += -xp * xp * inv4s2z +
                Cd{0.0, vels[q] * (coords[q] - cents[q]) - 0.5 * vels[q] * vels[q] * t};
        out.dlog[q] = -2.0 * xp * inv4s2z + Cd{0.0, vels[q]};
        out.d2log[q] = -2.0 * inv4s2z;
    }
    out.psi *= std::exp(expo);
    return out;
}

inline Cd packet_amplitude(const PacketParams& p, Vec2 pos, double t) {
    return eval_packet(p, pos, t).psi;
}

enum class FieldMode { coherent, incoherent };

struct FieldSample {
    Cd psi;                      // coherent: weighted sum; incoherent: unused (0)
    std::array<Cd, 2> psi_each;  // weighted per-packet amplitudes, [c, d]
    double density = 0.0;        // mode-appropriate density
    Vec2 at;
    double time = 0.0;
};

struct FieldConfig {
    std::array<PacketParams, 2> packets; // [c, d]
    FieldMode mode = FieldMode::coherent;
    std::array<Cd, 2> amplitudes = {Cd{1.0 / M_SQRT2, 0.0}, Cd{1.0 / M_SQRT2, 0.0}};
    bool symmetric = false;   // geometry mirror-symmetric about y = axis_y
    double axis_y = 0.0;

    const PacketParams& packet(PacketLabel l) const {
        return packets[l == PacketLabel::c ? 0 : 1];
    }

    // |v_perp| of each beam relative to the symmetry axis; sets the fringe
    // scale pi/k_perp in the overlap region.
    double k_perp() const { return std::abs(packets[0].velocity.y); }
    double fringe_spacing() const { return M_PI / k_perp(); }

    // Time and place where the beam centerlines meet the symmetry axis.
    double crossing_time() const {
        return (axis_y - packets[0].center0.y) / packets[0].velocity.y;
    }
    Vec2 crossing_point() const { return packets[0].center(crossing_time()); }

    // Upper bound on |<psi_c|psi_d>| at t = 0 (separation term only; the
    // velocity mismatch term can only shrink it).
    double initial_overlap_bound() const {
        const double sep2 = (packets[0].center0 - packets[1].center0).norm2();
        const double s2 = packets[0].sigma0 * packets[0].sigma0;
        return std::exp(-sep2 / (8.0 * s2));
    }
};

// The scenario every bundled experiment runs unless overridden: two beams of
// width sigma0 = 2 launched at (0, +-20) with velocities (10, -+5).  They
// cross at (40, 0) at t = 4 with k_perp = 5, so overlap fringes have spacing
// pi/5 and several of them fit inside the envelope.
inline FieldConfig make_default_field(FieldMode mode) {
    FieldConfig f;
    f.packets[0] = PacketParams{{0.0, 20.0}, {10.0, -5.0}, 2.0, PacketLabel::c};
    f.packets[1] = PacketParams{{0.0, -20.0}, {10.0, 5.0}, 2.0, PacketLabel::d};
    f.mode = mode;
    f.symmetric = true;
    f.axis_y = 0.0;
    return f;
}

inline FieldSample field_amplitude(const FieldConfig& f, Vec2 pos, double t) {
    FieldSample s;
    s.at = pos;
    s.time = t;
    for (int i = 0; i < 2; ++i)
        s.psi_each[i] = f.amplitudes[i] * packet_amplitude(f.packets[i], pos, t);
    if (f.mode == FieldMode::coherent) {
        s.psi = s.psi_each[0] + s.psi_each[1];
        s.density = std::norm(s.psi);
    } else {
        s.psi = Cd{0.0, 0.0};
        s.density = std::norm(s.psi_each[0]) + std::norm(s.psi_each[1]);
    }
    return s;
}

inline double density(const FieldConfig& f, Vec2 pos, double t) {
    return field_amplitude(f, pos, t).density;
}

// Cheap instantaneous peak-density estimate: the exact density at the packet
// centers and at their midpoint (which is the central antinode once the
// beams overlap).  Used only to scale relative floors.
inline double peak_density(const FieldConfig& f, double t) {
    const Vec2 c0 = f.packets[0].center(t);
    const Vec2 c1 = f.packets[1].center(t);
    double peak = std::max(density(f, c0, t), density(f, c1, t));
    peak = std::max(peak, density(f, (c0 + c1) * 0.5, t));
    return peak;
}

// ---------------------------------------------------------------------------
// Profiles along a segment, with node location

struct ScanCurve {
    Segment line;
    double time = 0.0;
    std::vector<double> positions;   // arclength along the segment
    std::vector<double> values;      // density (profiles) or count rate (sweeps)
    std::vector<double> overlap_abs; // |aperture cross term| per position (sweeps)
    std::vector<double> nodes;       // refined arclength positions of near-zero minima
    double node_tol = 1e-3;          // relative to the curve maximum
    bool fringe_free = false;        // set for incoherent-mode profiles
    bool aperture_warning = false;   // aperture too coarse to resolve fringes
};

namespace detail {

// Golden-section minimization; deterministic fixed iteration count.
template <typename F>
inline double refine_minimum(const F& f, double lo, double hi) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

// Interior local minima below node_tol * max, refined on the continuous
// curve.  Endpoints are never nodes.
template <typename F>
inline std::vector<double> locate_nodes(const F& f, const std::vector<double>& us,
                                        const std::vector<double>& vals, double node_tol) {
    double mx = 0.0;
    for (double v : vals) mx = std::max(mx, v);
    std::vector<double> nodes;
    if (mx <= 0.0) return nodes;
    for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
        if (vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] && vals[i] < node_tol * mx) {
            const double u = refine_minimum(f, us[i - 1], us[i + 1]);
            if (f(u) < node_tol * mx) nodes.push_back(u);
        }
    }
    return nodes;
}

} // namespace detail

// Density profile along `line` at time t, n >= 3 samples.  Incoherent-mode
// profiles are still returned, flagged fringe_free; they have no
// interference nodes by construction.
inline ScanCurve fringe_profile(const FieldConfig& f, const Segment& line, double t,
                                std::size_t n, double node_tol = 1e-3) {
    if (n < 3) throw Error("fringe_profile needs n >= 3 samples");
    ScanCurve curve;
    curve.line = line;
    curve.time = t;
    curve.node_tol = node_tol;
    curve.fringe_free = f.mode == FieldMode::incoherent;

    const double len = line.length();
    curve.positions.reserve(n);
    curve.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(n - 1);
        curve.positions.push_back(u * len);
        curve.values.push_back(density(f, line.point(u), t));
    }
    const auto along = [&](double s) { return density(f, line.point(s / len), t); };
    curve.nodes = detail::locate_nodes(along, curve.positions, curve.values, node_tol);
    return curve;
}

} // namespace twobeam

#endif
