#ifndef TWOBEAM_BOHM_HPP
#define TWOBEAM_BOHM_HPP

// Guidance dynamics on the closed-form wavefield: velocity from the phase
// gradient, quantum potential from the amplitude curvature, adaptive
// trajectory integration, and bundle statistics.
//
// Guidance law (hbar = m = 1):  v = Im(grad psi / psi).
// Quantum potential:            Q = -(1/2) lap R / R,  R = |psi|,
// evaluated through rho = R^2 to stay in closed form:
//   Q = -lap rho / (4 rho) + |grad rho|^2 / (8 rho^2).
//
// Coherent mode guides on the summed field; incoherent mode guides each
// particle on its assigned packet alone.  Nodes of the coherent field are
// genuine singularities of v; the stepper shrinks around them and truncates
// (reported, not thrown) if it cannot stay above the density floor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "twobeam/errors.hpp"
#include "twobeam/geometry.hpp"
#include "twobeam/rng.hpp"
#include "twobeam/wavefield.hpp"

namespace twobeam {

struct GuidanceField {
    FieldConfig field;
    double density_floor_rel = 1e-12; // times instantaneous peak density

    double beam_speed() const { return field.packets[0].velocity.norm(); }
};

namespace detail {

struct LocalField {
    Cd psi;
    std::array<Cd, 2> grad;   // d psi / d{x,y}
    std::array<Cd, 2> second; // d2 psi / d{x,y}^2 (no mixed term needed)
    double rho;
};

// Assemble psi and its derivatives for the guiding wave: the weighted sum in
// coherent mode, or the single assigned packet in incoherent mode.
inline LocalField local_field(const GuidanceField& g, Vec2 pos, double t,
                              std::optional<PacketLabel> assignment) {
    LocalField lf{};
    const bool coherent = g.field.mode == FieldMode::coherent;
    if (!coherent && !assignment)
        throw Error("incoherent guidance requires a packet assignment");
    for (int i = 0; i < 2; ++i) {
        if (!coherent && (assignment == PacketLabel::c) != (i == 0)) continue;
        const PacketEval pe = eval_packet(g.field.packets[i], pos, t);
        const Cd wpsi = g.field.amplitudes[i] * pe.psi;
        lf.psi += wpsi;
        for (int q = 0; q < 2; ++q) {
            lf.grad[q] += wpsi * pe.dlog[q];
            lf.second[q] += wpsi * (pe.d2log[q] + pe.dlog[q] * pe.dlog[q]);
        }
    }
    lf.rho = std::norm(lf.psi);
    return lf;
}

inline Vec2 velocity_of(const LocalField& lf) {
    const Cd inv = 1.0 / lf.psi;
    return {(lf.grad[0] * inv).imag(), (lf.grad[1] * inv).imag()};
}

// Peak density of the guiding wave (not the mode density): what v and Q
// floors should be measured against.
inline double guide_peak(const GuidanceField& g, double t,
                         std::optional<PacketLabel> assignment) {
    if (g.field.mode == FieldMode::incoherent && assignment) {
        const int i = *assignment == PacketLabel::c ? 0 : 1;
        const PacketParams& p = g.field.packets[i];
        const double st = p.sigma(t);
        return std::norm(g.field.amplitudes[i]) / (2.0 * M_PI * st * st);
    }
    return peak_density(g.field, t);
}

} // namespace detail

// Im(grad psi / psi).  Throws NodeRegion below the density floor; trajectory
// stepping handles that by shrinking, so a throw here means the caller asked
// for a genuinely forbidden point.
inline Vec2 velocity(const GuidanceField& g, Vec2 pos, double t,
                     std::optional<PacketLabel> assignment = std::nullopt) {
    const detail::LocalField lf = detail::local_field(g, pos, t, assignment);
    const double floor = g.density_floor_rel * detail::guide_peak(g, t, assignment);
    if (lf.rho <= floor)
        throw NodeRegion("density below floor at requested point");
    return detail::velocity_of(lf);
}

struct QuantumPotentialSample {
    double q = 0.0;
    Vec2 at;
    double time = 0.0;
};

inline QuantumPotentialSample quantum_potential(const GuidanceField& g, Vec2 pos, double t,
                                                std::optional<PacketLabel> assignment = std::nullopt) {
    const detail::LocalField lf = detail::local_field(g, pos, t, assignment);
    const double floor = g.density_floor_rel * detail::guide_peak(g, t, assignment);
    if (lf.rho <= floor)
        throw NodeRegion("amplitude below floor at requested point");

    double grad_rho2 = 0.0;
    double lap_rho = 0.0;
    for (int q = 0; q < 2; ++q) {
        const double drho = 2.0 * (std::conj(lf.psi) * lf.grad[q]).real();
        grad_rho2 += drho * drho;
        lap_rho += 2.0 * (std::norm(lf.grad[q]) +
                          (std::conj(lf.psi) * lf.second[q]).real());
    }
    const double q_val = -lap_rho / (4.0 * lf.rho) + grad_rho2 / (8.0 * lf.rho * lf.rho);
    return QuantumPotentialSample{q_val, pos, t};
}

// ---------------------------------------------------------------------------
// Trajectory integration

enum class EndpointClass { C_side, D_side, undecided };

inline const char* to_string(EndpointClass e) {
    switch (e) {
        case EndpointClass::C_side: return "C_side";
        case EndpointClass::D_side: return "D_side";
        case EndpointClass::undecided: return "undecided";
    }
    return "?";
}

struct StepControl {
    double tol = 1e-8;            // per-step position error bound (step doubling)
    double h_init = 0.02;
    double h_min = 1e-7;
    double h_max = 0.1;
    double low_density_rel = 1e-6; // halve the step below this x peak
    double speed_factor = 10.0;    // halve the step above this x beam speed
};

struct TrajectoryPoint {
    double t;
    Vec2 pos;
    double density_rel; // guide density / instantaneous guide peak
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    Vec2 start;
    std::optional<PacketLabel> assignment;
    EndpointClass endpoint_class = EndpointClass::undecided;
    double min_density_seen = std::numeric_limits<double>::infinity(); // relative
    bool truncated = false; // NodeEncountered: stepper could not stay above floor
    int axis_crossings = 0;
    double max_turn_angle = 0.0; // radians, worst bend between consecutive segments
    std::vector<Vec2> snapshots; // positions at requested snapshot times
};

namespace detail {

struct StageEval {
    Vec2 v;
    bool ok;
};

inline StageEval stage(const GuidanceField& g, Vec2 pos, double t, double floor,
                       std::optional<PacketLabel> assignment) {
    const LocalField lf = local_field(g, pos, t, assignment);
    if (lf.rho <= floor) return {Vec2{}, false};
    return {velocity_of(lf), true};
}

// One classic RK4 step; fails if any stage lands below the density floor.
inline bool rk4_step(const GuidanceField& g, Vec2 y, double t, double h, double floor,
                     std::optional<PacketLabel> assignment, Vec2& out) {
    const StageEval k1 = stage(g, y, t, floor, assignment);
    if (!k1.ok) return false;
    const StageEval k2 = stage(g, y + 0.5 * h * k1.v, t + 0.5 * h, floor, assignment);
    if (!k2.ok) return false;
    const StageEval k3 = stage(g, y + 0.5 * h * k2.v, t + 0.5 * h, floor, assignment);
    if (!k3.ok) return false;
    const StageEval k4 = stage(g, y + h * k3.v, t + h, floor, assignment);
    if (!k4.ok) return false;
    out = y + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    return true;
}

} // namespace detail

// Explicit 4th-order integration with step doubling.  Each accepted step
// compares one full step against two half steps; the halved result is kept.
// The step also shrinks near low density or high speed (node neighborhoods)
// and lands exactly on every requested snapshot time and on t1.
inline Trajectory integrate_trajectory(const GuidanceField& g, Vec2 start,
                                       std::optional<PacketLabel> assignment, double t0,
                                       double t1, const StepControl& ctrl = StepControl{},
                                       const std::vector<double>& snapshot_times = {}) {
    Trajectory traj;
    traj.start = start;
    traj.assignment = assignment;

    double t = t0;
    Vec2 y = start;
    double peak = detail::guide_peak(g, t, assignment);
    double floor = g.density_floor_rel * peak;

    {
        const detail::LocalField lf0 = detail::local_field(g, y, t, assignment);
        if (lf0.rho <= floor)
            throw NodeRegion("trajectory start lies below the density floor");
        traj.points.push_back({t, y, lf0.rho / peak});
        traj.min_density_seen = lf0.rho / peak;
    }

    std::vector<double> snaps = snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    while (next_snap < snaps.size() && snaps[next_snap] <= t0) ++next_snap;

    const double vmax = ctrl.speed_factor * g.beam_speed();
    double h = ctrl.h_init;

    while (t < t1 - 1e-15) {
        peak = detail::guide_peak(g, t, assignment);
        floor = g.density_floor_rel * peak;

        // Local-condition shrink: near-node or high-speed regions need
        // resolution beyond what the error estimate alone requests.
        const detail::LocalField here = detail::local_field(g, y, t, assignment);
        if (here.rho < ctrl.low_density_rel * peak ||
            detail::velocity_of(here).norm() > vmax)
            h = std::max(ctrl.h_min, 0.5 * h);

        double h_cap = std::min(h, t1 - t);
        if (next_snap < snaps.size()) h_cap = std::min(h_cap, snaps[next_snap] - t);
        bool accepted = false;
        Vec2 y_next{};
        while (!accepted) {
            Vec2 full{}, mid{}, half{};
            const bool ok = detail::rk4_step(g, y, t, h_cap, floor, assignment, full) &&
                            detail::rk4_step(g, y, t, 0.5 * h_cap, floor, assignment, mid) &&
                            detail::rk4_step(g, mid, t + 0.5 * h_cap, 0.5 * h_cap, floor,
                                             assignment, half);
            const double err = ok ? (full - half).norm() : std::numeric_limits<double>::infinity();
            if (ok && err <= ctrl.tol) {
                y_next = half;
                accepted = true;
                if (err < ctrl.tol / 64.0) h = std::min(ctrl.h_max, 2.0 * h);
                else h = std::max(ctrl.h_min, 0.9 * h_cap);
            } else {
                if (h_cap <= ctrl.h_min * (1.0 + 1e-12)) {
                    traj.truncated = true; // NodeEncountered
                    break;
                }
                h_cap = std::max(ctrl.h_min, 0.5 * h_cap);
                h = h_cap;
            }
        }
        if (traj.truncated) break;

        const double y_prev = y.y;
        y = y_next;
        t += h_cap;

        const detail::LocalField lf = detail::local_field(g, y, t, assignment);
        const double drel = lf.rho / detail::guide_peak(g, t, assignment);
        traj.min_density_seen = std::min(traj.min_density_seen, drel);
        traj.points.push_back({t, y, drel});
        if ((y_prev - g.field.axis_y) * (y.y - g.field.axis_y) < 0.0) ++traj.axis_crossings;
        if (next_snap < snaps.size() && std::abs(t - snaps[next_snap]) < 1e-12) {
            traj.snapshots.push_back(y);
            ++next_snap;
        }
    }

    // Worst bend between consecutive polyline segments.
    for (std::size_t i = 1; i + 1 < traj.points.size(); ++i) {
        const Vec2 a = traj.points[i].pos - traj.points[i - 1].pos;
        const Vec2 b = traj.points[i + 1].pos - traj.points[i].pos;
        const double na = a.norm(), nb = b.norm();
        if (na < 1e-12 || nb < 1e-12) continue;
        const double cosang = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
        traj.max_turn_angle = std::max(traj.max_turn_angle, std::acos(cosang));
    }

    // Detector half-planes: the lower half is the straight-through
    // destination of beam c (detector C), the upper half is detector D.
    const double dead = g.field.packets[0].sigma0 / 10.0;
    const double yf = traj.points.back().pos.y - g.field.axis_y;
    if (traj.truncated || std::abs(yf) <= dead) traj.endpoint_class = EndpointClass::undecided;
    else traj.endpoint_class = yf < 0.0 ? EndpointClass::C_side : EndpointClass::D_side;
    return traj;
}

// ---------------------------------------------------------------------------
// Bundles

struct BundleOptions {
    std::size_t n = 1000;
    double t0 = 0.0;
    double t1 = 8.0;
    std::uint64_t seed = 42;
    // Incoherent runs may pin every particle to one packet; otherwise the
    // sampler assigns proportionally to |amplitude|^2.
    std::optional<PacketLabel> force_assignment;
    StepControl ctrl;
    int threads = 1;
    std::vector<double> snapshot_times;
    bool keep_trajectories = false;
    std::size_t keep_stride = 1;
};

struct BundleReport {
    std::size_t n = 0;
    std::size_t c_side = 0;
    std::size_t d_side = 0;
    std::size_t undecided = 0;
    std::size_t truncated = 0;
    std::size_t axis_crossings_total = 0;
    std::size_t started_upper = 0;        // sampled from packet c
    std::size_t upper_ended_d_side = 0;   // packet-c starts that fired D
    std::size_t lower_ended_c_side = 0;   // packet-d starts that fired C
    double max_turn_angle = 0.0;          // max over trajectories
    double mean_turn_angle = 0.0;         // mean of per-trajectory maxima
    double min_density_seen = std::numeric_limits<double>::infinity();
    std::vector<std::vector<Vec2>> snapshots; // [snapshot time][trajectory index]
    std::vector<Trajectory> kept;             // every keep_stride-th trajectory
};

// Density-weighted initial point for one trajectory.  |psi(t0)|^2 of a free
// Gaussian packet is exactly N(center(t0), sigma(t0)^2 I), so sampling is
// closed-form too.
inline std::pair<Vec2, PacketLabel> sample_start(const GuidanceField& g, double t0,
                                                 std::uint64_t seed, std::uint64_t index,
                                                 std::optional<PacketLabel> force) {
    SplitMix64 rng = substream(seed, index);
    PacketLabel label;
    if (force) {
        label = *force;
    } else {
        const double wc = std::norm(g.field.amplitudes[0]);
        const double wtot = wc + std::norm(g.field.amplitudes[1]);
        label = rng.next_unit() * wtot < wc ? PacketLabel::c : PacketLabel::d;
    }
    const PacketParams& p = g.field.packet(label);
    double g0, g1;
    rng.next_gaussian_pair(g0, g1);
    const double st = p.sigma(t0);
    return {p.center(t0) + Vec2{st * g0, st * g1}, label};
}

inline BundleReport trajectory_bundle(const GuidanceField& g, const BundleOptions& opt) {
    if (opt.n < 1) throw Error("bundle needs n >= 1");
    BundleReport rep;
    rep.n = opt.n;
    rep.snapshots.assign(opt.snapshot_times.size(), std::vector<Vec2>(opt.n));

    std::vector<Trajectory> results(opt.n);
    std::vector<PacketLabel> labels(opt.n);

    const auto worker = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto [start, label] = sample_start(g, opt.t0, opt.seed, i, opt.force_assignment);
            labels[i] = label;
            const std::optional<PacketLabel> assign =
                g.field.mode == FieldMode::incoherent ? std::optional<PacketLabel>(label)
                                                      : std::nullopt;
            results[i] = integrate_trajectory(g, start, assign, opt.t0, opt.t1, opt.ctrl,
                                              opt.snapshot_times);
        }
    };

    const int nthreads = std::max(1, opt.threads);
    if (nthreads == 1) {
        worker(0, opt.n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (opt.n + nthreads - 1) / nthreads;
        for (int w = 0; w < nthreads; ++w) {
            const std::size_t lo = std::min(opt.n, w * chunk);
            const std::size_t hi = std::min(opt.n, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // Aggregation runs in index order: identical output for any thread count.
    double turn_sum = 0.0;
    for (std::size_t i = 0; i < opt.n; ++i) {
        const Trajectory& tr = results[i];
        switch (tr.endpoint_class) {
            case EndpointClass::C_side: ++rep.c_side; break;
            case EndpointClass::D_side: ++rep.d_side; break;
            case EndpointClass::undecided: ++rep.undecided; break;
        }
        if (tr.truncated) ++rep.truncated;
        rep.axis_crossings_total += tr.axis_crossings;
        const bool upper = labels[i] == PacketLabel::c;
        if (upper) {
            ++rep.started_upper;
            if (tr.endpoint_class == EndpointClass::D_side) ++rep.upper_ended_d_side;
        } else if (tr.endpoint_class == EndpointClass::C_side) {
            ++rep.lower_ended_c_side;
        }
        rep.max_turn_angle = std::max(rep.max_turn_angle, tr.max_turn_angle);
        turn_sum += tr.max_turn_angle;
        rep.min_density_seen = std::min(rep.min_density_seen, tr.min_density_seen);
        for (std::size_t k = 0; k < tr.snapshots.size(); ++k) rep.snapshots[k][i] = tr.snapshots[k];
        if (opt.keep_trajectories && i % opt.keep_stride == 0) rep.kept.push_back(tr);
    }
    rep.mean_turn_angle = turn_sum / static_cast<double>(opt.n);
    return rep;
}

// ---------------------------------------------------------------------------
// Equivariance diagnostic

// Total-variation distance between the empirical distribution of `points`
// and the exact mode density at time t, over a bins x bins grid spanning
// every packet center +- 8 sigma(t) per axis (density outside is < 1e-13 of
// peak).  Mass outside the box is compared as one extra cell.
inline double equivariance_tv(const FieldConfig& f, const std::vector<Vec2>& points, double t,
                              std::size_t bins = 40) {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const PacketParams& p : {f.packets[0], f.packets[1]}) {
        const Vec2 c = p.center(t);
        const double r = 8.0 * p.sigma(t);
        xlo = std::min(xlo, c.x - r); xhi = std::max(xhi, c.x + r);
        ylo = std::min(ylo, c.y - r); yhi = std::max(yhi, c.y + r);
    }
    const double dx = (xhi - xlo) / static_cast<double>(bins);
    const double dy = (yhi - ylo) / static_cast<double>(bins);

    std::vector<double> p_hist(bins * bins, 0.0);
    std::size_t inside = 0;
    for (const Vec2& pt : points) {
        if (pt.x < xlo || pt.x >= xhi || pt.y < ylo || pt.y >= yhi) continue;
        const std::size_t ix = static_cast<std::size_t>((pt.x - xlo) / dx);
        const std::size_t iy = static_cast<std::size_t>((pt.y - ylo) / dy);
        p_hist[std::min(ix, bins - 1) * bins + std::min(iy, bins - 1)] += 1.0;
        ++inside;
    }
    const double npts = static_cast<double>(points.size());
    for (double& v : p_hist) v /= npts;

    // Exact cell masses by composite midpoint quadrature, subdivided finely
    // enough to resolve the fringe scale.
    const double res = f.fringe_spacing() / 8.0;
    const std::size_t sx = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(dx / res)));
    const std::size_t sy = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(dy / res)));
    double q_inside = 0.0;
    double tv = 0.0;
    for (std::size_t ix = 0; ix < bins; ++ix)
        for (std::size_t iy = 0; iy < bins; ++iy) {
            double q = 0.0;
            for (std::size_t a = 0; a < sx; ++a)
                for (std::size_t b = 0; b < sy; ++b) {
                    const Vec2 pt{xlo + (ix + (a + 0.5) / sx) * dx,
                                  ylo + (iy + (b + 0.5) / sy) * dy};
                    q += density(f, pt, t);
                }
            q *= dx * dy / static_cast<double>(sx * sy);
            q_inside += q;
            tv += std::abs(p_hist[ix * bins + iy] - q);
        }
    tv += std::abs((1.0 - static_cast<double>(inside) / npts) - (1.0 - q_inside));
    return 0.5 * tv;
}

} // namespace twobeam

#endif
