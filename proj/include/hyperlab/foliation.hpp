// foliation.hpp — one-dimensional invariant foliations as computational
// objects: traced leaf segments, leafwise Jacobians, the truncated Δ_n
// product densities, and leafwise dynamical balls.
//
// A leaf is an arclength-parameterized polyline through an anchor point,
// traced by a Heun predictor-corrector step along the invariant line field;
// nodes live in lift coordinates so a leaf may wrap around the torus while
// its arclength stays strictly increasing.
//
// The density machinery follows the product construction
//     Δ_n(x,z) = Π_{i=1..n} J(f^{-i}x) / J(f^{-i}z),
//     ρ_n(z)   = Δ_n(x,z) / ∫ Δ_n(x,·)
// with J(w) = ‖Df(w) e_σ(w)‖ the leafwise Jacobian; backward orbits use the
// exact factor inverses, never a Newton solve.  Truncation is certified by
// the measured geometric decay of the Cauchy gaps.

#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "algebra.hpp"
#include "cocycle.hpp"
#include "maps.hpp"

namespace hyperlab::foliation {

using cocycle::ConeCollapse;
using maps::SmoothTorusMap;

struct StepRejected : std::runtime_error {
    explicit StepRejected(const std::string& m) : std::runtime_error(m) {}
};
struct TraceTooShort : std::runtime_error {
    explicit TraceTooShort(const std::string& m) : std::runtime_error(m) {}
};

inline constexpr double kLeafArclengthCap = 2.0;  // plaque cap, a few fundamental domains
inline constexpr double kMinStep = 1e-6;
inline constexpr double kMaxTurnPerStep = 0.15;   // radians

// ── leaf segments ────────────────────────────────────────────────────────────

struct LeafSegment {
    int sigma = 0;
    int dim = 0;
    Vec anchor;                      // reduced
    std::vector<Vec> node_lifts;     // ordered by arclength, lift coordinates
    std::vector<Vec> node_dirs;      // unit tangents, orientation-coherent
    std::vector<double> arclens;     // signed cumulative arclength, 0 at anchor
    int anchor_index = 0;
    double step = 0;

    double min_arclen() const { return arclens.front(); }
    double max_arclen() const { return arclens.back(); }
    size_t size() const { return node_lifts.size(); }

    // linear interpolation in lift coordinates
    Vec lift_at(double s) const {
        if (s < arclens.front() - 1e-12 || s > arclens.back() + 1e-12)
            throw TraceTooShort("LeafSegment: arclength " + std::to_string(s) + " outside trace");
        size_t hi = 1;
        while (hi + 1 < arclens.size() && arclens[hi] < s) ++hi;
        double a = arclens[hi - 1], b = arclens[hi];
        double t = (b > a) ? (s - a) / (b - a) : 0.0;
        return node_lifts[hi - 1] + t * (node_lifts[hi] - node_lifts[hi - 1]);
    }
    Vec point_at(double s) const { return algebra::reduce_mod1_vec(lift_at(s)); }
};

namespace detail {

inline Vec oriented_direction(const SmoothTorusMap& f, const Vec& reduced, int sigma,
                              const Vec& reference) {
    Vec e = cocycle::bundle_direction(f, reduced, sigma);
    if (dot(e, reference) < 0) e *= -1.0;
    return e;
}

}  // namespace detail

inline LeafSegment trace_leaf(const SmoothTorusMap& f, int sigma, const Vec& x, double h,
                              double half_length) {
    if (half_length <= 0 || h <= 0) throw std::invalid_argument("trace_leaf: need h, T > 0");
    if (half_length > kLeafArclengthCap)
        throw TraceTooShort("trace_leaf: requested half-length exceeds the plaque cap 2.0");
    const Vec anchor = algebra::reduce_mod1_vec(x);
    const Vec e0 = cocycle::bundle_direction(f, anchor, sigma);

    auto trace_side = [&](double direction) {
        std::vector<Vec> lifts;
        std::vector<Vec> dirs;
        std::vector<double> arcs;
        Vec z = anchor;  // lift coordinates, starts at the reduced anchor
        Vec e = e0 * direction;
        double s = 0, hcur = h;
        while (s < half_length) {
            // stretch the final step instead of emitting a sub-half-step node
            double remaining = half_length - s;
            double hstep = (remaining < 1.4 * hcur) ? remaining + 0.05 * hcur : hcur;
            Vec zp = z + hstep * e;
            Vec ep = detail::oriented_direction(f, algebra::reduce_mod1_vec(zp), sigma, e);
            double turn = std::acos(std::min(1.0, dot(normalized(e), normalized(ep))));
            if (turn > kMaxTurnPerStep) {
                hcur *= 0.5;
                if (hcur < kMinStep)
                    throw StepRejected("trace_leaf: curvature forces h below h_min");
                continue;
            }
            Vec mid = 0.5 * (e + ep);
            Vec znext = z + hstep * normalized(mid);
            Vec enext = detail::oriented_direction(f, algebra::reduce_mod1_vec(znext), sigma, e);
            double ds = norm(znext - z);
            z = znext;
            e = enext;
            s += ds;
            lifts.push_back(z);
            dirs.push_back(e);
            arcs.push_back(s);
        }
        return std::tuple{lifts, dirs, arcs};
    };

    auto [fw_l, fw_d, fw_a] = trace_side(+1.0);
    auto [bw_l, bw_d, bw_a] = trace_side(-1.0);

    LeafSegment seg;
    seg.sigma = sigma;
    seg.dim = f.dim();
    seg.anchor = anchor;
    seg.step = h;
    for (size_t i = bw_l.size(); i-- > 0;) {
        seg.node_lifts.push_back(bw_l[i]);
        seg.node_dirs.push_back(-bw_d[i]);  // flip so every tangent points toward +s
        seg.arclens.push_back(-bw_a[i]);
    }
    seg.anchor_index = static_cast<int>(seg.node_lifts.size());
    seg.node_lifts.push_back(anchor);
    seg.node_dirs.push_back(e0);
    seg.arclens.push_back(0.0);
    for (size_t i = 0; i < fw_l.size(); ++i) {
        seg.node_lifts.push_back(fw_l[i]);
        seg.node_dirs.push_back(fw_d[i]);
        seg.arclens.push_back(fw_a[i]);
    }
    return seg;
}

// ── leafwise Jacobian and the Δ_n products ───────────────────────────────────

inline double leafwise_jacobian(const SmoothTorusMap& f, const Vec& reduced, int sigma) {
    return norm(f.jacobian(reduced) * cocycle::bundle_direction(f, reduced, sigma));
}

namespace detail {

// Backward orbits of leaf points must stay on the leaf: any transverse error
// (the O(h²) polyline defect is enough) grows like λ_maxⁿ under f^{-1} and
// destroys the Δ products.  After each inverse step the companion point is
// re-expressed in the invariant frame at the anchor's backward image and only
// the σ-component is kept.
inline Vec constrain_to_leaf(const SmoothTorusMap& f, int sigma, const Vec& anchor, const Vec& z) {
    const int d = f.dim();
    Mat frame(d, d);
    for (int s = 0; s < d; ++s) frame.set_col(s, cocycle::bundle_direction(f, anchor, s));
    Vec c = solve(frame, algebra::nearest_lift(anchor, z));
    return algebra::reduce_mod1_vec(anchor + c[sigma] * frame.col(sigma));
}

}  // namespace detail

struct DeltaResult {
    double value = 1.0;        // Δ_n(x, z)
    double theta = 0.0;        // measured backward contraction factor along the leaf
    double tail_bound = 0.0;   // C·θⁿ-style bound on |Δ − Δ_n| / Δ_n
    int depth = 0;
};

inline DeltaResult delta_n(const SmoothTorusMap& f, int sigma, const Vec& x, const Vec& z, int n) {
    DeltaResult res;
    res.depth = n;
    if (n == 0) return res;
    Vec xw = algebra::reduce_mod1_vec(x);
    Vec zw = algebra::reduce_mod1_vec(z);
    double log_delta = 0;
    double d_first = 0, d_last = 0, last_increment = 0;
    for (int i = 1; i <= n; ++i) {
        xw = f.inverse_eval(xw);
        zw = detail::constrain_to_leaf(f, sigma, xw, f.inverse_eval(zw));
        double inc = std::log(leafwise_jacobian(f, xw, sigma)) - std::log(leafwise_jacobian(f, zw, sigma));
        log_delta += inc;
        last_increment = std::abs(inc);
        double d = algebra::torus_distance(xw, zw);
        if (i == 1) d_first = d;
        d_last = d;
    }
    res.value = std::exp(log_delta);
    if (n >= 2 && d_first > 0 && d_last > 0 && d_last < d_first)
        res.theta = std::pow(d_last / d_first, 1.0 / double(n - 1));
    else
        res.theta = 0.5;
    res.tail_bound = (res.theta < 1.0) ? last_increment * res.theta / (1.0 - res.theta)
                                        : std::abs(last_increment) * n;
    return res;
}

// Geometric-decay certificate for the Δ truncation: Cauchy gaps oscillate in
// sign, so the C·θⁿ claim is read off the monotone envelope sup_{m≥n} |gap_m|.
struct DeltaCauchyAnalysis {
    std::vector<double> gaps;      // |Δ_{n+1} − Δ_n|, n = 1..n_max−1
    std::vector<double> envelope;  // sup over the tail
    double fitted_ratio = 0;       // θ from the envelope fit
    double r2 = 0;
};

inline DeltaCauchyAnalysis delta_cauchy_analysis(const SmoothTorusMap& f, int sigma, const Vec& x,
                                                 const Vec& z, int n_max, double floor = 1e-12) {
    DeltaCauchyAnalysis an;
    double prev = delta_n(f, sigma, x, z, 1).value;
    for (int n = 2; n <= n_max; ++n) {
        double cur = delta_n(f, sigma, x, z, n).value;
        an.gaps.push_back(std::abs(cur - prev));
        prev = cur;
    }
    an.envelope.assign(an.gaps.size(), 0.0);
    double running = 0;
    for (size_t i = an.gaps.size(); i-- > 0;) {
        running = std::max(running, an.gaps[i]);
        an.envelope[i] = running;
    }
    std::vector<double> ns, logs;
    for (size_t i = 0; i < an.envelope.size(); ++i) {
        if (an.envelope[i] > floor) {
            ns.push_back(double(i));
            logs.push_back(std::log(an.envelope[i]));
        }
    }
    if (ns.size() >= 4) {
        auto fit = fit_line(ns, logs);
        an.fitted_ratio = std::exp(fit.slope);
        an.r2 = fit.r2;
    } else {
        // gaps vanish immediately (linear map): trivially geometric
        an.fitted_ratio = 0.0;
        an.r2 = 1.0;
    }
    return an;
}

// ── Gibbs density profiles ───────────────────────────────────────────────────

struct GibbsDensityProfile {
    LeafSegment segment;
    Vec reference;             // the anchor x
    std::vector<double> values;  // ρ at the segment nodes
    int depth = 0;
    double cauchy_gap = 0;     // ‖ρ_n − ρ_{n−1}‖_∞
    double normalization_defect = 0;  // |∫ρ − 1| evaluated by the same quadrature

    double integral() const {
        double s = 0;
        for (size_t i = 0; i + 1 < values.size(); ++i)
            s += 0.5 * (values[i] + values[i + 1]) * (segment.arclens[i + 1] - segment.arclens[i]);
        return s;
    }
};

namespace detail {

inline std::vector<double> delta_profile(const SmoothTorusMap& f, int sigma,
                                         const LeafSegment& seg, int n) {
    // backward orbits of every node advance together so the invariant frame
    // at the anchor's backward image is shared by the whole profile
    const int d = f.dim();
    const size_t m = seg.size();
    std::vector<double> logs(m, 0.0);
    Vec xw = seg.anchor;
    std::vector<Vec> zw(m);
    for (size_t k = 0; k < m; ++k) zw[k] = algebra::reduce_mod1_vec(seg.node_lifts[k]);
    for (int i = 1; i <= n; ++i) {
        xw = f.inverse_eval(xw);
        Mat frame(d, d);
        for (int s = 0; s < d; ++s) frame.set_col(s, cocycle::bundle_direction(f, xw, s));
        LU flu = lu_decompose(frame);
        double log_jx = std::log(norm(f.jacobian(xw) * frame.col(sigma)));
        for (size_t k = 0; k < m; ++k) {
            Vec c = lu_solve(flu, algebra::nearest_lift(xw, f.inverse_eval(zw[k])));
            zw[k] = algebra::reduce_mod1_vec(xw + c[sigma] * frame.col(sigma));
            logs[k] += log_jx - std::log(leafwise_jacobian(f, zw[k], sigma));
        }
    }
    std::vector<double> delta(m);
    for (size_t k = 0; k < m; ++k) delta[k] = std::exp(logs[k]);
    return delta;
}

inline std::vector<double> normalize_on_segment(const LeafSegment& seg, std::vector<double> vals) {
    double integral = 0;
    for (size_t i = 0; i + 1 < vals.size(); ++i)
        integral += 0.5 * (vals[i] + vals[i + 1]) * (seg.arclens[i + 1] - seg.arclens[i]);
    for (auto& v : vals) v /= integral;
    return vals;
}

}  // namespace detail

inline GibbsDensityProfile gibbs_density(const SmoothTorusMap& f, int sigma,
                                         const LeafSegment& segment, int n) {
    if (n < 1) throw std::invalid_argument("gibbs_density: need n >= 1");
    GibbsDensityProfile prof;
    prof.segment = segment;
    prof.reference = segment.anchor;
    prof.depth = n;

    auto rho_prev = detail::normalize_on_segment(segment, detail::delta_profile(f, sigma, segment, n - 1));
    auto rho = detail::normalize_on_segment(segment, detail::delta_profile(f, sigma, segment, n));
    prof.values = rho;
    for (size_t k = 0; k < rho.size(); ++k)
        prof.cauchy_gap = std::max(prof.cauchy_gap, std::abs(rho[k] - rho_prev[k]));
    prof.normalization_defect = std::abs(prof.integral() - 1.0);
    return prof;
}

// depth needed for a ≤ tol truncation of the Δ product, from the measured
// contraction factor of f^{-1} along the leaf
inline int choose_truncation_depth(const SmoothTorusMap& f, int sigma, const LeafSegment& seg,
                                   double tol = 1e-6, int n_cap = 64) {
    double smax = std::min(std::abs(seg.min_arclen()), seg.max_arclen());
    Vec z = seg.point_at(0.5 * smax);
    auto probe = delta_n(f, sigma, seg.anchor, z, 8);
    double theta = std::min(0.95, std::max(0.05, probe.theta));
    // Lip(log J)·diam·θⁿ/(1−θ) ≤ tol  with a crude Lip·diam estimate from the probe
    double c0 = std::max(1e-3, std::abs(std::log(std::max(1e-12, probe.value))) + 0.1);
    int n = static_cast<int>(std::ceil(std::log(tol * (1 - theta) / c0) / std::log(theta)));
    return std::max(4, std::min(n_cap, n));
}

// ── leafwise dynamical balls ─────────────────────────────────────────────────

// Monotone arclength transfer maps along the orbit of x: level i maps leaf
// arclength at f^i(x) to arclength at f^{i+1}(x).  Built once, then queried
// by every ball level via piecewise-linear interpolation and bisection.
class BallScaling {
  public:
    BallScaling(const SmoothTorusMap& f, int sigma, const Vec& x, double delta, int n_max,
                double h = 0.0)
        : delta_(delta) {
        if (delta <= 0) throw std::invalid_argument("BallScaling: need delta > 0");
        const double step = (h > 0) ? h : delta / 30.0;
        const double need = 1.12 * delta + 4 * step;
        if (need > kLeafArclengthCap)
            throw TraceTooShort("BallScaling: delta requires tracing beyond the plaque cap");
        Vec w = algebra::reduce_mod1_vec(x);
        levels_.reserve(static_cast<size_t>(n_max) + 1);
        for (int i = 0; i <= n_max; ++i) {
            Level lv;
            lv.leaf = trace_leaf(f, sigma, w, step, need);
            // cumulative ∫J over the node grid (trapezoid), signed like arclength
            const size_t m = lv.leaf.size();
            lv.cum.assign(m, 0.0);
            std::vector<double> jnode(m);
            for (size_t k = 0; k < m; ++k) {
                Vec node = algebra::reduce_mod1_vec(lv.leaf.node_lifts[k]);
                jnode[k] = norm(f.jacobian(node) * lv.leaf.node_dirs[k]);
            }
            const size_t a0 = static_cast<size_t>(lv.leaf.anchor_index);
            for (size_t k = a0; k + 1 < m; ++k)
                lv.cum[k + 1] = lv.cum[k] + 0.5 * (jnode[k] + jnode[k + 1]) *
                                                 (lv.leaf.arclens[k + 1] - lv.leaf.arclens[k]);
            for (size_t k = a0; k-- > 0;)
                lv.cum[k] = lv.cum[k + 1] - 0.5 * (jnode[k] + jnode[k + 1]) *
                                                 (lv.leaf.arclens[k + 1] - lv.leaf.arclens[k]);
            // orientation of the pushed tangent against the next leaf's anchor direction
            if (i > 0) {
                // sign for the PREVIOUS level: does its pushforward match this leaf?
                Level& prev = levels_.back();
                Vec e_prev = prev.leaf.node_dirs[static_cast<size_t>(prev.leaf.anchor_index)];
                Vec pushed = f.jacobian(prev.leaf.anchor) * e_prev;
                Vec e_here = lv.leaf.node_dirs[static_cast<size_t>(lv.leaf.anchor_index)];
                prev.push_sign = (dot(pushed, e_here) >= 0) ? 1.0 : -1.0;
            }
            levels_.push_back(std::move(lv));
            w = f.eval(w);
        }
    }

    // arclength of B_n(x, f, F, δ) = 2δ at n = 0, shrinking with n
    double ball_length(int n) const {
        if (n < 0 || n >= static_cast<int>(levels_.size()))
            throw std::invalid_argument("ball_length: n outside the prepared range");
        return boundary(n, +1.0) + boundary(n, -1.0);
    }

  private:
    struct Level {
        LeafSegment leaf;
        std::vector<double> cum;  // ∫J d(arclength), same node grid as leaf
        double push_sign = 1.0;
        double image_arclen(double s) const {  // piecewise-linear, monotone
            const auto& arc = leaf.arclens;
            if (s < arc.front() || s > arc.back())
                throw TraceTooShort("BallScaling: query beyond traced leaf");
            size_t hi = 1;
            while (hi + 1 < arc.size() && arc[hi] < s) ++hi;
            double t = (arc[hi] > arc[hi - 1]) ? (s - arc[hi - 1]) / (arc[hi] - arc[hi - 1]) : 0.0;
            return push_sign * (cum[hi - 1] + t * (cum[hi] - cum[hi - 1]));
        }
    };

    bool inside(double s0, int n) const {
        double s = s0;
        for (int i = 0; i <= n; ++i) {
            if (std::abs(s) > delta_) return false;
            if (i < n) s = levels_[static_cast<size_t>(i)].image_arclen(s);
        }
        return true;
    }

    double boundary(int n, double side) const {
        double lo = 0.0, hi = delta_;
        if (inside(side * hi, n)) return hi;
        for (int it = 0; it < 90; ++it) {
            double mid = 0.5 * (lo + hi);
            if (inside(side * mid, n))
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }

    double delta_ = 0;
    std::vector<Level> levels_;
};

inline double leaf_dynamical_ball(const SmoothTorusMap& f, int sigma, const Vec& x, double delta,
                                  int n) {
    BallScaling bs(f, sigma, x, delta, n);
    return bs.ball_length(n);
}

}  // namespace hyperlab::foliation
