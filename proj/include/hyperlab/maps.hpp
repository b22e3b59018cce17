// maps.hpp — the map zoo: evaluable smooth torus maps with exact Jacobians
// and exact inverses.
//
// Every map is a composition of primitive factors, each of which has a
// closed-form lift, Jacobian and inverse:
//
//   linear       x ↦ M x                      (M integer, |det| = 1)
//   shear        x ↦ x + ε φ(x_j) e_i,  i ≠ j (φ a trigonometric polynomial)
//   fiber shift  (x,y) ↦ (x, y + α(x) + ε_c q(x,y))   on T²×S¹
//
// A shear's Jacobian is unit triangular, so |det Df| ≡ 1 holds exactly for
// every volume-preserving construction, and the C⁰/C¹ distance to the linear
// part is certified by explicit coefficient bounds rather than sampling.
// All lifts commute with integer translations, so p̃ = f − L is a genuine
// periodic function — the conjugacy series depends on this.

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "algebra.hpp"
#include "hashing.hpp"
#include "linalg.hpp"

namespace hyperlab::maps {

using algebra::ToralAutomorphism;
using nlohmann::json;

struct PerturbationTooLarge : std::runtime_error {
    explicit PerturbationTooLarge(const std::string& m) : std::runtime_error(m) {}
};
struct ProfileNotAchieved : std::runtime_error {
    explicit ProfileNotAchieved(const std::string& m) : std::runtime_error(m) {}
};

inline constexpr double kTwoPi = 6.28318530717958647692;

// ── trigonometric polynomials ────────────────────────────────────────────────

// φ: S¹ → ℝ with period 1,  φ(t) = c0 + Σ_k a_k cos(2πkt) + b_k sin(2πkt)
struct TrigPoly1 {
    double c0 = 0;
    std::vector<double> cos_coef;  // k = 1, 2, ...
    std::vector<double> sin_coef;

    double eval(double t) const {
        double s = c0;
        for (size_t k = 0; k < cos_coef.size(); ++k) s += cos_coef[k] * std::cos(kTwoPi * double(k + 1) * t);
        for (size_t k = 0; k < sin_coef.size(); ++k) s += sin_coef[k] * std::sin(kTwoPi * double(k + 1) * t);
        return s;
    }
    double deriv(double t) const {
        double s = 0;
        for (size_t k = 0; k < cos_coef.size(); ++k)
            s -= cos_coef[k] * kTwoPi * double(k + 1) * std::sin(kTwoPi * double(k + 1) * t);
        for (size_t k = 0; k < sin_coef.size(); ++k)
            s += sin_coef[k] * kTwoPi * double(k + 1) * std::cos(kTwoPi * double(k + 1) * t);
        return s;
    }
    // certified sup-norm bounds via coefficient sums
    double sup_bound() const {
        double s = std::abs(c0);
        for (double a : cos_coef) s += std::abs(a);
        for (double b : sin_coef) s += std::abs(b);
        return s;
    }
    double deriv_sup_bound() const {
        double s = 0;
        for (size_t k = 0; k < cos_coef.size(); ++k) s += std::abs(cos_coef[k]) * kTwoPi * double(k + 1);
        for (size_t k = 0; k < sin_coef.size(); ++k) s += std::abs(sin_coef[k]) * kTwoPi * double(k + 1);
        return s;
    }

    static TrigPoly1 sine() {  // the canonical normalized profile sin(2πt)/2π
        TrigPoly1 p;
        p.sin_coef = {1.0 / kTwoPi};
        return p;
    }

    json to_json() const { return json{{"c0", c0}, {"cos", cos_coef}, {"sin", sin_coef}}; }
    static TrigPoly1 from_json(const json& j) {
        TrigPoly1 p;
        p.c0 = j.value("c0", 0.0);
        p.cos_coef = j.value("cos", std::vector<double>{});
        p.sin_coef = j.value("sin", std::vector<double>{});
        return p;
    }
};

// multivariate trigonometric polynomial Σ c·cos(2π k·x) + s·sin(2π k·x)
struct TrigPolyNd {
    struct Term {
        std::array<int, 3> k{0, 0, 0};
        double c = 0, s = 0;
    };
    double c0 = 0;
    std::vector<Term> terms;
    int nvars = 2;

    double eval(const Vec& x) const {
        double v = c0;
        for (const auto& t : terms) {
            double ph = 0;
            for (int i = 0; i < nvars; ++i) ph += t.k[static_cast<size_t>(i)] * x[i];
            ph *= kTwoPi;
            v += t.c * std::cos(ph) + t.s * std::sin(ph);
        }
        return v;
    }
    Vec grad(const Vec& x) const {
        Vec g(nvars);
        for (const auto& t : terms) {
            double ph = 0;
            for (int i = 0; i < nvars; ++i) ph += t.k[static_cast<size_t>(i)] * x[i];
            ph *= kTwoPi;
            double d = -t.c * std::sin(ph) + t.s * std::cos(ph);
            for (int i = 0; i < nvars; ++i) g[i] += d * kTwoPi * t.k[static_cast<size_t>(i)];
        }
        return g;
    }
    double sup_bound() const {
        double s = std::abs(c0);
        for (const auto& t : terms) s += std::abs(t.c) + std::abs(t.s);
        return s;
    }
    double grad_sup_bound() const {
        double s = 0;
        for (const auto& t : terms) {
            double kn = 0;
            for (int i = 0; i < nvars; ++i) kn += std::abs(t.k[static_cast<size_t>(i)]);
            s += (std::abs(t.c) + std::abs(t.s)) * kTwoPi * kn;
        }
        return s;
    }
    bool depends_on(int var) const {
        for (const auto& t : terms)
            if (t.k[static_cast<size_t>(var)] != 0 && (t.c != 0 || t.s != 0)) return true;
        return false;
    }

    json to_json() const {
        json arr = json::array();
        for (const auto& t : terms)
            arr.push_back(json{{"k", std::vector<int>(t.k.begin(), t.k.begin() + nvars)}, {"cos", t.c}, {"sin", t.s}});
        return json{{"c0", c0}, {"nvars", nvars}, {"terms", arr}};
    }
    static TrigPolyNd from_json(const json& j) {
        TrigPolyNd p;
        p.c0 = j.value("c0", 0.0);
        p.nvars = j.value("nvars", 2);
        for (const auto& tj : j.value("terms", json::array())) {
            Term t;
            auto kv = tj.at("k").get<std::vector<int>>();
            for (size_t i = 0; i < kv.size() && i < 3; ++i) t.k[i] = kv[i];
            t.c = tj.value("cos", 0.0);
            t.s = tj.value("sin", 0.0);
            p.terms.push_back(t);
        }
        return p;
    }
};

// ── primitive factors ────────────────────────────────────────────────────────

struct ShearFactor {
    int direction = 0;  // index that moves
    int driver = 1;     // index read by the profile
    TrigPoly1 profile;
    double amplitude = 0;

    json to_json() const {
        return json{{"direction", direction},
                    {"driver", driver},
                    {"amplitude", amplitude},
                    {"profile", profile.to_json()}};
    }
    static ShearFactor from_json(const json& j) {
        ShearFactor s;
        s.direction = j.at("direction").get<int>();
        s.driver = j.at("driver").get<int>();
        s.amplitude = j.at("amplitude").get<double>();
        s.profile = TrigPoly1::from_json(j.at("profile"));
        return s;
    }
};

namespace detail {

struct LinearF {
    IMat m, minv;
};
struct ShearF {
    ShearFactor s;
    bool inverted = false;  // apply with −amplitude
};
struct FiberF {
    TrigPolyNd alpha;  // depends on base coordinates only
    TrigPolyNd q;
    double eps_c = 0;
    int fiber = 2;
    bool inverted = false;
};

using Factor = std::variant<LinearF, ShearF, FiberF>;

inline Vec apply_factor(const Factor& f, const Vec& x) {
    if (std::holds_alternative<LinearF>(f)) {
        return std::get<LinearF>(f).m.to_mat() * x;
    }
    if (std::holds_alternative<ShearF>(f)) {
        const auto& sh = std::get<ShearF>(f);
        double a = sh.inverted ? -sh.s.amplitude : sh.s.amplitude;
        Vec y = x;
        y[sh.s.direction] += a * sh.s.profile.eval(x[sh.s.driver]);
        return y;
    }
    const auto& fb = std::get<FiberF>(f);
    Vec y = x;
    if (!fb.inverted) {
        y[fb.fiber] += fb.alpha.eval(x) + fb.eps_c * fb.q.eval(x);
    } else {
        // solve y_f = z_f − α(x) − ε_c q(x, y_f); contraction for ε_c·Lip_y(q) < 1
        double target = x[fb.fiber];
        double yf = target - fb.alpha.eval(x);
        if (fb.eps_c != 0.0 && fb.q.depends_on(fb.fiber)) {
            for (int it = 0; it < 80; ++it) {
                Vec probe = x;
                probe[fb.fiber] = yf;
                double next = target - fb.alpha.eval(x) - fb.eps_c * fb.q.eval(probe);
                if (std::abs(next - yf) < 1e-15) {
                    yf = next;
                    break;
                }
                yf = next;
            }
        } else if (fb.eps_c != 0.0) {
            yf -= fb.eps_c * fb.q.eval(x);
        }
        y[fb.fiber] = yf;
    }
    return y;
}

inline Mat factor_jacobian(const Factor& f, const Vec& x, int dim) {
    if (std::holds_alternative<LinearF>(f)) return std::get<LinearF>(f).m.to_mat();
    Mat j = Mat::identity(dim);
    if (std::holds_alternative<ShearF>(f)) {
        const auto& sh = std::get<ShearF>(f);
        double a = sh.inverted ? -sh.s.amplitude : sh.s.amplitude;
        j(sh.s.direction, sh.s.driver) += a * sh.s.profile.deriv(x[sh.s.driver]);
        return j;
    }
    const auto& fb = std::get<FiberF>(f);
    if (fb.inverted) throw std::logic_error("factor_jacobian: inverted fiber factor not used directly");
    Vec ga = fb.alpha.grad(x);
    Vec gq = fb.q.grad(x);
    for (int c = 0; c < dim; ++c) j(fb.fiber, c) += ga[c] + fb.eps_c * gq[c];
    return j;
}

inline Factor invert_factor(const Factor& f) {
    if (std::holds_alternative<LinearF>(f)) {
        auto lf = std::get<LinearF>(f);
        std::swap(lf.m, lf.minv);
        return lf;
    }
    if (std::holds_alternative<ShearF>(f)) {
        auto sf = std::get<ShearF>(f);
        sf.inverted = !sf.inverted;
        return sf;
    }
    auto fb = std::get<FiberF>(f);
    fb.inverted = !fb.inverted;
    return fb;
}

}  // namespace detail

// ── SmoothTorusMap ───────────────────────────────────────────────────────────

class SmoothTorusMap {
  public:
    SmoothTorusMap() = default;

    int dim() const { return dim_; }
    const IMat& linear_matrix() const { return linear_; }
    const algebra::SpectralData& linear_spectrum() const { return spectral_; }
    double c1_distance_bound() const { return c1_bound_; }
    double c0_distance_bound() const { return c0_bound_; }

    // The linear part as a certified automorphism; throws if not hyperbolic.
    ToralAutomorphism linear_part() const { return algebra::analyze_matrix(linear_); }

    Vec eval_lift(const Vec& x) const {
        Vec y = x;
        for (const auto& f : factors_) y = detail::apply_factor(f, y);
        return y;
    }
    Vec eval(const Vec& x) const { return algebra::reduce_mod1_vec(eval_lift(x)); }

    Vec inverse_lift(const Vec& x) const {
        Vec y = x;
        for (auto it = factors_.rbegin(); it != factors_.rend(); ++it)
            y = detail::apply_factor(detail::invert_factor(*it), y);
        return y;
    }
    Vec inverse_eval(const Vec& x) const { return algebra::reduce_mod1_vec(inverse_lift(x)); }

    Mat jacobian(const Vec& x) const {
        Vec y = x;
        Mat j = Mat::identity(dim_);
        for (const auto& f : factors_) {
            j = detail::factor_jacobian(f, y, dim_) * j;
            y = detail::apply_factor(f, y);
        }
        return j;
    }
    Mat inverse_jacobian(const Vec& x) const { return inverse(jacobian(inverse_eval(x))); }

    // p̃(x) = f(x) − Lx as a periodic function of x ∈ [0,1)^d
    Vec displacement(const Vec& x) const {
        Vec xr = algebra::reduce_mod1_vec(x);
        return eval_lift(xr) - linear_.to_mat() * xr;
    }

    SmoothTorusMap inverse_map() const {
        SmoothTorusMap inv;
        inv.dim_ = dim_;
        for (auto it = factors_.rbegin(); it != factors_.rend(); ++it)
            inv.factors_.push_back(detail::invert_factor(*it));
        inv.linear_ = imat_unimodular_inverse(linear_);
        inv.spectral_ = algebra::analyze_spectrum(inv.linear_);
        // ‖f^{-1} − L^{-1}‖_∞ ≤ ‖L^{-1}‖·‖p̃‖_∞  and, writing a = ‖L^{-1}‖,
        // ‖Df^{-1} − L^{-1}‖ ≤ a²·c1 / (1 − a·c1) when a·c1 < 1
        const double a = operator_norm(inv.linear_.to_mat());
        inv.c0_bound_ = a * c0_bound_;
        inv.c1_bound_ = (a * c1_bound_ < 1.0) ? a * a * c1_bound_ / (1.0 - a * c1_bound_) : 1e300;
        inv.doc_ = json{{"type", "inverse"}, {"of", doc_}};
        return inv;
    }

    const std::vector<detail::Factor>& factors() const { return factors_; }

    const json& document() const { return doc_; }
    std::uint64_t content_hash() const { return fnv1a64(doc_.dump()); }

    // construction helpers used by the factory functions below
    static SmoothTorusMap compose(int dim, std::vector<detail::Factor> factors, IMat linear,
                                  double c0_bound, double c1_bound, json doc) {
        SmoothTorusMap m;
        m.dim_ = dim;
        m.factors_ = std::move(factors);
        m.linear_ = linear;
        m.spectral_ = algebra::analyze_spectrum(linear);
        m.c0_bound_ = c0_bound;
        m.c1_bound_ = c1_bound;
        m.doc_ = std::move(doc);
        return m;
    }

  private:
    int dim_ = 0;
    std::vector<detail::Factor> factors_;
    IMat linear_;
    algebra::SpectralData spectral_;
    double c0_bound_ = 0, c1_bound_ = 0;
    json doc_;
};

// ── cone-condition radius (certified C¹ neighborhood of L) ──────────────────

// Conservative certificate: consecutive-modulus gaps shrink by at most
// 2·κ(P)·‖E‖ under a perturbation E written in the eigenframe P, so domination
// survives below min-gap / (4κ).  Reported with every run; the cone iteration
// in the cocycle module re-verifies the splitting numerically either way.
inline double cone_condition_radius(const algebra::SpectralData& sd) {
    if (sd.spectrum.size() < 2) throw std::invalid_argument("cone_condition_radius: no spectrum");
    Mat p(sd.dim, sd.dim);
    for (int j = 0; j < sd.dim; ++j) p.set_col(j, sd.spectrum[static_cast<size_t>(j)].vector);
    double kappa = operator_norm(p) * operator_norm(inverse(p));
    double g = 1e300;
    for (size_t i = 0; i + 1 < sd.spectrum.size(); ++i)
        g = std::min(g, std::abs(std::abs(sd.spectrum[i + 1].value) - std::abs(sd.spectrum[i].value)));
    return g / (4.0 * kappa);
}

inline double cone_condition_radius(const ToralAutomorphism& L) {
    algebra::SpectralData sd;
    sd.dim = L.dim;
    sd.spectrum = L.spectrum;
    return cone_condition_radius(sd);
}

// Default constructor gate: the eigenframe-conditioning factor is dropped,
// leaving min-gap / 4.  Deliberately looser than the certificate above —
// it exists to reject nonsensical amplitudes, not to prove domination.
inline double default_perturbation_threshold(const algebra::SpectralData& sd) {
    double g = 1e300;
    for (size_t i = 0; i + 1 < sd.spectrum.size(); ++i)
        g = std::min(g, std::abs(std::abs(sd.spectrum[i + 1].value) - std::abs(sd.spectrum[i].value)));
    return g / 4.0;
}

inline double default_perturbation_threshold(const ToralAutomorphism& L) {
    algebra::SpectralData sd;
    sd.dim = L.dim;
    sd.spectrum = L.spectrum;
    return default_perturbation_threshold(sd);
}

// ── factories ────────────────────────────────────────────────────────────────

inline SmoothTorusMap make_linear(const ToralAutomorphism& L) {
    std::vector<detail::Factor> fs{detail::LinearF{L.matrix, L.inverse_matrix}};
    json doc{{"type", "linear"}, {"matrix", json::array()}};
    for (int i = 0; i < L.dim; ++i) {
        json row = json::array();
        for (int j = 0; j < L.dim; ++j) row.push_back(L.matrix(i, j));
        doc["matrix"].push_back(row);
    }
    return SmoothTorusMap::compose(L.dim, std::move(fs), L.matrix, 0.0, 0.0, std::move(doc));
}

namespace detail {

inline json matrix_doc(const IMat& m) {
    json rows = json::array();
    for (int i = 0; i < m.n; ++i) {
        json row = json::array();
        for (int j = 0; j < m.n; ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline json shears_doc(const std::vector<ShearFactor>& shears) {
    json arr = json::array();
    for (const auto& s : shears) arr.push_back(s.to_json());
    return arr;
}

inline void validate_shears(int dim, const std::vector<ShearFactor>& shears) {
    for (const auto& s : shears) {
        if (s.direction == s.driver || s.direction < 0 || s.driver < 0 || s.direction >= dim ||
            s.driver >= dim)
            throw std::invalid_argument("shear: direction/driver must be distinct indices in range");
    }
}

// ‖ΠDS_i − I‖ ≤ Π(1 + a_i) − 1  with a_i = ε_i‖φ_i′‖_∞
inline double shears_c1(const std::vector<ShearFactor>& shears) {
    double prod = 1;
    for (const auto& s : shears) prod *= 1.0 + std::abs(s.amplitude) * s.profile.deriv_sup_bound();
    return prod - 1.0;
}

inline double shears_c0(const std::vector<ShearFactor>& shears) {
    double sum = 0;
    for (const auto& s : shears) sum += std::abs(s.amplitude) * s.profile.sup_bound();
    return sum;
}

}  // namespace detail

// f = L ∘ S_1 ∘ … ∘ S_m  (S_m applied first)
inline SmoothTorusMap make_shear_perturbation(const ToralAutomorphism& L,
                                              const std::vector<ShearFactor>& shears,
                                              std::optional<double> c1_threshold = std::nullopt) {
    detail::validate_shears(L.dim, shears);
    const double lnorm = operator_norm(L.matrix.to_mat());
    const double c1 = lnorm * detail::shears_c1(shears);
    const double c0 = lnorm * detail::shears_c0(shears);
    const double thr = c1_threshold.value_or(default_perturbation_threshold(L));
    if (c1 > thr)
        throw PerturbationTooLarge("make_shear_perturbation: certified C1 bound " + std::to_string(c1) +
                                   " exceeds threshold " + std::to_string(thr));
    std::vector<detail::Factor> fs;
    for (auto it = shears.rbegin(); it != shears.rend(); ++it) fs.push_back(detail::ShearF{*it});
    fs.push_back(detail::LinearF{L.matrix, L.inverse_matrix});
    json doc{{"type", "shear_perturbation"},
             {"matrix", detail::matrix_doc(L.matrix)},
             {"shears", detail::shears_doc(shears)}};
    return SmoothTorusMap::compose(L.dim, std::move(fs), L.matrix, c0, c1, std::move(doc));
}

// Positive control: f = g ∘ L ∘ g^{-1} with g a composition of shears fixing 0.
// The stored generator is exactly evaluable, so tests can compare the solved
// conjugacy against g (the series solves h∘f = L∘h, whose solution is g^{-1}).
struct ConjugatedLinearMap {
    SmoothTorusMap map;
    std::vector<ShearFactor> generator;
    int dim = 0;

    Vec generator_eval(const Vec& x) const {  // g
        Vec y = x;
        for (auto it = generator.rbegin(); it != generator.rend(); ++it)
            y = detail::apply_factor(detail::ShearF{*it}, y);
        return y;
    }
    Vec generator_inverse_eval(const Vec& x) const {  // g^{-1}
        Vec y = x;
        for (const auto& s : generator) y = detail::apply_factor(detail::ShearF{s, true}, y);
        return y;
    }
    // the unique isotopic-to-identity solution of h∘f = L∘h
    Vec expected_conjugacy(const Vec& x) const { return algebra::reduce_mod1_vec(generator_inverse_eval(x)); }
};

inline ConjugatedLinearMap make_conjugated_linear(const ToralAutomorphism& L,
                                                  const std::vector<ShearFactor>& generator,
                                                  std::optional<double> c1_threshold = std::nullopt) {
    detail::validate_shears(L.dim, generator);
    // g(0) = 0 normalization: every shear profile must vanish at 0
    for (const auto& s : generator)
        if (std::abs(s.profile.eval(0.0)) > 1e-15)
            throw std::invalid_argument("make_conjugated_linear: generator must fix 0 (profile(0) = 0)");
    const double lnorm = operator_norm(L.matrix.to_mat());
    const double a = detail::shears_c1(generator);
    const double c1 = lnorm * (2 * a + a * a);
    const double c0 = (lnorm + 1.0) * detail::shears_c0(generator);
    // a smooth conjugate of L has the pushforward splitting for any generator
    // size, so the gate applies only when the caller supplies a threshold
    if (c1_threshold && c1 > *c1_threshold)
        throw PerturbationTooLarge("make_conjugated_linear: certified C1 bound exceeds threshold");

    std::vector<detail::Factor> fs;
    for (const auto& s : generator) fs.push_back(detail::ShearF{s, true});  // g^{-1} first
    fs.push_back(detail::LinearF{L.matrix, L.inverse_matrix});
    for (auto it = generator.rbegin(); it != generator.rend(); ++it) fs.push_back(detail::ShearF{*it});
    json doc{{"type", "conjugated_linear"},
             {"matrix", detail::matrix_doc(L.matrix)},
             {"generator", detail::shears_doc(generator)}};
    ConjugatedLinearMap out;
    out.map = SmoothTorusMap::compose(L.dim, std::move(fs), L.matrix, c0, c1, std::move(doc));
    out.generator = generator;
    out.dim = L.dim;
    return out;
}

// ── skew products over T² ────────────────────────────────────────────────────

// f(x,y) = (base(x), y + α(x) + ε_c q(x,y)) on T³ = T²×S¹
struct SkewProductMap {
    SmoothTorusMap map;   // the 3-d torus map
    SmoothTorusMap base;  // d = 2
    TrigPolyNd alpha;
    TrigPolyNd q;
    double eps_c = 0;
    bool volume_preserving = true;
};

namespace detail {

// lift a 2-d factor to act on the first two coordinates of T³
inline Factor lift_base_factor(const Factor& f) {
    if (std::holds_alternative<LinearF>(f)) {
        const auto& lf = std::get<LinearF>(f);
        IMat m3(3), mi3(3);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                m3(i, j) = lf.m(i, j);
                mi3(i, j) = lf.minv(i, j);
            }
        m3(2, 2) = 1;
        mi3(2, 2) = 1;
        return LinearF{m3, mi3};
    }
    return f;  // shears carry coordinate indices < 2 already
}

}  // namespace detail

inline SkewProductMap make_skew_product(const SmoothTorusMap& base, const TrigPolyNd& alpha,
                                        const TrigPolyNd& q, double eps_c) {
    if (base.dim() != 2) throw std::invalid_argument("make_skew_product: base must be on T^2");
    if (alpha.depends_on(2)) throw std::invalid_argument("make_skew_product: alpha must not depend on the fiber");
    TrigPolyNd a3 = alpha;
    a3.nvars = 3;
    TrigPolyNd q3 = q;
    q3.nvars = 3;

    std::vector<detail::Factor> fs;
    for (const auto& f : base.factors()) fs.push_back(detail::lift_base_factor(f));
    fs.push_back(detail::FiberF{a3, q3, eps_c, 2, false});

    IMat lin3(3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) lin3(i, j) = base.linear_matrix()(i, j);
    lin3(2, 2) = 1;

    const double c0 = base.c0_distance_bound() + a3.sup_bound() + std::abs(eps_c) * q3.sup_bound();
    const double c1 = base.c1_distance_bound() + a3.grad_sup_bound() + std::abs(eps_c) * q3.grad_sup_bound();

    json doc{{"type", "skew_product"},
             {"base", base.document()},
             {"alpha", a3.to_json()},
             {"q", q3.to_json()},
             {"eps_c", eps_c}};

    SkewProductMap sp;
    sp.map = SmoothTorusMap::compose(3, std::move(fs), lin3, c0, c1, std::move(doc));
    sp.base = base;
    sp.alpha = a3;
    sp.q = q3;
    sp.eps_c = eps_c;
    sp.volume_preserving = (eps_c == 0.0) || !q3.depends_on(2);
    return sp;
}

// ── Katok one-parameter family ───────────────────────────────────────────────

enum class ExponentProfile { Constant, Varying };

// γ_t for t on a uniform grid in [0,1]; members are built from one template
// with amplitudes polynomial (linear) in t.
struct KatokFamily {
    std::vector<double> ts;
    std::vector<SmoothTorusMap> members;
    std::vector<std::vector<ShearFactor>> generators;  // constant profile only
    ExponentProfile profile = ExponentProfile::Constant;
    ToralAutomorphism linear_model;

    size_t size() const { return members.size(); }
};

inline KatokFamily make_katok_family(const ToralAutomorphism& L,
                                     const std::vector<ShearFactor>& template_shears,
                                     ExponentProfile profile, int m,
                                     std::optional<double> c1_threshold = std::nullopt) {
    if (m < 0) throw std::invalid_argument("make_katok_family: need m >= 0");
    KatokFamily fam;
    fam.profile = profile;
    fam.linear_model = L;
    for (int j = 0; j <= m; ++j) {
        double t = (m == 0) ? 0.0 : double(j) / double(m);
        std::vector<ShearFactor> scaled = template_shears;
        for (auto& s : scaled) s.amplitude *= t;
        fam.ts.push_back(t);
        if (profile == ExponentProfile::Constant) {
            auto cm = make_conjugated_linear(L, scaled, c1_threshold);
            fam.members.push_back(cm.map);
            fam.generators.push_back(scaled);
        } else {
            fam.members.push_back(make_shear_perturbation(L, scaled, c1_threshold));
        }
    }
    return fam;
}

}  // namespace hyperlab::maps
