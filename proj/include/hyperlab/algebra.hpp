// algebra.hpp — integer toral automorphisms and torus arithmetic.
//
// The spectral data of an integer matrix is a theorem hypothesis here, not a
// plotting convenience, so eigenvalues are obtained from the exact integer
// characteristic polynomial by Sturm-sequence root isolation and bisection,
// never from a general-purpose eigensolver.  Eigenvectors are then certified
// directly through the residual ‖Mv − λv‖ ≤ 1e−10.
//
// Rational irreducibility reduces (Gauss) to the absence of a monic integer
// factor, which is decided by exhaustive search under a Landau/Mignotte
// coefficient bound; feasible because the supported dimension is ≤ 6.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linalg.hpp"

namespace hyperlab::algebra {

// ── errors ───────────────────────────────────────────────────────────────────

struct NotUnimodular : std::runtime_error {
    explicit NotUnimodular(const std::string& m) : std::runtime_error(m) {}
};
struct NotHyperbolic : std::runtime_error {
    explicit NotHyperbolic(const std::string& m) : std::runtime_error(m) {}
};
struct DimensionTooLarge : std::runtime_error {
    explicit DimensionTooLarge(const std::string& m) : std::runtime_error(m) {}
};

inline constexpr int kMaxSupportedDim = 6;
inline constexpr double kUnitCircleTol = 1e-9;
inline constexpr double kEigenResidualTol = 1e-10;

// ── torus points ─────────────────────────────────────────────────────────────

struct TorusPoint {
    Vec coords;               // componentwise in [0,1)
    std::optional<Vec> lift;  // un-wrapped representative, coords = lift mod 1
};

inline double wrap01(double x) {
    double y = x - std::floor(x);
    // floor can round such that y == 1.0 for tiny negative x
    if (y >= 1.0) y -= 1.0;
    return y;
}

inline Vec reduce_mod1_vec(const Vec& lift) {
    Vec c(lift.n);
    for (int i = 0; i < lift.n; ++i) c[i] = wrap01(lift[i]);
    return c;
}

inline TorusPoint reduce_mod1(const Vec& lift) { return TorusPoint{reduce_mod1_vec(lift), lift}; }

// representative of b − a with every component in [−0.5, 0.5)
inline Vec nearest_lift(const Vec& a, const Vec& b) {
    Vec d(a.n);
    for (int i = 0; i < a.n; ++i) {
        double t = b[i] - a[i];
        t -= std::floor(t + 0.5);
        if (t >= 0.5) t -= 1.0;  // guard the rounding edge
        d[i] = t;
    }
    return d;
}

inline double torus_distance(const Vec& a, const Vec& b) { return norm(nearest_lift(a, b)); }

// ── integer polynomials (coefficients low→high, monic leading) ───────────────

namespace detail {

using bigint = __int128;

struct IPoly {
    std::vector<bigint> c;  // c[0] + c[1] x + ... ; c.back() != 0 unless zero poly

    int degree() const { return static_cast<int>(c.size()) - 1; }
    bool is_zero() const { return c.empty(); }

    void trim() {
        while (!c.empty() && c.back() == 0) c.pop_back();
    }
};

inline bigint big_abs(bigint x) { return x < 0 ? -x : x; }

inline bigint big_gcd(bigint a, bigint b) {
    a = big_abs(a);
    b = big_abs(b);
    while (b != 0) {
        bigint t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline void reduce_content(IPoly& p) {
    bigint g = 0;
    for (auto v : p.c) g = big_gcd(g, v);
    if (g > 1)
        for (auto& v : p.c) v /= g;
}

inline IPoly derivative(const IPoly& p) {
    IPoly d;
    for (int i = 1; i <= p.degree(); ++i) d.c.push_back(p.c[static_cast<size_t>(i)] * i);
    d.trim();
    return d;
}

inline long double eval_ld(const IPoly& p, long double x) {
    long double s = 0;
    for (int i = p.degree(); i >= 0; --i)
        s = s * x + static_cast<long double>(p.c[static_cast<size_t>(i)]);
    return s;
}

// Pseudo-remainder built from the recurrence a ← |lb|·a − sign(lb)·la·x^s·b,
// whose multiplier |lb| is positive at every step, so the result is a positive
// multiple of the true remainder and Sturm sign counting stays valid.
inline IPoly pseudo_rem_positive(IPoly a, const IPoly& b) {
    const bigint cap = (bigint(1) << 120);
    const bigint lb = b.c.back();
    const bigint albl = big_abs(lb);
    const int sgn = lb < 0 ? -1 : 1;
    while (!a.is_zero() && a.degree() >= b.degree()) {
        const bigint la = a.c.back();
        const int shift = a.degree() - b.degree();
        for (auto& v : a.c) {
            v *= albl;
            if (big_abs(v) > cap) throw std::overflow_error("sturm: coefficient overflow");
        }
        for (int i = 0; i <= b.degree(); ++i) {
            a.c[static_cast<size_t>(i + shift)] -= sgn * la * b.c[static_cast<size_t>(i)];
            if (big_abs(a.c[static_cast<size_t>(i + shift)]) > cap)
                throw std::overflow_error("sturm: coefficient overflow");
        }
        a.trim();
        reduce_content(a);
    }
    return a;
}

inline std::vector<IPoly> sturm_chain(const IPoly& p) {
    std::vector<IPoly> chain;
    IPoly p0 = p;
    reduce_content(p0);
    chain.push_back(p0);
    IPoly p1 = derivative(p0);
    reduce_content(p1);
    if (!p1.is_zero()) chain.push_back(p1);
    while (chain.size() >= 2 && chain.back().degree() > 0) {
        IPoly r = pseudo_rem_positive(chain[chain.size() - 2], chain.back());
        if (r.is_zero()) break;
        for (auto& v : r.c) v = -v;
        reduce_content(r);
        chain.push_back(r);
    }
    return chain;
}

inline int sign_at(const IPoly& p, long double x) {
    long double v = eval_ld(p, x);
    if (v > 0) return 1;
    if (v < 0) return -1;
    return 0;
}

inline int sign_changes(const std::vector<IPoly>& chain, long double x) {
    int changes = 0, prev = 0;
    for (const auto& p : chain) {
        int s = sign_at(p, x);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

// number of real roots in (a, b]
inline int roots_in(const std::vector<IPoly>& chain, long double a, long double b) {
    return sign_changes(chain, a) - sign_changes(chain, b);
}

struct RootInterval {
    double lo, hi;
};

// Cauchy bound on root magnitudes of a monic poly
inline double root_bound(const IPoly& p) {
    long double m = 0;
    long double lead = static_cast<long double>(p.c.back());
    for (int i = 0; i < p.degree(); ++i)
        m = std::max(m, std::fabs(static_cast<long double>(p.c[static_cast<size_t>(i)]) / lead));
    return static_cast<double>(1 + m);
}

inline void isolate_rec(const std::vector<IPoly>& chain, long double a, long double b,
                        std::vector<RootInterval>& out, int depth) {
    int k = roots_in(chain, a, b);
    if (k == 0) return;
    if (k == 1 || depth > 80) {
        out.push_back({static_cast<double>(a), static_cast<double>(b)});
        return;
    }
    long double m = 0.5L * (a + b);
    // nudge off an exact root of any chain member
    int guard = 0;
    while (sign_at(chain[0], m) == 0 && guard++ < 8) m += (b - a) * 1e-7L;
    isolate_rec(chain, a, m, out, depth + 1);
    isolate_rec(chain, m, b, out, depth + 1);
}

// all real roots of p, isolated then refined by bisection + Newton polish
inline std::vector<double> real_roots(const IPoly& p) {
    auto chain = sturm_chain(p);
    double bound = root_bound(p);
    std::vector<RootInterval> ivals;
    isolate_rec(chain, -bound - 1.0L, bound + 1.0L, ivals, 0);
    IPoly dp = derivative(p);
    std::vector<double> roots;
    for (auto [lo, hi] : ivals) {
        // Sturm-count bisection survives even-multiplicity roots, where the
        // polynomial itself never changes sign
        long double a = lo, b = hi;
        for (int it = 0; it < 120 && (b - a) > 1e-16L * std::max(1.0L, std::fabs(a)); ++it) {
            long double m = 0.5L * (a + b);
            if (roots_in(chain, a, m) >= 1)
                b = m;
            else
                a = m;
        }
        long double x = 0.5L * (a + b);
        for (int it = 0; it < 6; ++it) {
            long double fx = eval_ld(p, x), dfx = eval_ld(dp, x);
            if (dfx == 0) break;
            long double step = fx / dfx;
            x -= step;
            if (std::fabs(step) < 1e-20L) break;
        }
        roots.push_back(static_cast<double>(x));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

// Durand–Kerner in double precision.  Used only for modulus flags of complex
// roots (hyperbolicity gate); all certified data comes from the real roots.
inline std::vector<std::pair<double, double>> all_roots_dk(const IPoly& p) {
    const int d = p.degree();
    std::vector<std::pair<double, double>> z(static_cast<size_t>(d));
    double re = 0.4, im = 0.9;
    for (int i = 0; i < d; ++i) {
        z[static_cast<size_t>(i)] = {re, im};
        double nre = 0.4 * re - 0.9 * im + 0.13, nim = 0.9 * re + 0.4 * im + 0.07;
        re = nre;
        im = nim;
    }
    auto cmul = [](std::pair<double, double> x, std::pair<double, double> y) {
        return std::pair<double, double>{x.first * y.first - x.second * y.second,
                                         x.first * y.second + x.second * y.first};
    };
    auto csub = [](std::pair<double, double> x, std::pair<double, double> y) {
        return std::pair<double, double>{x.first - y.first, x.second - y.second};
    };
    auto cdiv = [](std::pair<double, double> x, std::pair<double, double> y) {
        double den = y.first * y.first + y.second * y.second;
        return std::pair<double, double>{(x.first * y.first + x.second * y.second) / den,
                                         (x.second * y.first - x.first * y.second) / den};
    };
    auto peval = [&](std::pair<double, double> x) {
        std::pair<double, double> s{0, 0};
        for (int i = d; i >= 0; --i) {
            s = cmul(s, x);
            s.first += static_cast<double>(p.c[static_cast<size_t>(i)]);
        }
        return s;
    };
    double lead = static_cast<double>(p.c.back());
    for (int it = 0; it < 400; ++it) {
        double move = 0;
        for (int i = 0; i < d; ++i) {
            std::pair<double, double> denom{lead, 0};
            for (int j = 0; j < d; ++j)
                if (j != i) denom = cmul(denom, csub(z[static_cast<size_t>(i)], z[static_cast<size_t>(j)]));
            auto delta = cdiv(peval(z[static_cast<size_t>(i)]), denom);
            z[static_cast<size_t>(i)] = csub(z[static_cast<size_t>(i)], delta);
            move = std::max(move, std::abs(delta.first) + std::abs(delta.second));
        }
        if (move < 1e-14) break;
    }
    return z;
}

// exact division test: does monic g divide monic p over ℤ?
inline bool divides_exactly(const IPoly& p, const IPoly& g) {
    std::vector<bigint> rem = p.c;
    int dp = p.degree(), dg = g.degree();
    if (dg > dp) return false;
    for (int k = dp - dg; k >= 0; --k) {
        bigint q = rem[static_cast<size_t>(k + dg)];  // g monic
        if (q == 0) continue;
        for (int i = 0; i <= dg; ++i) rem[static_cast<size_t>(k + i)] -= q * g.c[static_cast<size_t>(i)];
    }
    for (int i = 0; i < dg; ++i)
        if (rem[static_cast<size_t>(i)] != 0) return false;
    return true;
}

}  // namespace detail

// ── characteristic polynomial (exact, monic) ─────────────────────────────────

// Faddeev–LeVerrier; returns coefficients of det(xI − M), low → high degree.
inline std::vector<std::int64_t> char_poly(const IMat& m) {
    const int n = m.n;
    std::vector<__int128> coeff(static_cast<size_t>(n) + 1, 0);
    coeff[static_cast<size_t>(n)] = 1;
    std::array<__int128, kMaxDim * kMaxDim> Mk{}, tmp{};
    // M1 = M
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Mk[i * kMaxDim + j] = m(i, j);
    __int128 ck = 0;
    for (int k = 1; k <= n; ++k) {
        if (k > 1) {
            // Mk = M · (M_{k−1} + c_{k−1} I)
            for (int i = 0; i < n; ++i) Mk[i * kMaxDim + i] += ck;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    __int128 s = 0;
                    for (int t = 0; t < n; ++t) s += static_cast<__int128>(m(i, t)) * Mk[t * kMaxDim + j];
                    tmp[i * kMaxDim + j] = s;
                }
            Mk = tmp;
        }
        __int128 tr = 0;
        for (int i = 0; i < n; ++i) tr += Mk[i * kMaxDim + i];
        ck = -tr / k;  // exact division by construction
        coeff[static_cast<size_t>(n - k)] = ck;
    }
    std::vector<std::int64_t> out(static_cast<size_t>(n) + 1);
    for (size_t i = 0; i < out.size(); ++i) {
        if (coeff[i] > INT64_MAX || coeff[i] < INT64_MIN)
            throw std::overflow_error("char_poly: coefficient overflow");
        out[i] = static_cast<std::int64_t>(coeff[i]);
    }
    return out;
}

// ── spectral analysis ────────────────────────────────────────────────────────

struct EigenPair {
    double value = 0;      // real eigenvalue
    double exponent = 0;   // log|value|
    Vec vector;            // unit eigenvector
    double residual = 0;   // ‖Mv − λv‖
};

struct SpectralData {
    int dim = 0;
    IMat matrix;
    std::vector<std::int64_t> charpoly;      // monic, low → high
    std::vector<EigenPair> spectrum;         // sorted by |value| ascending
    int stable_count = 0, unstable_count = 0, neutral_count = 0;
    std::int64_t determinant = 0;
    bool unimodular = false;
    bool hyperbolic = false;                 // no |λ| within 1e−9 of 1
    bool all_real = false;
    bool simple_real_distinct = false;       // all real, pairwise distinct |λ|
    double eigen_residual = 0;               // max over pairs
};

namespace detail {

inline Vec eigenvector_inverse_iteration(const Mat& m, double lambda) {
    const int n = m.rows;
    Mat shifted = m;
    // tiny diagonal regularization keeps the LU nonsingular at the exact root
    double reg = 1e-13 * (1.0 + std::abs(lambda));
    for (int i = 0; i < n; ++i) shifted(i, i) -= lambda + reg;
    LU f = lu_decompose(shifted);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 / std::sqrt(2.0 + i);
    v = normalized(v);
    for (int it = 0; it < 4; ++it) {
        if (f.singular) break;
        v = normalized(lu_solve(f, v));
    }
    // orient deterministically: first significant component positive
    for (int i = 0; i < n; ++i) {
        if (std::abs(v[i]) > 1e-8) {
            if (v[i] < 0) v *= -1.0;
            break;
        }
    }
    return v;
}

}  // namespace detail

// Full spectral analysis without the hyperbolicity gate.  Skew-product linear
// models (block diag with a neutral fiber) go through here.
inline SpectralData analyze_spectrum(const IMat& m) {
    if (m.n < 2) throw std::invalid_argument("analyze_spectrum: need d >= 2");
    SpectralData sd;
    sd.dim = m.n;
    sd.matrix = m;
    sd.charpoly = char_poly(m);
    sd.determinant = imat_det(m);
    sd.unimodular = (sd.determinant == 1 || sd.determinant == -1);

    detail::IPoly p;
    for (auto c : sd.charpoly) p.c.push_back(c);
    std::vector<double> roots = detail::real_roots(p);
    sd.all_real = (static_cast<int>(roots.size()) == m.n);

    Mat md = m.to_mat();
    for (double r : roots) {
        EigenPair ep;
        ep.value = r;
        ep.exponent = std::log(std::abs(r));
        ep.vector = detail::eigenvector_inverse_iteration(md, r);
        ep.residual = norm(md * ep.vector - r * ep.vector);
        sd.spectrum.push_back(ep);
    }
    std::sort(sd.spectrum.begin(), sd.spectrum.end(),
              [](const EigenPair& x, const EigenPair& y) { return std::abs(x.value) < std::abs(y.value); });

    for (const auto& ep : sd.spectrum) {
        double am = std::abs(ep.value);
        if (std::abs(am - 1.0) <= kUnitCircleTol)
            ++sd.neutral_count;
        else if (am < 1.0)
            ++sd.stable_count;
        else
            ++sd.unstable_count;
        sd.eigen_residual = std::max(sd.eigen_residual, ep.residual);
    }
    sd.hyperbolic = (sd.neutral_count == 0);
    if (!sd.all_real && sd.hyperbolic) {
        // complex pairs: check their moduli against the unit circle too
        for (auto [re, im] : detail::all_roots_dk(p)) {
            if (std::abs(im) < 1e-7) continue;  // real roots already certified above
            double am = std::hypot(re, im);
            if (std::abs(am - 1.0) <= 1e-7) sd.hyperbolic = false;
        }
    }

    sd.simple_real_distinct = sd.all_real;
    for (size_t i = 0; i + 1 < sd.spectrum.size() && sd.simple_real_distinct; ++i) {
        double gap = std::abs(std::abs(sd.spectrum[i + 1].value) - std::abs(sd.spectrum[i].value));
        if (gap <= kUnitCircleTol) sd.simple_real_distinct = false;
    }
    return sd;
}

struct ToralAutomorphism {
    int dim = 0;
    IMat matrix;
    IMat inverse_matrix;
    std::vector<EigenPair> spectrum;  // |λ| ascending
    int stable_count = 0, unstable_count = 0;
    bool simple_real_distinct = false;
    std::vector<std::int64_t> charpoly;
    double eigen_residual = 0;

    double exponent(int sigma) const { return spectrum[static_cast<size_t>(sigma)].exponent; }
    const Vec& eigvec(int sigma) const { return spectrum[static_cast<size_t>(sigma)].vector; }

    // eigenbasis as matrix columns, |λ| ascending
    Mat eigenbasis() const {
        Mat b(dim, dim);
        for (int j = 0; j < dim; ++j) b.set_col(j, spectrum[static_cast<size_t>(j)].vector);
        return b;
    }

    Vec apply(const Vec& x) const { return matrix.to_mat() * x; }
    Vec apply_inverse(const Vec& x) const { return inverse_matrix.to_mat() * x; }
};

inline ToralAutomorphism analyze_matrix(const IMat& m) {
    SpectralData sd = analyze_spectrum(m);
    if (!sd.unimodular)
        throw NotUnimodular("analyze_matrix: |det| = " + std::to_string(sd.determinant));
    if (!sd.hyperbolic)
        throw NotHyperbolic("analyze_matrix: eigenvalue of modulus within 1e-9 of 1");
    ToralAutomorphism t;
    t.dim = sd.dim;
    t.matrix = m;
    t.inverse_matrix = imat_unimodular_inverse(m);
    t.spectrum = sd.spectrum;
    t.stable_count = sd.stable_count;
    t.unstable_count = sd.unstable_count;
    t.simple_real_distinct = sd.simple_real_distinct && sd.hyperbolic;
    t.charpoly = sd.charpoly;
    t.eigen_residual = sd.eigen_residual;
    return t;
}

// ── irreducibility over ℚ ────────────────────────────────────────────────────

inline bool is_irreducible(const IMat& m) {
    if (m.n > kMaxSupportedDim)
        throw DimensionTooLarge("is_irreducible: supported up to d = 6");
    auto cp = char_poly(m);
    const int d = m.n;

    detail::IPoly p;
    for (auto c : cp) p.c.push_back(c);

    // Landau bound on |g|_2 for monic factors g | p, then per-coefficient
    // binomial bound (Mignotte)
    long double norm2 = 0;
    for (auto c : cp) norm2 += static_cast<long double>(c) * static_cast<long double>(c);
    norm2 = std::sqrt(norm2);

    std::int64_t p0 = cp[0];
    std::vector<std::int64_t> const_divisors;
    for (std::int64_t v = 1; v <= std::llabs(p0); ++v)
        if (p0 % v == 0) {
            const_divisors.push_back(v);
            const_divisors.push_back(-v);
        }

    auto binom = [](int n, int k) {
        long double r = 1;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    };

    for (int k = 1; k <= d / 2; ++k) {
        std::vector<std::int64_t> bound(static_cast<size_t>(k), 0);
        for (int i = 1; i < k; ++i)
            bound[static_cast<size_t>(i)] =
                static_cast<std::int64_t>(binom(k, i) * norm2) + 1;
        // candidate g = x^k + g_{k−1} x^{k−1} + … + g_1 x + g_0, g_0 | p(0)
        std::vector<std::int64_t> g(static_cast<size_t>(k) + 1, 0);
        g[static_cast<size_t>(k)] = 1;
        std::function<bool(int)> enumerate = [&](int idx) -> bool {
            if (idx == k) {
                detail::IPoly gp;
                for (auto c : g) gp.c.push_back(c);
                return detail::divides_exactly(p, gp);
            }
            if (idx == 0) {
                for (std::int64_t c0 : const_divisors) {
                    g[0] = c0;
                    if (enumerate(1)) return true;
                }
                return false;
            }
            for (std::int64_t c = -bound[static_cast<size_t>(idx)]; c <= bound[static_cast<size_t>(idx)]; ++c) {
                g[static_cast<size_t>(idx)] = c;
                if (enumerate(idx + 1)) return true;
            }
            return false;
        };
        if (enumerate(0)) return false;  // found a factor of degree 1 ≤ k < d
    }
    return true;
}

// parse "2,1;1,1" (rows separated by ';');  also accepts JSON-style nested
// arrays through the experiment config layer
inline IMat parse_matrix(const std::string& text) {
    std::vector<std::vector<std::int64_t>> rows;
    std::vector<std::int64_t> cur;
    std::string tok;
    auto flush_tok = [&] {
        if (tok.empty()) throw std::invalid_argument("parse_matrix: empty entry");
        size_t pos = 0;
        std::int64_t v = std::stoll(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("parse_matrix: bad integer '" + tok + "'");
        cur.push_back(v);
        tok.clear();
    };
    for (char ch : text) {
        if (ch == ' ' || ch == '\t') continue;
        if (ch == ',') {
            flush_tok();
        } else if (ch == ';') {
            flush_tok();
            rows.push_back(cur);
            cur.clear();
        } else {
            tok += ch;
        }
    }
    if (!tok.empty()) flush_tok();
    if (!cur.empty()) rows.push_back(cur);
    if (rows.empty()) throw std::invalid_argument("parse_matrix: empty");
    const int n = static_cast<int>(rows.size());
    if (n < 2 || n > kMaxDim) throw std::invalid_argument("parse_matrix: need 2 <= d <= 8 rows");
    IMat m(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != n)
            throw std::invalid_argument("parse_matrix: ragged rows (matrix must be square)");
        for (int j = 0; j < n; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
    return m;
}

}  // namespace hyperlab::algebra
