// linalg.hpp — small dense linear algebra for dimensions up to 8.
//
// Everything here is fixed-capacity and value-semantic: a Vec or Mat is a
// stack array plus a runtime dimension.  The torus maps in this project live
// in dimension 2..6, so no allocation and no external BLAS is warranted.
// QR is Householder with the positive-diagonal convention (needed by the
// Lyapunov cocycle), LU is partial-pivot.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperlab {

inline constexpr int kMaxDim = 8;

struct Vec {
    int n = 0;
    std::array<double, kMaxDim> a{};

    Vec() = default;
    explicit Vec(int dim) : n(dim) {
        if (dim < 0 || dim > kMaxDim) throw std::invalid_argument("Vec: bad dimension");
    }
    Vec(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
        if (n > kMaxDim) throw std::invalid_argument("Vec: bad dimension");
        std::copy(xs.begin(), xs.end(), a.begin());
    }

    double& operator[](int i) { return a[static_cast<size_t>(i)]; }
    double operator[](int i) const { return a[static_cast<size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) a[i] += o.a[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) a[i] -= o.a[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) a[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec x, const Vec& y) { return x += y; }
    friend Vec operator-(Vec x, const Vec& y) { return x -= y; }
    friend Vec operator*(double s, Vec x) { return x *= s; }
    friend Vec operator*(Vec x, double s) { return x *= s; }
    friend Vec operator-(Vec x) { return x *= -1.0; }
};

inline double dot(const Vec& x, const Vec& y) {
    double s = 0;
    for (int i = 0; i < x.n; ++i) s += x[i] * y[i];
    return s;
}

inline double norm(const Vec& x) { return std::sqrt(dot(x, x)); }

inline double norm_inf(const Vec& x) {
    double m = 0;
    for (int i = 0; i < x.n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

inline Vec normalized(const Vec& x) {
    double r = norm(x);
    if (r == 0) throw std::domain_error("normalized: zero vector");
    Vec y = x;
    return y *= 1.0 / r;
}

inline Vec unit_vec(int n, int i) {
    Vec e(n);
    e[i] = 1.0;
    return e;
}

struct Mat {
    int rows = 0, cols = 0;
    std::array<double, kMaxDim * kMaxDim> a{};

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c) {
        if (r < 0 || r > kMaxDim || c < 0 || c > kMaxDim)
            throw std::invalid_argument("Mat: bad dimension");
    }

    double& operator()(int i, int j) { return a[static_cast<size_t>(i * kMaxDim + j)]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i * kMaxDim + j)]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    Vec col(int j) const {
        Vec v(rows);
        for (int i = 0; i < rows; ++i) v[i] = (*this)(i, j);
        return v;
    }
    void set_col(int j, const Vec& v) {
        for (int i = 0; i < rows; ++i) (*this)(i, j) = v[i];
    }

    Mat& operator+=(const Mat& o) {
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) (*this)(i, j) += o(i, j);
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) (*this)(i, j) -= o(i, j);
        return *this;
    }
    Mat& operator*=(double s) {
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) (*this)(i, j) *= s;
        return *this;
    }
    friend Mat operator+(Mat x, const Mat& y) { return x += y; }
    friend Mat operator-(Mat x, const Mat& y) { return x -= y; }
    friend Mat operator*(double s, Mat x) { return x *= s; }
};

inline Vec operator*(const Mat& m, const Vec& x) {
    Vec y(m.rows);
    for (int i = 0; i < m.rows; ++i) {
        double s = 0;
        for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

inline Mat operator*(const Mat& x, const Mat& y) {
    Mat z(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            double xik = x(i, k);
            if (xik == 0) continue;
            for (int j = 0; j < y.cols; ++j) z(i, j) += xik * y(k, j);
        }
    return z;
}

inline Mat transpose(const Mat& m) {
    Mat t(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

inline double frobenius_norm(const Mat& m) {
    double s = 0;
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

// Operator 2-norm via a few power iterations on MᵀM; adequate for the
// certified C¹ bounds where only an upper-ish estimate with slack is used.
inline double operator_norm(const Mat& m, int iters = 60) {
    Mat g = transpose(m) * m;
    Vec v(m.cols);
    for (int i = 0; i < m.cols; ++i) v[i] = 1.0 / std::sqrt(double(m.cols) + i);
    v = normalized(v);
    double lam = 0;
    for (int k = 0; k < iters; ++k) {
        Vec w = g * v;
        lam = norm(w);
        if (lam == 0) return 0;
        v = w * (1.0 / lam);
    }
    return std::sqrt(lam);
}

// ── LU with partial pivoting ─────────────────────────────────────────────────

struct LU {
    Mat lu;
    std::array<int, kMaxDim> perm{};
    int sign = 1;
    bool singular = false;
};

inline LU lu_decompose(Mat m) {
    const int n = m.rows;
    LU r;
    for (int i = 0; i < n; ++i) r.perm[i] = i;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(m(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > best) {
                best = std::abs(m(i, k));
                piv = i;
            }
        if (best == 0.0) {
            r.singular = true;
            r.lu = m;
            return r;
        }
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            std::swap(r.perm[k], r.perm[piv]);
            r.sign = -r.sign;
        }
        for (int i = k + 1; i < n; ++i) {
            m(i, k) /= m(k, k);
            for (int j = k + 1; j < n; ++j) m(i, j) -= m(i, k) * m(k, j);
        }
    }
    r.lu = m;
    return r;
}

inline Vec lu_solve(const LU& f, const Vec& b) {
    const int n = f.lu.rows;
    if (f.singular) throw std::domain_error("lu_solve: singular matrix");
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        double s = b[f.perm[i]];
        for (int j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
        y[i] = s;
    }
    Vec x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
        x[i] = s / f.lu(i, i);
    }
    return x;
}

inline double det(const Mat& m) {
    LU f = lu_decompose(m);
    if (f.singular) return 0.0;
    double d = f.sign;
    for (int i = 0; i < m.rows; ++i) d *= f.lu(i, i);
    return d;
}

inline Mat inverse(const Mat& m) {
    LU f = lu_decompose(m);
    if (f.singular) throw std::domain_error("inverse: singular matrix");
    Mat inv(m.rows, m.cols);
    for (int j = 0; j < m.cols; ++j) inv.set_col(j, lu_solve(f, unit_vec(m.rows, j)));
    return inv;
}

inline Vec solve(const Mat& m, const Vec& b) { return lu_solve(lu_decompose(m), b); }

// ── Householder QR, positive-diagonal convention ─────────────────────────────

struct QR {
    Mat q;  // orthogonal, rows×rows
    Mat r;  // upper triangular with R(i,i) ≥ 0
};

inline QR qr_decompose(const Mat& m) {
    const int n = m.rows;
    Mat r = m;
    Mat q = Mat::identity(n);
    for (int k = 0; k < std::min(n, m.cols); ++k) {
        double alpha = 0;
        for (int i = k; i < n; ++i) alpha += r(i, k) * r(i, k);
        alpha = std::sqrt(alpha);
        if (alpha == 0) continue;
        if (r(k, k) > 0) alpha = -alpha;
        Vec v(n);
        for (int i = k; i < n; ++i) v[i] = r(i, k);
        v[k] -= alpha;
        double vn2 = dot(v, v);
        if (vn2 == 0) continue;
        // apply H = I − 2 v vᵀ / (vᵀv) on the left of R and the right of Qᵀ
        for (int j = k; j < m.cols; ++j) {
            double s = 0;
            for (int i = k; i < n; ++i) s += v[i] * r(i, j);
            s *= 2.0 / vn2;
            for (int i = k; i < n; ++i) r(i, j) -= s * v[i];
        }
        for (int j = 0; j < n; ++j) {
            double s = 0;
            for (int i = k; i < n; ++i) s += v[i] * q(j, i);
            s *= 2.0 / vn2;
            for (int i = k; i < n; ++i) q(j, i) -= s * v[i];
        }
        r(k, k) = alpha;
        for (int i = k + 1; i < n; ++i) r(i, k) = 0;
    }
    // sign-fix so the diagonal of R is non-negative
    for (int k = 0; k < std::min(n, m.cols); ++k) {
        if (r(k, k) < 0) {
            for (int j = 0; j < m.cols; ++j) r(k, j) = -r(k, j);
            for (int i = 0; i < n; ++i) q(i, k) = -q(i, k);
        }
    }
    return {q, r};
}

// Gram-Schmidt orthonormalization of the columns of m (columns assumed
// independent).  Keeps the leading-column flag direction.
inline Mat orthonormalize_columns(const Mat& m) {
    Mat q(m.rows, m.cols);
    for (int j = 0; j < m.cols; ++j) {
        Vec v = m.col(j);
        for (int rep = 0; rep < 2; ++rep)
            for (int k = 0; k < j; ++k) {
                Vec qk = q.col(k);
                v -= dot(v, qk) * qk;
            }
        q.set_col(j, normalized(v));
    }
    return q;
}

// ── symmetric eigenproblem (cyclic Jacobi) ───────────────────────────────────

struct SymEigen {
    Vec values;   // ascending
    Mat vectors;  // columns match values
};

inline SymEigen jacobi_eigen_sym(Mat m) {
    const int n = m.rows;
    Mat v = Mat::identity(n);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(m(p, q)) < 1e-300) continue;
                double theta = (m(q, q) - m(p, p)) / (2 * m(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::array<int, kMaxDim> order{};
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.begin() + n, [&](int a, int b) { return m(a, a) < m(b, b); });
    SymEigen se;
    se.values = Vec(n);
    se.vectors = Mat(n, n);
    for (int i = 0; i < n; ++i) {
        se.values[i] = m(order[static_cast<size_t>(i)], order[static_cast<size_t>(i)]);
        se.vectors.set_col(i, v.col(order[static_cast<size_t>(i)]));
    }
    return se;
}

// ── Integer matrices (exact) ─────────────────────────────────────────────────

struct IMat {
    int n = 0;
    std::array<std::int64_t, kMaxDim * kMaxDim> a{};

    IMat() = default;
    explicit IMat(int dim) : n(dim) {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("IMat: bad dimension");
    }
    IMat(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
        n = static_cast<int>(rows.size());
        if (n < 1 || n > kMaxDim) throw std::invalid_argument("IMat: bad dimension");
        int i = 0;
        for (auto& r : rows) {
            if (static_cast<int>(r.size()) != n) throw std::invalid_argument("IMat: not square");
            int j = 0;
            for (auto v : r) (*this)(i, j++) = v;
            ++i;
        }
    }

    std::int64_t& operator()(int i, int j) { return a[static_cast<size_t>(i * kMaxDim + j)]; }
    std::int64_t operator()(int i, int j) const { return a[static_cast<size_t>(i * kMaxDim + j)]; }

    bool operator==(const IMat& o) const {
        if (n != o.n) return false;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if ((*this)(i, j) != o(i, j)) return false;
        return true;
    }

    Mat to_mat() const {
        Mat m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = static_cast<double>((*this)(i, j));
        return m;
    }
};

inline IMat imat_mul(const IMat& x, const IMat& y) {
    IMat z(x.n);
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < x.n; ++j) {
            __int128 s = 0;
            for (int k = 0; k < x.n; ++k)
                s += static_cast<__int128>(x(i, k)) * y(k, j);
            if (s > INT64_MAX || s < INT64_MIN) throw std::overflow_error("imat_mul: overflow");
            z(i, j) = static_cast<std::int64_t>(s);
        }
    return z;
}

inline IMat imat_pow(const IMat& m, int p) {
    IMat r(m.n);
    for (int i = 0; i < m.n; ++i) r(i, i) = 1;
    IMat base = m;
    while (p > 0) {
        if (p & 1) r = imat_mul(r, base);
        base = (p > 1) ? imat_mul(base, base) : base;
        p >>= 1;
    }
    return r;
}

// Exact determinant via fraction-free Bareiss elimination.
inline std::int64_t imat_det(const IMat& m) {
    const int n = m.n;
    std::array<__int128, kMaxDim * kMaxDim> w{};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w[i * kMaxDim + j] = m(i, j);
    __int128 prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (w[k * kMaxDim + k] == 0) {
            int piv = -1;
            for (int i = k + 1; i < n; ++i)
                if (w[i * kMaxDim + k] != 0) {
                    piv = i;
                    break;
                }
            if (piv < 0) return 0;
            for (int j = 0; j < n; ++j) std::swap(w[k * kMaxDim + j], w[piv * kMaxDim + j]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                w[i * kMaxDim + j] =
                    (w[i * kMaxDim + j] * w[k * kMaxDim + k] - w[i * kMaxDim + k] * w[k * kMaxDim + j]) / prev;
            }
            w[i * kMaxDim + k] = 0;
        }
        prev = w[k * kMaxDim + k];
    }
    __int128 d = sign * w[(n - 1) * kMaxDim + (n - 1)];
    if (d > INT64_MAX || d < INT64_MIN) throw std::overflow_error("imat_det: overflow");
    return static_cast<std::int64_t>(d);
}

// Exact inverse of a unimodular integer matrix (det = ±1) via adjugate.
inline IMat imat_unimodular_inverse(const IMat& m) {
    const int n = m.n;
    std::int64_t d = imat_det(m);
    if (d != 1 && d != -1) throw std::domain_error("imat_unimodular_inverse: |det| != 1");
    IMat inv(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            // cofactor C_ji
            IMat minor(n == 1 ? 1 : n - 1);
            if (n == 1) {
                inv(0, 0) = d;
                continue;
            }
            int mi = 0;
            for (int r = 0; r < n; ++r) {
                if (r == j) continue;
                int mj = 0;
                for (int c = 0; c < n; ++c) {
                    if (c == i) continue;
                    minor(mi, mj++) = m(r, c);
                }
                ++mi;
            }
            std::int64_t cof = imat_det(minor);
            if (((i + j) & 1) != 0) cof = -cof;
            inv(i, j) = cof * d;  // divide by det = multiply, since det = ±1
        }
    return inv;
}

}  // namespace hyperlab
