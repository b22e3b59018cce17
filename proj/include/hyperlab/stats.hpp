// stats.hpp — means, batch-mean standard errors, and least-squares line fits.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hyperlab {

inline double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty");
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean(xs), s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

inline double stderr_of_mean(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

// Batch-mean standard error for a correlated series: split into `nblocks`
// contiguous blocks, take block means, report the stderr of those means.
inline double block_stderr(const std::vector<double>& series, int nblocks = 20) {
    if (series.size() < static_cast<size_t>(2 * nblocks)) return stderr_of_mean(series);
    const size_t bs = series.size() / static_cast<size_t>(nblocks);
    std::vector<double> bm;
    bm.reserve(static_cast<size_t>(nblocks));
    for (int b = 0; b < nblocks; ++b) {
        double s = 0;
        for (size_t i = 0; i < bs; ++i) s += series[static_cast<size_t>(b) * bs + i];
        bm.push_back(s / static_cast<double>(bs));
    }
    return stderr_of_mean(bm);
}

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 1.0;  // 1 for a perfect (or degenerate zero-variance) fit
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    const size_t n = xs.size();
    if (n != ys.size() || n < 2) throw std::invalid_argument("fit_line: need >= 2 points");
    double mx = mean(xs), my = mean(ys);
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (syy > 0) {
        double ssr = syy - f.slope * sxy;
        f.r2 = std::max(0.0, 1.0 - ssr / syy);
    }
    return f;
}

// Best affine fit over contiguous windows of length >= min_len, maximizing R²
// (ties break toward the longer window).  Returns the window [lo, hi).
struct WindowFit {
    LineFit fit;
    size_t lo = 0, hi = 0;
};

inline WindowFit best_window_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                                 size_t min_len) {
    const size_t n = xs.size();
    if (n < min_len || min_len < 2) throw std::invalid_argument("best_window_fit: too few points");
    WindowFit best;
    bool have = false;
    for (size_t lo = 0; lo + min_len <= n; ++lo) {
        for (size_t hi = lo + min_len; hi <= n; ++hi) {
            std::vector<double> wx(xs.begin() + static_cast<long>(lo), xs.begin() + static_cast<long>(hi));
            std::vector<double> wy(ys.begin() + static_cast<long>(lo), ys.begin() + static_cast<long>(hi));
            LineFit f = fit_line(wx, wy);
            bool better = !have || f.r2 > best.fit.r2 + 1e-12 ||
                          (std::abs(f.r2 - best.fit.r2) <= 1e-12 && hi - lo > best.hi - best.lo);
            if (better) {
                best = {f, lo, hi};
                have = true;
            }
        }
    }
    return best;
}

}  // namespace hyperlab
