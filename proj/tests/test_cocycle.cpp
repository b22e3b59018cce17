#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hyperlab/cocycle.hpp"

using namespace hyperlab;
using namespace hyperlab::algebra;
using namespace hyperlab::cocycle;
using namespace hyperlab::maps;

namespace {

const IMat kCat{{2, 1}, {1, 1}};
const IMat kCompanion{{0, 0, -1}, {1, 0, 0}, {0, 1, 3}};
const double kChi = std::log((3.0 + std::sqrt(5.0)) / 2.0);

ShearFactor sine_shear(int direction, int driver, double amplitude) {
    return ShearFactor{direction, driver, TrigPoly1::sine(), amplitude};
}

double bisect_root(double lo, double hi) {
    auto f = [](double x) { return x * x * x - 3 * x * x + 1; };
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if ((f(mid) < 0) == (flo < 0)) {
            lo = mid;
            flo = f(mid);
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("cat map exponents are ±log((3+sqrt 5)/2) to 1e-9 at N = 1e4") {
    auto L = analyze_matrix(kCat);
    auto f = make_linear(L);
    auto est = lyapunov_exponents(f, Vec{0.37, 0.18}, 10000, 1);
    REQUIRE(est.exponents.size() == 2);
    CHECK(std::abs(est.exponents[0] + kChi) < 1e-9);
    CHECK(std::abs(est.exponents[1] - kChi) < 1e-9);
    CHECK(std::abs(est.exponent_sum) < 1e-9);
    CHECK(std::abs(est.exponent_sum - est.log_det_average) < 1e-9);
}

TEST_CASE("companion exponents match independent root isolation to 1e-6") {
    const double r1 = std::abs(bisect_root(-1.0, 0.0));
    const double r2 = bisect_root(0.0, 1.0);
    const double r3 = bisect_root(2.0, 3.0);
    auto L = analyze_matrix(kCompanion);
    auto f = make_linear(L);
    auto est = lyapunov_exponents(f, Vec{0.11, 0.82, 0.45}, 10000, 1);
    REQUIRE(est.exponents.size() == 3);
    CHECK(std::abs(est.exponents[0] - std::log(r1)) < 1e-6);
    CHECK(std::abs(est.exponents[1] - std::log(r2)) < 1e-6);
    CHECK(std::abs(est.exponents[2] - std::log(r3)) < 1e-6);
}

TEST_CASE("smooth conjugates of L keep the linear exponents (within 2e-3)") {
    auto L = analyze_matrix(kCat);
    auto c = make_conjugated_linear(L, {sine_shear(0, 1, 0.05)});
    auto est = lyapunov_exponents(c.map, std::nullopt, 100000, 77);
    CHECK(std::abs(est.exponents[1] - kChi) < 2e-3);
    CHECK(std::abs(est.exponents[0] + kChi) < 2e-3);
    CHECK(std::abs(est.exponent_sum) < 1e-6);
}

TEST_CASE("exponent sum is zero for volume-preserving perturbations, any seed") {
    auto L = analyze_matrix(kCat);
    auto f = make_shear_perturbation(L, {sine_shear(0, 1, 0.1), sine_shear(1, 0, 0.06)});
    for (std::uint64_t seed : {3ULL, 19ULL, 10007ULL}) {
        auto est = lyapunov_exponents(f, std::nullopt, 20000, seed);
        CHECK(std::abs(est.exponent_sum) < 1e-6);
    }
}

TEST_CASE("duality: exponents of the inverse map are the negated reversal") {
    auto L = analyze_matrix(kCat);
    auto f = make_shear_perturbation(L, {sine_shear(0, 1, 0.1)});
    auto fi = f.inverse_map();
    auto a = lyapunov_exponents(f, Vec{0.23, 0.71}, 40000, 5);
    auto b = lyapunov_exponents(fi, Vec{0.23, 0.71}, 40000, 5);
    for (size_t i = 0; i < 2; ++i) {
        double combined = 3 * (a.stderrs[i] + b.stderrs[1 - i]);
        CHECK(std::abs(a.exponents[i] + b.exponents[1 - i]) <= combined + 1e-4);
    }
}

TEST_CASE("volume averages: linear map has zero variance across samples") {
    auto L = analyze_matrix(kCat);
    auto f = make_linear(L);
    auto est = volume_average_exponents(f, 10, 2000, 4);
    REQUIRE(est.volume_averaged);
    CHECK(est.stderrs[0] < 1e-12);
    CHECK(est.stderrs[1] < 1e-12);
    CHECK(std::abs(est.exponents[1] - kChi) < 1e-9);
}

TEST_CASE("fiber exponent of an unperturbed skew rotation is exactly zero") {
    auto L = analyze_matrix(kCat);
    auto base = make_linear(L);
    // product with a constant rotation: block-diagonal cocycle, exact to 1e-9
    TrigPolyNd alpha_const;
    alpha_const.nvars = 2;
    alpha_const.c0 = 0.37;
    auto sp = make_skew_product(base, alpha_const, TrigPolyNd{}, 0.0);
    auto est = volume_average_exponents(sp.map, 10, 3000, 9);
    REQUIRE(est.exponents.size() == 3);
    CHECK(std::abs(est.exponents[0] + kChi) < 1e-9);
    CHECK(std::abs(est.exponents[1]) < 1e-9);
    CHECK(std::abs(est.exponents[2] - kChi) < 1e-9);

    // x-dependent rotation angles couple the frame, leaving only the O(1/N)
    // seed transient; the exponents themselves are unchanged
    TrigPolyNd alpha;
    alpha.nvars = 2;
    alpha.terms.push_back({{1, 0, 0}, 0.0, 0.2});
    auto sp2 = make_skew_product(base, alpha, TrigPolyNd{}, 0.0);
    auto est2 = lyapunov_exponents(sp2.map, Vec{0.21, 0.62, 0.13}, 100000, 9);
    CHECK(std::abs(est2.exponents[1]) < 1e-4);
    CHECK(std::abs(est2.exponents[2] - kChi) < 1e-4);
}

TEST_CASE("invariant splitting of L is the eigenbasis after one refinement") {
    auto L = analyze_matrix(kCat);
    auto f = make_linear(L);
    auto frames = invariant_splitting(f, {Vec{0.2, 0.5}, Vec{0.9, 0.1}});
    for (const auto& bf : frames) {
        for (int s = 0; s < 2; ++s) {
            CHECK(norm(bf.directions[static_cast<size_t>(s)] - L.eigvec(s)) < 1e-12);
            CHECK(bf.residuals[static_cast<size_t>(s)] <= 1e-12);
        }
        REQUIRE(bf.domination_margins.size() == 1);
        CHECK(bf.domination_margins[0] > 5.0);  // ratio λ_u/λ_s ≈ 6.85
    }
}

TEST_CASE("perturbed splitting: frame invariance and a linear-in-eps angle") {
    auto L = analyze_matrix(kCat);
    Rng rng(31);
    for (double eps : {0.02, 0.05, 0.1}) {
        auto f = make_shear_perturbation(L, {sine_shear(0, 1, eps)});
        double max_angle = 0;
        for (int rep = 0; rep < 20; ++rep) {
            Vec x{rng.uniform01(), rng.uniform01()};
            Vec eu = bundle_direction(f, x, 1);
            Vec eu_next = bundle_direction(f, f.eval(x), 1);
            Vec push = normalized(f.jacobian(x) * eu);
            double mismatch = std::min(norm(push - eu_next), norm(push + eu_next));
            CHECK(mismatch <= 1e-6);
            max_angle = std::max(max_angle, std::acos(std::min(1.0, std::abs(dot(eu, L.eigvec(1))))));
        }
        // angle(e_u, E^u_L) ≤ C·eps with a generous C
        CHECK(max_angle <= 3.0 * eps);
    }
}

TEST_CASE("three-dimensional splitting resolves the intermediate bundle") {
    auto L = analyze_matrix(kCompanion);
    auto c = make_conjugated_linear(L, {sine_shear(0, 2, 0.03)});
    Rng rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        Vec x{rng.uniform01(), rng.uniform01(), rng.uniform01()};
        for (int s = 0; s < 3; ++s) {
            Vec e = bundle_direction(c.map, x, s);
            Vec e_next = bundle_direction(c.map, c.map.eval(x), s);
            Vec push = normalized(c.map.jacobian(x) * e);
            CHECK(std::min(norm(push - e_next), norm(push + e_next)) <= 1e-6);
        }
    }
}

TEST_CASE("cone collapse on oversized perturbations") {
    auto L = analyze_matrix(kCompanion);
    // weak stable gap 0.532 vs 0.653 cannot survive a large mixing shear
    auto f = make_shear_perturbation(L, {sine_shear(0, 1, 0.5), sine_shear(1, 2, 0.5)}, 100.0);
    bool collapsed = false;
    try {
        invariant_splitting(f, {Vec{0.3, 0.4, 0.5}});
        auto rep = verify_dominated(f, 4, 2);
        collapsed = !rep.margins_ok;
    } catch (const ConeCollapse&) {
        collapsed = true;
    }
    CHECK(collapsed);
}

TEST_CASE("verify_dominated accepts the canonical negative control") {
    auto L = analyze_matrix(kCat);
    auto f = make_shear_perturbation(L, {sine_shear(0, 1, 0.1)});
    auto rep = verify_dominated(f, 6, 3);
    CHECK(rep.margins_ok);
    CHECK(rep.c1_bound > 0);
    CHECK(rep.certified_radius > 0);
}

TEST_CASE("determinism: same seed and any worker count give identical bits") {
    auto L = analyze_matrix(kCat);
    auto f = make_shear_perturbation(L, {sine_shear(0, 1, 0.08)});
    setenv("HYPERLAB_WORKERS", "1", 1);
    auto a = volume_average_exponents(f, 12, 5000, 42);
    setenv("HYPERLAB_WORKERS", "7", 1);
    auto b = volume_average_exponents(f, 12, 5000, 42);
    unsetenv("HYPERLAB_WORKERS");
    for (size_t i = 0; i < a.exponents.size(); ++i) {
        CHECK(a.exponents[i] == b.exponents[i]);
        CHECK(a.stderrs[i] == b.stderrs[i]);
    }
}
