#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hyperlab/maps.hpp"
#include "hyperlab/rng.hpp"

using namespace hyperlab;
using namespace hyperlab::algebra;
using namespace hyperlab::maps;

namespace {

const IMat kCat{{2, 1}, {1, 1}};
const IMat kCompanion{{0, 0, -1}, {1, 0, 0}, {0, 1, 3}};

ShearFactor sine_shear(int direction, int driver, double amplitude) {
    return ShearFactor{direction, driver, TrigPoly1::sine(), amplitude};
}

// independent oracle: central finite differences of the lift, O(h²)
Mat fd_jacobian(const SmoothTorusMap& f, const Vec& x, double h = 1e-5) {
    Mat j(f.dim(), f.dim());
    for (int c = 0; c < f.dim(); ++c) {
        Vec xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        Vec d = f.eval_lift(xp) - f.eval_lift(xm);
        for (int r = 0; r < f.dim(); ++r) j(r, c) = d[r] / (2 * h);
    }
    return j;
}

Vec random_point(Rng& rng, int d) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.uniform01();
    return x;
}

}  // namespace

TEST_CASE("no shears gives the linear map with zero distance bound") {
    auto L = analyze_matrix(kCat);
    auto f = make_shear_perturbation(L, {});
    CHECK(f.c1_distance_bound() == 0.0);
    Vec x{0.3, 0.8};
    Vec y = f.eval(x);
    Vec exact = algebra::reduce_mod1_vec(L.apply(x));
    CHECK(torus_distance(y, exact) < 1e-15);
}

TEST_CASE("chain-rule Jacobian matches finite differences") {
    auto L = analyze_matrix(kCat);
    auto f = make_shear_perturbation(L, {sine_shear(0, 1, 0.1)});
    auto L3 = analyze_matrix(kCompanion);
    auto g3 = make_conjugated_linear(L3, {sine_shear(0, 2, 0.05), sine_shear(1, 0, 0.03)});

    Rng rng(99);
    for (int rep = 0; rep < 200; ++rep) {
        Vec x = random_point(rng, 2);
        Mat j = f.jacobian(x), jf = fd_jacobian(f, x);
        CHECK(frobenius_norm(j - jf) < 1e-6);

        Vec x3 = random_point(rng, 3);
        Mat j3 = g3.map.jacobian(x3), jf3 = fd_jacobian(g3.map, x3);
        CHECK(frobenius_norm(j3 - jf3) < 1e-6);
    }
}

TEST_CASE("shear-built maps preserve volume exactly") {
    auto L = analyze_matrix(kCat);
    auto f = make_shear_perturbation(L, {sine_shear(0, 1, 0.1), sine_shear(1, 0, 0.07)});
    Rng rng(7);
    for (int rep = 0; rep < 10000; ++rep) {
        Vec x = random_point(rng, 2);
        CHECK(std::abs(std::abs(det(f.jacobian(x))) - 1.0) <= 1e-12);
    }
}

TEST_CASE("inverse consistency within 1e-10") {
    auto L = analyze_matrix(kCat);
    auto f = make_shear_perturbation(L, {sine_shear(0, 1, 0.1)});
    auto L3 = analyze_matrix(kCompanion);
    auto c3 = make_conjugated_linear(L3, {sine_shear(2, 0, 0.05)});
    Rng rng(14);
    for (int rep = 0; rep < 2000; ++rep) {
        Vec x = random_point(rng, 2);
        CHECK(torus_distance(f.eval(f.inverse_eval(x)), x) <= 1e-10);
        Vec y = random_point(rng, 3);
        CHECK(torus_distance(c3.map.eval(c3.map.inverse_eval(y)), y) <= 1e-10);
    }
}

TEST_CASE("lift linear part equals the stored integer matrix exactly") {
    auto L = analyze_matrix(kCat);
    auto f = make_shear_perturbation(L, {sine_shear(1, 0, 0.08)});
    Vec x{0.37, 0.61};
    for (int k = 0; k < 2; ++k) {
        Vec xk = x;
        xk[k] += 1.0;
        Vec d = f.eval_lift(xk) - f.eval_lift(x);
        for (int i = 0; i < 2; ++i) CHECK(d[i] == Catch::Approx(double(kCat(i, k))).margin(1e-12));
    }
}

TEST_CASE("oversized perturbation is rejected") {
    auto L = analyze_matrix(kCat);
    CHECK_THROWS_AS(make_shear_perturbation(L, {sine_shear(0, 1, 3.0)}), PerturbationTooLarge);
}

TEST_CASE("conjugated-linear requires the generator to fix 0") {
    auto L = analyze_matrix(kCat);
    TrigPoly1 cosine;  // cos(2πt)/2π does not vanish at 0
    cosine.cos_coef = {1.0 / kTwoPi};
    CHECK_THROWS_AS(make_conjugated_linear(L, {ShearFactor{0, 1, cosine, 0.05}}),
                    std::invalid_argument);
}

TEST_CASE("identity generator reproduces L; displacement is periodic") {
    auto L = analyze_matrix(kCat);
    auto c = make_conjugated_linear(L, {});
    Vec x{0.2, 0.9};
    CHECK(torus_distance(c.map.eval(x), algebra::reduce_mod1_vec(L.apply(x))) < 1e-15);

    auto f = make_shear_perturbation(L, {sine_shear(0, 1, 0.1)});
    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        Vec p = random_point(rng, 2);
        Vec shifted = p;
        shifted[rep % 2] += 1.0;
        Vec d0 = f.displacement(p), d1 = f.displacement(shifted);
        CHECK(norm(d0 - d1) <= 1e-12);
    }
}

TEST_CASE("conjugated map evaluates as g(L(g^{-1}(x)))") {
    auto L = analyze_matrix(kCat);
    auto c = make_conjugated_linear(L, {sine_shear(0, 1, 0.05)});
    Rng rng(21);
    for (int rep = 0; rep < 500; ++rep) {
        Vec x = random_point(rng, 2);
        Vec manual = c.generator_eval(L.apply(c.generator_inverse_eval(x)));
        CHECK(torus_distance(c.map.eval(x), algebra::reduce_mod1_vec(manual)) < 1e-12);
        // generator round trip
        Vec rt = c.generator_inverse_eval(c.generator_eval(x));
        CHECK(norm(rt - x) < 1e-12);
    }
}

TEST_CASE("skew product structure and volume preservation") {
    auto L = analyze_matrix(kCat);
    auto base = make_linear(L);
    TrigPolyNd alpha;
    alpha.nvars = 2;
    alpha.terms.push_back({{1, 0, 0}, 0.0, 0.15});
    TrigPolyNd q;  // depends on base only -> exactly volume preserving
    q.nvars = 3;
    q.terms.push_back({{0, 1, 0}, 0.1, 0.0});
    auto sp = make_skew_product(base, alpha, q, 0.2);
    REQUIRE(sp.volume_preserving);
    REQUIRE(sp.map.dim() == 3);

    Rng rng(5);
    for (int rep = 0; rep < 300; ++rep) {
        Vec xy = random_point(rng, 3);
        Vec img = sp.map.eval(xy);
        // base coordinates transform by the base map alone
        Vec bx{xy[0], xy[1]};
        Vec bimg = base.eval(bx);
        CHECK(torus_distance(Vec{img[0], img[1]}, bimg) < 1e-12);
        CHECK(std::abs(std::abs(det(sp.map.jacobian(xy))) - 1.0) <= 1e-12);
        CHECK(torus_distance(sp.map.eval(sp.map.inverse_eval(xy)), xy) <= 1e-10);
        Mat jf = fd_jacobian(sp.map, xy);
        CHECK(frobenius_norm(sp.map.jacobian(xy) - jf) < 1e-6);
    }

    // fiber-dependent q: still invertible, no longer volume preserving
    TrigPolyNd qy;
    qy.nvars = 3;
    qy.terms.push_back({{0, 0, 1}, 0.0, 0.05});
    auto spy = make_skew_product(base, alpha, qy, 0.3);
    CHECK_FALSE(spy.volume_preserving);
    for (int rep = 0; rep < 100; ++rep) {
        Vec xy = random_point(rng, 3);
        CHECK(torus_distance(spy.map.eval(spy.map.inverse_eval(xy)), xy) <= 1e-10);
        Mat jf = fd_jacobian(spy.map, xy);
        CHECK(frobenius_norm(spy.map.jacobian(xy) - jf) < 1e-6);
    }
}

TEST_CASE("katok family grids and the m = 0 degenerate case") {
    auto L = analyze_matrix(kCat);
    auto fam0 = make_katok_family(L, {sine_shear(0, 1, 0.1)}, ExponentProfile::Varying, 0);
    REQUIRE(fam0.size() == 1);
    CHECK(fam0.ts[0] == 0.0);
    // t = 0 member is L itself
    Vec x{0.4, 0.7};
    CHECK(torus_distance(fam0.members[0].eval(x), algebra::reduce_mod1_vec(L.apply(x))) < 1e-15);

    auto fam = make_katok_family(L, {sine_shear(0, 1, 0.1)}, ExponentProfile::Constant, 4);
    REQUIRE(fam.size() == 5);
    CHECK(fam.ts[2] == Catch::Approx(0.5));
    for (const auto& g : fam.members) {
        CHECK(torus_distance(g.eval(g.inverse_eval(x)), x) <= 1e-10);
        CHECK(std::abs(std::abs(det(g.jacobian(x))) - 1.0) <= 1e-12);
    }
}

TEST_CASE("map documents round-trip through json and hash deterministically") {
    auto L = analyze_matrix(kCat);
    auto f = make_shear_perturbation(L, {sine_shear(0, 1, 0.1)});
    auto g = make_shear_perturbation(L, {sine_shear(0, 1, 0.1)});
    CHECK(f.content_hash() == g.content_hash());
    auto h = make_shear_perturbation(L, {sine_shear(0, 1, 0.11)});
    CHECK(f.content_hash() != h.content_hash());
    CHECK(f.document().at("type") == "shear_perturbation");
}
