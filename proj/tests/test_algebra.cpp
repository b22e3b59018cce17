#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hyperlab/algebra.hpp"
#include "hyperlab/rng.hpp"

using namespace hyperlab;
using namespace hyperlab::algebra;

namespace {

// Independent root oracle: plain sign-change bisection of a cubic on a given
// bracket.  Deliberately ignorant of the Sturm machinery under test.
double bisect_root(double (*f)(double), double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double companion_poly(double x) { return x * x * x - 3 * x * x + 1; }

const IMat kCat{{2, 1}, {1, 1}};
const IMat kCompanion{{0, 0, -1}, {1, 0, 0}, {0, 1, 3}};

}  // namespace

TEST_CASE("cat map spectrum matches the closed-form roots of x^2-3x+1") {
    const double lam_u = (3.0 + std::sqrt(5.0)) / 2.0;
    const double chi = std::log(lam_u);  // 0.9624236501192069

    auto t = analyze_matrix(kCat);
    REQUIRE(t.dim == 2);
    REQUIRE(t.stable_count == 1);
    REQUIRE(t.unstable_count == 1);
    REQUIRE(t.simple_real_distinct);
    CHECK(t.spectrum[0].value == Catch::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(t.spectrum[1].value == Catch::Approx(lam_u).epsilon(1e-12));
    CHECK(std::abs(t.spectrum[1].exponent - chi) < 1e-12);
    CHECK(std::abs(t.spectrum[0].exponent + chi) < 1e-12);
    CHECK(t.eigen_residual <= 1e-10);
}

TEST_CASE("identity and rotation matrices are rejected as non-hyperbolic") {
    CHECK_THROWS_AS(analyze_matrix(IMat{{1, 0}, {0, 1}}), NotHyperbolic);
    CHECK_THROWS_AS(analyze_matrix(IMat{{0, -1}, {1, 0}}), NotHyperbolic);
}

TEST_CASE("non-unimodular matrix is rejected") {
    CHECK_THROWS_AS(analyze_matrix(IMat{{2, 0}, {0, 1}}), NotUnimodular);
}

TEST_CASE("d=3 companion of x^3-3x^2+1: three real eigenvalues, |det|=1") {
    const double r1 = bisect_root(companion_poly, -1.0, 0.0);
    const double r2 = bisect_root(companion_poly, 0.0, 1.0);
    const double r3 = bisect_root(companion_poly, 2.0, 3.0);

    auto t = analyze_matrix(kCompanion);
    REQUIRE(t.dim == 3);
    REQUIRE(t.spectrum.size() == 3);
    REQUIRE(t.simple_real_distinct);
    CHECK(t.stable_count == 2);
    CHECK(t.unstable_count == 1);
    // spectrum sorted by |value| ascending: |r1|≈0.532 < r2≈0.653 < r3≈2.879
    CHECK(t.spectrum[0].value == Catch::Approx(r1).margin(1e-12));
    CHECK(t.spectrum[1].value == Catch::Approx(r2).margin(1e-12));
    CHECK(t.spectrum[2].value == Catch::Approx(r3).margin(1e-12));
    CHECK(t.eigen_residual <= 1e-10);
    CHECK(std::llabs(imat_det(kCompanion)) == 1);
}

TEST_CASE("exponent sum equals log|det| = 0 for accepted automorphisms") {
    for (const IMat& m : {kCat, kCompanion, IMat{{1, 1}, {1, 2}}}) {
        auto t = analyze_matrix(m);
        double s = 0;
        for (const auto& ep : t.spectrum) s += ep.exponent;
        CHECK(std::abs(s) < 1e-9);
    }
}

TEST_CASE("transpose has the same eigenvalue multiset") {
    IMat mt(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) mt(i, j) = kCompanion(j, i);
    auto a = analyze_matrix(kCompanion);
    auto b = analyze_matrix(mt);
    for (size_t i = 0; i < 3; ++i)
        CHECK(a.spectrum[i].value == Catch::Approx(b.spectrum[i].value).margin(1e-9));
}

TEST_CASE("irreducibility: cat map and companion yes, block-diagonal no") {
    CHECK(is_irreducible(kCat));
    CHECK(is_irreducible(kCompanion));

    IMat block(4);
    block(0, 0) = 2;
    block(0, 1) = 1;
    block(1, 0) = 1;
    block(1, 1) = 1;
    block(2, 2) = 2;
    block(2, 3) = 1;
    block(3, 2) = 1;
    block(3, 3) = 1;
    CHECK_FALSE(is_irreducible(block));
}

TEST_CASE("irreducibility dimension guard") {
    IMat big(7);
    for (int i = 0; i < 7; ++i) big(i, i) = 1;
    CHECK_THROWS_AS(is_irreducible(big), DimensionTooLarge);
}

TEST_CASE("char_poly of the cat map is x^2 - 3x + 1") {
    auto cp = char_poly(kCat);
    REQUIRE(cp.size() == 3);
    CHECK(cp[0] == 1);
    CHECK(cp[1] == -3);
    CHECK(cp[2] == 1);
}

TEST_CASE("reduce_mod1 and nearest_lift basics") {
    auto p = reduce_mod1(Vec{1.25, -0.5});
    CHECK(p.coords[0] == Catch::Approx(0.25));
    CHECK(p.coords[1] == Catch::Approx(0.5));

    Vec d = nearest_lift(Vec{0.9, 0.0}, Vec{0.1, 0.0});
    CHECK(d[0] == Catch::Approx(0.2));
    CHECK(d[1] == Catch::Approx(0.0));

    Vec x{0.3, 0.7};
    Vec z = nearest_lift(x, x);
    CHECK(norm(z) == 0.0);
}

TEST_CASE("reduce_mod1 is idempotent and nearest_lift stays in [-0.5, 0.5)") {
    Rng rng(12345);
    for (int rep = 0; rep < 2000; ++rep) {
        Vec v(3);
        for (int i = 0; i < 3; ++i) v[i] = rng.uniform(-25.0, 25.0);
        Vec once = reduce_mod1_vec(v);
        Vec twice = reduce_mod1_vec(once);
        for (int i = 0; i < 3; ++i) {
            CHECK(once[i] == twice[i]);
            CHECK(once[i] >= 0.0);
            CHECK(once[i] < 1.0);
        }
        Vec w(3);
        for (int i = 0; i < 3; ++i) w[i] = rng.uniform(-25.0, 25.0);
        Vec d = nearest_lift(reduce_mod1_vec(v), reduce_mod1_vec(w));
        for (int i = 0; i < 3; ++i) {
            CHECK(d[i] >= -0.5);
            CHECK(d[i] < 0.5);
        }
    }
}

TEST_CASE("matrix parser accepts row-major semicolon syntax") {
    IMat m = parse_matrix("2,1;1,1");
    CHECK(m == kCat);
    CHECK_THROWS(parse_matrix("2,1;1"));
    CHECK_THROWS(parse_matrix("2,x;1,1"));
}

TEST_CASE("unimodular integer inverse is exact") {
    auto t = analyze_matrix(kCompanion);
    IMat prod = imat_mul(kCompanion, t.inverse_matrix);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(prod(i, j) == (i == j ? 1 : 0));
}
