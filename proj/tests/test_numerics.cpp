#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "gscl/numerics.hpp"

using namespace gscl;

TEST_CASE("rng matches splitmix64 reference stream") {
    // Published reference outputs for seed 0.
    Rng r(0);
    CHECK(r.next_u64() == 0xE220A8397B1DCDAFULL);
    CHECK(r.next_u64() == 0x6E789E6AA1B965F4ULL);
    CHECK(r.next_u64() == 0x06C45D188009454FULL);
}

TEST_CASE("rng determinism and stream independence") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(42);
    Rng s0 = c.substream(0);
    Rng s1 = c.substream(1);
    CHECK(s0.next_u64() != s1.next_u64());
    // substream derivation does not consume parent state
    Rng d(42);
    CHECK(c.next_u64() == d.next_u64());
}

TEST_CASE("rng uniforms land in range") {
    Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        double u = r.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        auto k = r.uniform_int(-3, 5);
        CHECK(k >= -3);
        CHECK(k <= 5);
    }
}

TEST_CASE("rng normal moments") {
    Rng r(123);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        double x = r.normal();
        s += x;
        s2 += x * x;
    }
    double mean = s / n;
    double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("cosine_sim reference values") {
    CHECK(cosine_sim({1, 0}, {1, 0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine_sim({1, 0}, {0, 1}) == doctest::Approx(0.0).epsilon(1e-12));
    // hand evaluation: 0.25 / (sqrt(0.5) * sqrt(0.5))
    CHECK(cosine_sim({0.5, 0.5, 0}, {0.5, 0, 0.5}) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cosine_sim symmetry, scale invariance, clamping, errors") {
    Rng r(5);
    for (int t = 0; t < 50; ++t) {
        Vec u(4), v(4);
        for (int i = 0; i < 4; ++i) {
            u[i] = r.normal();
            v[i] = r.normal();
        }
        double s1 = cosine_sim(u, v);
        double s2 = cosine_sim(v, u);
        CHECK(s1 == doctest::Approx(s2).epsilon(1e-15));
        Vec u3 = u, v7 = v;
        for (auto& x : u3) x *= 3.0;
        for (auto& x : v7) x *= 7.0;
        CHECK(cosine_sim(u3, v7) == doctest::Approx(s1).epsilon(1e-12));
        CHECK(s1 <= 1.0);
        CHECK(s1 >= -1.0);
    }
    CHECK(cosine_sim({1e-200, 0}, {2e-200, 0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(cosine_sim({0, 0}, {1, 0}), NumericError);
    CHECK_THROWS_AS(cosine_sim({1, 0}, {1, 0, 0}), InvalidArgument);
}

TEST_CASE("softmax_with_temperature reference values") {
    Vec u = softmax_with_temperature({0, 0, 0}, 1.0);
    for (double x : u) CHECK(x == doctest::Approx(1.0 / 3).epsilon(1e-12));
    Vec single = softmax_with_temperature({3.7}, 0.1);
    CHECK(single.size() == 1);
    CHECK(single[0] == doctest::Approx(1.0).epsilon(1e-12));
    Vec two = softmax_with_temperature({1, 2}, 1.0);
    CHECK(two[0] == doctest::Approx(0.2689414213699951).epsilon(1e-12));
    CHECK(two[1] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
}

TEST_CASE("softmax properties: simplex, shift invariance, stability") {
    Rng r(9);
    for (double tau : {0.07, 0.5, 1.0, 10.0}) {
        Vec l(5);
        for (auto& x : l) x = r.uniform(-3, 3);
        Vec p = softmax_with_temperature(l, tau);
        double s = 0;
        for (double x : p) {
            CHECK(x > 0.0);
            s += x;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        Vec shifted = l;
        for (auto& x : shifted) x += 17.25;
        Vec q = softmax_with_temperature(shifted, tau);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-12));
    }
    // would overflow without max subtraction
    Vec big = softmax_with_temperature({1000, 1001}, 0.07);
    CHECK(std::isfinite(big[0]));
    CHECK(big[0] + big[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(softmax_with_temperature({1, 2}, 0.0), InvalidArgument);
    CHECK_THROWS_AS(softmax_with_temperature({1, 2}, -1.0), InvalidArgument);
}

TEST_CASE("log_softmax agrees with log of softmax") {
    Rng r(11);
    for (double tau : {0.07, 0.5, 1.0}) {
        Vec l(7);
        for (auto& x : l) x = r.uniform(-2, 2);
        Vec p = softmax_with_temperature(l, tau);
        Vec lp = log_softmax_with_temperature(l, tau);
        for (std::size_t i = 0; i < l.size(); ++i)
            CHECK(lp[i] == doctest::Approx(std::log(p[i])).epsilon(1e-10));
    }
}

TEST_CASE("l2_normalize reference values and contract") {
    Vec z = l2_normalize({3, 4});
    CHECK(z[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(z[1] == doctest::Approx(0.8).epsilon(1e-12));
    Vec unit = l2_normalize({2, 0, 0});
    CHECK(unit[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(unit[1] == 0.0);
    Vec again = l2_normalize(unit);
    CHECK(again[0] == doctest::Approx(unit[0]).epsilon(1e-12));
    Rng r(13);
    for (int t = 0; t < 50; ++t) {
        Vec v(6);
        for (auto& x : v) x = r.normal();
        CHECK(norm(l2_normalize(v)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(l2_normalize({0, 0, 0}), NumericError);
}

TEST_CASE("purity: identical inputs give bit-identical outputs") {
    Vec l = {0.3, -1.2, 2.7, 0.01};
    Vec a = softmax_with_temperature(l, 0.07);
    Vec b = softmax_with_temperature(l, 0.07);
    CHECK(a == b);
    CHECK(cosine_sim(l, l) == cosine_sim(l, l));
}
