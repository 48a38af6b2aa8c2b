#include <doctest.h>

#include <cmath>
#include <random>

#include "nsft/bounds.hpp"
#include "nsft/robinson.hpp"

using namespace nsft;

TEST_CASE("polynomial_rate") {
    auto r = polynomial_rate(4, Q(1, 2));
    CHECK(r.exponent.contains(Q(1, 3)));
    CHECK(r.exponent.width() < 1e-12);
    CHECK(r.theta.contains(Q(1, 2)));

    auto s = polynomial_rate(16, Q(3, 4));
    double l3 = std::log2(3.0);
    CHECK(std::abs(s.exponent.mid() - (2 - l3) / (6 - l3)) < 1e-12);

    // alpha beta = 1: theta = 1, constant = 2 sqrt(alpha)
    auto t = polynomial_rate(2, Q(1, 2));
    CHECK(t.theta.contains(Q(1)));
    CHECK(t.exponent.contains(Q(1, 2)));
    CHECK(std::abs(t.constant.mid() - 2 * std::sqrt(2.0)) < 1e-12);

    CHECK_THROWS_AS(polynomial_rate(1, Q(1, 2)), input_error);
    CHECK_THROWS_AS(polynomial_rate(2, Q(1)), input_error);
}

TEST_CASE("min_Dk_bruteforce") {
    auto m = min_Dk_bruteforce(2, Q(1, 2), Q(1, 100), 0, 20);
    CHECK(m.argmin == 3);
    CHECK(m.value == Q(41, 200));
    auto r = polynomial_rate(2, Q(1, 2));
    CHECK(std::abs(r.bound(Q(1, 100)).mid() - 0.2828427124746) < 1e-12);
    CHECK(certainly_le(Interval::of(m.value), r.bound(Q(1, 100))));

    auto z = min_Dk_bruteforce(3, Q(1, 3), 0, 2, 9);
    CHECK(z.argmin == 9);
    CHECK(z.value == qpow(Q(1, 3), 9));

    std::mt19937_64 g(3);
    for (int t = 0; t < 50; ++t) {
        Q alpha(long(2 + g() % 30), 2), beta(long(1 + g() % 19), 20);
        if (alpha <= 1) continue;
        auto rr = polynomial_rate(alpha, beta);
        long K = long(g() % 3);
        Q eps(1, long(1 + g() % 1000000));
        if (!rr.valid_at(eps, K)) continue;
        auto mm = min_Dk_bruteforce(alpha, beta, eps, K, K + 64);
        CHECK(certainly_le(Interval::of(mm.value), rr.bound(eps)));
    }
}

TEST_CASE("besicovitch_bound") {
    ConstructionProfile pr;
    pr.rho = Q(1, 7);
    CHECK(besicovitch_bound(pr, 0) == Q(1, 7));
    pr.rho = 0;
    CHECK(besicovitch_bound(pr, Q(1, 1000)) == make_q(432, 1000));
    pr.C = -1;
    CHECK_THROWS_AS(besicovitch_bound(pr, 0), input_error);

    auto e = construction_constants(Construction::enhanced, 3);
    CHECK(e.p == 16);
    CHECK(e.C == 7);
    CHECK(e.rho == Q(15, 64));
    auto p = construction_constants(Construction::p1, 1);
    CHECK(p.p == 16);
    CHECK(p.rho == Q(24, 49));
}

TEST_CASE("red_area recurrence") {
    CHECK(red_area(1) == 25);
    CHECK(red_area(2) == 589);
    // closed form of the recurrence
    for (int n = 1; n <= 12; ++n) {
        Z closed = 4 * zpow(16, n) - zpow(4, n);
        Z tail = 1 + 32 * zpow(12, n);
        CHECK(tail % 11 == 0);
        CHECK(red_area(n) == closed - tail / 11);
    }
    // union of Red squares on the (2n+1)-macro-tile
    using namespace robinson;
    const auto& ts = build_tileset(Variant::red_black);
    for (int n = 1; n <= 3; ++n) {
        auto c = build_macro_tile({Variant::red_black, 2 * n + 1, Orientation::NE, {}});
        long side = c.width;
        CHECK(Z(side * side - census(c, ts).outside_red_count) == red_area(n));
    }
}
