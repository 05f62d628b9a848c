#include "helpers.hpp"

#include "smalltime/errors.hpp"
#include "smalltime/utility.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace smalltime;
using testing_support::rel_close;

TEST_CASE("u_derivs examples") {
    const auto lg = u_derivs(Utility::log(), 1.0, 4);
    REQUIRE(lg.size() == 5);
    CHECK(lg[0] == 0.0);
    CHECK(lg[1] == 1.0);
    CHECK(lg[2] == -1.0);
    CHECK(lg[3] == 2.0);
    CHECK(lg[4] == -6.0);

    const auto p = u_derivs(Utility::power(1.0, 3.0), 1.0, 2);
    REQUIRE(p.size() == 3);
    CHECK(p[0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p[2] == doctest::Approx(-3.0).epsilon(1e-15));

    const auto p2 = u_derivs(Utility::power(1.0, 3.0), 2.0, 0);
    REQUIRE(p2.size() == 1);
    CHECK(p2[0] == doctest::Approx(-0.125).epsilon(1e-15));
}

TEST_CASE("u_derivs rejects non-positive wealth and bad orders") {
    CHECK_THROWS_AS(u_derivs(Utility::log(), 0.0, 1), DomainError);
    CHECK_THROWS_AS(u_derivs(Utility::power(1.0, 2.0), -1.0, 1), DomainError);
    CHECK_THROWS(u_derivs(Utility::log(), 1.0, 6));
}

TEST_CASE("power family parameter checks") {
    CHECK_THROWS_AS(Utility::power(1.0, 1.0), ModelError);
    CHECK_THROWS_AS(Utility::power(1.0, 2.0, 1.0, 1.0), ModelError);
    CHECK_THROWS_AS(Utility::power(0.0, 2.0), ModelError);
    CHECK_THROWS_AS(Utility::power(1.0, -2.0), ModelError);
    CHECK_THROWS_AS(Utility::power(-1.0, 2.0, 1.0, 3.0), ModelError);
    CHECK_NOTHROW(Utility::power(0.0, 2.0, 1.0, 3.0));
}

TEST_CASE("f_order and g_bound examples") {
    CHECK(Utility::log().f_order(7.0) == 1.0);
    CHECK(Utility::power(1.0, 3.0, 1.0, 3.0).f_order(2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(Utility::power(1.0, 3.0).f_order(2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(Utility::power(1.0, 2.0, 1.0, 4.0).f_order(1.0) == doctest::Approx(2.0).epsilon(1e-15));

    CHECK(Utility::log().g_bound(std::exp(1.0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(Utility::power(1.0, 3.0, 1.0, 3.0).g_bound(1.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(Utility::log().g_bound(1.0) == 1.0);
}

TEST_CASE("analytic derivatives match central differences of the next lower order") {
    const Utility family[] = {
        Utility::log(),
        Utility::power(1.0, 3.0),
        Utility::power(0.7, 0.5),
        Utility::power(1.0, 2.0, 0.5, 4.0),
        Utility::power(0.3, 5.0, 2.0, 1.5),
    };
    for (const auto& u : family) {
        for (double s : testing_support::log_space(1e-3, 1e3, 30)) {
            const double h = 1e-5 * s;
            const auto up = u.all_derivs(s + h);
            const auto dn = u.all_derivs(s - h);
            const auto at = u.all_derivs(s);
            for (int k = 1; k <= 4; ++k) {
                const double fd = (up[static_cast<std::size_t>(k - 1)] - dn[static_cast<std::size_t>(k - 1)]) / (2.0 * h);
                CHECK(rel_close(fd, at[static_cast<std::size_t>(k)], 1e-6));
            }
        }
    }
}

TEST_CASE("utilities are increasing and concave") {
    const Utility family[] = {Utility::log(), Utility::power(1.0, 3.0), Utility::power(0.7, 0.5),
                              Utility::power(1.0, 2.0, 0.5, 4.0)};
    for (const auto& u : family) {
        for (double s : testing_support::log_space(1e-3, 1e3, 50)) {
            const auto d = u.all_derivs(s);
            CHECK(d[1] > 0.0);
            CHECK(d[2] < 0.0);
        }
    }
}

TEST_CASE("value matches derivs at order zero") {
    const Utility u = Utility::power(1.0, 2.0, 0.5, 4.0);
    CHECK(u.value(1.7) == u.derivs(1.7, 0)[0]);
    CHECK(u.value(1.0) == doctest::Approx(-1.0 - 0.5 / 3.0).epsilon(1e-15));
}

TEST_CASE("WealthPoint invariants") {
    const WealthPoint w(Eigen::Vector3d(0.5, 1.0, 2.5));
    CHECK(w.s() == 4.0);
    CHECK(w.n() == 3);
    CHECK_THROWS_AS(WealthPoint(Eigen::Vector2d(1.0, 0.0)), DomainError);
    CHECK_THROWS_AS(WealthPoint(Eigen::Vector2d(1.0, -0.5)), DomainError);
    const WealthPoint e = WealthPoint::split_evenly(3.0, 4);
    CHECK(e.s() == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(e.x()[2] == 0.75);
}

namespace {

// Closed-form limits of the four derivative ratios divided by f as s -> infinity.
std::array<double, 4> ratio_limits(const Utility& u) {
    if (u.kind() == Utility::Kind::Log) return {-1.0, -2.0, -6.0, -4.0};
    double c, p;
    if (u.c2() == 0.0 || u.alpha() == u.beta()) {
        c = (u.c1() + u.c2()) / 2.0;
        p = u.alpha();
    } else if (u.alpha() < u.beta()) {
        c = u.c1();
        p = u.alpha();
    } else {
        c = u.c2();
        p = u.beta();
    }
    return {-c / p, -c * (p + 1) / (p * p), -c * (p + 1) * (p + 2) / (p * p * p), -c * (p + 1) * (p + 1) / (p * p * p)};
}

std::array<double, 4> ratios(const Utility& u, double s) {
    const auto d = u.all_derivs(s);
    const double f = u.f_order(s);
    return {d[1] * d[1] / d[2] / f, std::pow(d[1], 3) * d[3] / std::pow(d[2], 3) / f,
            std::pow(d[1], 4) * d[4] / std::pow(d[2], 4) / f, std::pow(d[1], 4) * d[3] * d[3] / std::pow(d[2], 5) / f};
}

}  // namespace

TEST_CASE("derivative ratios approach their large-wealth limits") {
    const Utility family[] = {Utility::log(),
                              Utility::power(1.0, 3.0),
                              Utility::power(0.7, 3.0, 0.4, 3.0),
                              Utility::power(1.0, 2.0, 0.5, 4.0),
                              Utility::power(0.8, 4.0, 1.5, 2.5),
                              Utility::power(1.2, 0.5)};
    for (const auto& u : family) {
        const auto got = ratios(u, 1e6);
        const auto want = ratio_limits(u);
        for (std::size_t k = 0; k < 4; ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-3));
    }
}
