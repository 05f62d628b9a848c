#include "helpers.hpp"

#include "smalltime/bench.hpp"
#include "smalltime/config.hpp"
#include "smalltime/errors.hpp"
#include "smalltime/expansion.hpp"
#include "smalltime/policy.hpp"
#include "smalltime/simulator.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace smalltime;
using testing_support::rel_close;

namespace {

MarketModel single_asset(double lambda, double sigma = 0.2) {
    MarketModel m;
    m.sigma = {ScalarField::constant(sigma)};
    m.lambda = {ScalarField::constant(lambda)};
    m.omega = Eigen::VectorXd::Zero(1);
    m.rho = Eigen::MatrixXd::Identity(1, 1);
    return m;
}

MarketModel with_zero_lambda(MarketModel m) {
    for (auto& l : m.lambda) l = ScalarField::constant(0.0);
    return m;
}

MarketModel permuted(const MarketModel& m, const std::vector<int>& perm) {
    MarketModel p = m;
    const auto n = static_cast<int>(perm.size());
    for (int i = 0; i < n; ++i) {
        const auto src = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
        p.sigma[static_cast<std::size_t>(i)] = m.sigma[src];
        p.lambda[static_cast<std::size_t>(i)] = m.lambda[src];
        p.omega[i] = m.omega[perm[static_cast<std::size_t>(i)]];
        for (int j = 0; j < n; ++j) p.rho(i, j) = m.rho(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return p;
}

}  // namespace

TEST_CASE("u1 reproduces the two-asset coefficient") {
    const MarketModel m = two_asset::model();
    const Utility u = two_asset::utility();
    for (double s : {0.5, 1.0, 1.7}) {
        const double v = u1(m, u, WealthPoint::split_evenly(s, 2), two_asset::factor_level);
        CHECK(v * s * s == doctest::Approx(5.0694e-5).epsilon(1e-4));
    }
    const double uh = u_hat(m, u, 1.5, 2.0, WealthPoint::split_evenly(1.0, 2), two_asset::factor_level);
    CHECK(round_to(uh, 6) == doctest::Approx(-0.499975).epsilon(1e-12));
}

TEST_CASE("u1 vanishes without risk premia") {
    std::mt19937_64 rng(3);
    const MarketModel m = with_zero_lambda(testing_support::random_model(rng, 3));
    const Utility u = Utility::power(1.0, 2.5);
    CHECK(u1(m, u, testing_support::random_wealth(rng, 3), 0.4) == 0.0);
}

TEST_CASE("u1 decouples under identity correlation") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 5;
        MarketModel m = testing_support::random_model(rng, n);
        m.rho = Eigen::MatrixXd::Identity(n, n);
        const Utility u = testing_support::random_utility(rng);
        const WealthPoint x = testing_support::random_wealth(rng, n);
        const double y = 0.3 * trial - 5.0;
        const auto d = u.all_derivs(x.s());
        const double lam2 = m.lambda_at(y).squaredNorm();
        CHECK(rel_close(u1(m, u, x, y), -0.5 * lam2 * d[1] * d[1] / d[2], 1e-12));
    }
}

TEST_CASE("u1 equals the collapsed coefficient times the risk ratio") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 4;
        const MarketModel m = testing_support::random_model(rng, n);
        const Utility u = testing_support::random_utility(rng);
        const WealthPoint x = testing_support::random_wealth(rng, n);
        const double y = 0.2 * trial - 3.0;
        const double lhs = u1(m, u, x, y);
        const double rhs = u1_coefficient(m, y).c * risk_ratio(u, x.s()).q;
        CHECK(rel_close(lhs, rhs, 1e-12, 1e-15));
    }
}

TEST_CASE("u1 partials with constant coefficients have no y dependence") {
    const auto p = u1_partials(two_asset::model(), two_asset::utility(), WealthPoint::split_evenly(1.0, 2), 27.9345);
    CHECK(p.u1_y == 0.0);
    CHECK(p.u1_yy == 0.0);
    CHECK(p.u1_xy.cwiseAbs().maxCoeff() == 0.0);

    const auto z = u1_partials(with_zero_lambda(two_asset::model()), two_asset::utility(),
                               WealthPoint::split_evenly(1.0, 2), 0.0);
    CHECK(z.u1_x.cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.u1_xx.cwiseAbs().maxCoeff() == 0.0);
    CHECK(z.u1_y == 0.0);
    CHECK(z.u1_yy == 0.0);
}

TEST_CASE("u1 partials agree with central differences") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 4;
        const MarketModel m = testing_support::random_model(rng, n);
        const Utility u = testing_support::random_utility(rng);
        const WealthPoint x = testing_support::random_wealth(rng, n);
        const double y = 0.25 * trial - 2.5;
        const U1Partials p = u1_partials(m, u, x, y);

        const double hy = 1e-4 * std::max(1.0, std::abs(y));
        const U1Partials py = u1_partials(m, u, x, y + hy);
        const U1Partials my = u1_partials(m, u, x, y - hy);
        const double fd_y = (u1(m, u, x, y + hy) - u1(m, u, x, y - hy)) / (2.0 * hy);
        CHECK(rel_close(fd_y, p.u1_y, 1e-6, 1e-10));
        CHECK(rel_close((py.u1_y - my.u1_y) / (2.0 * hy), p.u1_yy, 1e-6, 1e-10));

        for (int i = 0; i < n; ++i) {
            const double h = 1e-5 * x.x()[i];
            Eigen::VectorXd up = x.x(), dn = x.x();
            up[i] += h;
            dn[i] -= h;
            const WealthPoint xu(up), xd(dn);
            CHECK(rel_close((u1(m, u, xu, y) - u1(m, u, xd, y)) / (2.0 * h), p.u1_x[i], 1e-6, 1e-10));
            const U1Partials pu = u1_partials(m, u, xu, y);
            const U1Partials pd = u1_partials(m, u, xd, y);
            for (int j = 0; j < n; ++j) {
                CHECK(rel_close((pu.u1_x[j] - pd.u1_x[j]) / (2.0 * h), p.u1_xx(j, i), 1e-6, 1e-10));
            }
            CHECK(rel_close((py.u1_x[i] - my.u1_x[i]) / (2.0 * hy), p.u1_xy[i], 1e-6, 1e-10));
        }
    }
}

TEST_CASE("u2 vanishes without risk premia") {
    std::mt19937_64 rng(4);
    const MarketModel m = with_zero_lambda(testing_support::random_model(rng, 3));
    const ExpansionTerms et = expansion_terms(m, Utility::power(1.0, 2.0), testing_support::random_wealth(rng, 3), 0.7);
    CHECK(et.u2 == 0.0);
    for (double t : et.u2_terms) CHECK(t == 0.0);
}

TEST_CASE("u2 matches the independently collapsed single-asset expression") {
    // n = 1, rho = 1, omega = 0, constant coefficients: with p = U', q = U'', B = U1''/q,
    //   G = -2 lambda p,  H = -2 lambda U1' - 2 lambda p B,
    //   U2 = -U1 B + (lambda / 4q) (H p + G U1') + G H / (8 q).
    const Utility family[] = {Utility::log(), Utility::power(1.0, 3.0), Utility::power(0.6, 0.4),
                              Utility::power(1.0, 2.0, 0.5, 4.0)};
    for (const auto& u : family) {
        for (double lam : {0.1, 0.7}) {
            for (double s : {0.3, 1.0, 4.0}) {
                const MarketModel m = single_asset(lam);
                const auto d = u.all_derivs(s);
                const double p = d[1], q = d[2];
                const double ql = p * p / q;
                const double ql_s = 2.0 * p - p * p * d[3] / (q * q);
                const double ql_ss = 2.0 * q - 2.0 * p * d[3] / q - p * p * d[4] / (q * q) +
                                     2.0 * p * p * d[3] * d[3] / (q * q * q);
                const double c = -0.5 * lam * lam;
                const double U1 = c * ql, U1s = c * ql_s, U1ss = c * ql_ss;
                const double B = U1ss / q;
                const double G = -2.0 * lam * p;
                const double H = -2.0 * lam * U1s - 2.0 * lam * p * B;
                const double expected = -U1 * B + lam / (4.0 * q) * (H * p + G * U1s) + G * H / (8.0 * q);
                const double got = u2(m, u, WealthPoint::split_evenly(s, 1), 0.0);
                CHECK(rel_close(got, expected, 1e-10, 1e-14));
            }
        }
    }
}

TEST_CASE("u2 terms stay of the order of f over a wide wealth range") {
    const MarketModel m = two_asset::model();
    const Utility u = two_asset::utility();
    double lo = 1e300, hi = 0.0;
    for (double s : testing_support::log_space(1e-2, 1e4, 41)) {
        const double r = std::abs(u2(m, u, WealthPoint::split_evenly(s, 2), two_asset::factor_level)) / u.f_order(s);
        CHECK(std::isfinite(r));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(hi / std::max(lo, 1e-300) < 1.0 + 1e-8);
}

TEST_CASE("G is recomputable from its definition") {
    std::mt19937_64 rng(13);
    const MarketModel m = testing_support::random_model(rng, 4);
    const Utility u = Utility::power(0.9, 2.2);
    const WealthPoint x = testing_support::random_wealth(rng, 4);
    const double y = 0.6;
    const ExpansionTerms et = expansion_terms(m, u, x, y);
    const double up = u.all_derivs(x.s())[1];
    const Eigen::VectorXd lam = m.lambda_at(y);
    for (int i = 0; i < 4; ++i) {
        const double expected = -3.0 * lam[i] * up + (m.rho.row(i) * lam)(0, 0) * up;
        CHECK(rel_close(et.G[i], expected, 1e-14, 1e-16));
    }
    CHECK(rel_close(g_vector(m, u, x, y)[2], et.G[2], 1e-15));
}

TEST_CASE("u_hat examples") {
    const MarketModel m = two_asset::model();
    const Utility u = two_asset::utility();
    const double y = two_asset::factor_level;
    const WealthPoint one = WealthPoint::split_evenly(1.0, 2);
    CHECK(u_hat(m, u, 2.0, 2.0, one, y) == u.value(1.0));
    CHECK(round_to(u_hat(m, u, 1.9, 2.0, one, y), 6) == doctest::Approx(-0.499995).epsilon(1e-12));
    CHECK(round_to(u_hat(m, u, 1.5, 2.0, WealthPoint::split_evenly(0.5, 2), y), 6) ==
          doctest::Approx(-1.999899).epsilon(1e-12));
    CHECK_THROWS_AS(u_hat(m, u, 2.1, 2.0, one, y), DomainError);
}

TEST_CASE("single-asset approximation equals the reduced formula") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double lam = -1.0 + 2.0 * u01(rng);
        const Utility u = testing_support::random_utility(rng);
        const double s = 0.05 + 5.0 * u01(rng);
        const double T = 0.5 + 2.0 * u01(rng);
        const double t = T * u01(rng);
        const double a = u_hat(single_asset(lam, 0.1 + u01(rng)), u, t, T, WealthPoint::split_evenly(s, 1), 0.3);
        const double b = single_asset_reduction(lam, u, t, T, s);
        CHECK(rel_close(a, b, 1e-12));
    }
    CHECK(single_asset_reduction(0.0, Utility::power(1.0, 3.0), 0.0, 1.0, 2.0) == Utility::power(1.0, 3.0).value(2.0));
    CHECK(single_asset_reduction(0.1, Utility::log(), 0.0, 1.0, 1.0) == doctest::Approx(0.005).epsilon(1e-14));
}

TEST_CASE("super and sub solutions bracket the approximation") {
    const MarketModel m = two_asset::model();
    const Utility u = two_asset::utility();
    const WealthPoint x = WealthPoint::split_evenly(0.8, 2);
    const double y = two_asset::factor_level;
    const Envelope at_T = super_sub(m, u, 2.0, 2.0, x, y, 3.0);
    CHECK(at_T.upper == u.value(0.8));
    CHECK(at_T.lower == u.value(0.8));

    const Envelope e = super_sub(m, u, 1.5, 2.0, x, y, 3.0);
    const double mid = u_hat(m, u, 1.5, 2.0, x, y);
    CHECK(e.upper >= mid);
    CHECK(mid >= e.lower);
    CHECK(e.upper - e.lower == doctest::Approx(2.0 * 0.25 * 3.0 * u.f_order(0.8)).epsilon(1e-13));
    CHECK_THROWS_AS(super_sub(m, u, 1.5, 2.0, x, y, 0.0), DomainError);
}

TEST_CASE("u2_bound_scan") {
    const Utility u = two_asset::utility();
    CHECK(u2_bound_scan(with_zero_lambda(two_asset::model()), u, default_u2_scan_wealth(), {0.0, 1.0}) == 1.0);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const MarketModel m = testing_support::random_model(rng, 2);
        CHECK(u2_bound_scan(m, testing_support::random_utility(rng), default_u2_scan_wealth(), {-1.0, 0.0, 1.0}) >= 1.0);
    }

    const double cap =
        u2_bound_scan(two_asset::model(), u, testing_support::log_space(0.1, 10.0, 41), {two_asset::factor_level});
    CHECK(std::isfinite(cap));
    CHECK(cap > 1.0);
    // Regression value: 1 + 6 * max|term| / f for the two-asset example.
    CHECK(cap == doctest::Approx(1.0000001233146).epsilon(1e-12));

    CHECK(default_u2_scan_wealth().size() == 41);
    CHECK(default_u2_scan_wealth().front() == doctest::Approx(1e-2));
    CHECK(default_u2_scan_wealth().back() == doctest::Approx(1e4));
    CHECK_THROWS_AS(u2_bound_scan(two_asset::model(), u, {}, {0.0}), DomainError);
}

TEST_CASE("expansion is invariant under relabeling assets") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 3;
        const MarketModel m = testing_support::random_model(rng, n);
        const Utility u = testing_support::random_utility(rng);
        const double s = 0.3 + trial * 0.2;
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const MarketModel p = permuted(m, perm);
        const WealthPoint x = WealthPoint::split_evenly(s, static_cast<std::size_t>(n));
        const double y = 0.4;
        CHECK(rel_close(u1(m, u, x, y), u1(p, u, x, y), 1e-14, 1e-300));
        CHECK(rel_close(u2(m, u, x, y), u2(p, u, x, y), 1e-11, 1e-300));
        CHECK(rel_close(u_hat(m, u, 0.7, 1.0, x, y), u_hat(p, u, 0.7, 1.0, x, y), 1e-14, 1e-300));
    }
}

TEST_CASE("the approximation stays concave in wealth near the horizon") {
    const MarketModel m = two_asset::model();
    const Utility u = two_asset::utility();
    for (double delta : {0.05, 0.1, 0.25, 0.5}) {
        for (double s : testing_support::log_space(0.1, 10.0, 25)) {
            const PartialBundle b =
                u_hat_bundle(m, u, 2.0 - delta, 2.0, WealthPoint::split_evenly(s, 2), two_asset::factor_level);
            CHECK(b.d_xx(0, 0) < 0.0);
        }
    }
}

TEST_CASE("bundles of wealth-total functions are radial") {
    std::mt19937_64 rng(2);
    const MarketModel m = testing_support::random_model(rng, 3);
    const Utility u = Utility::power(1.0, 1.8);
    const WealthPoint x = testing_support::random_wealth(rng, 3);
    CHECK(terminal_bundle(u, x).is_radial());
    CHECK(u_hat_bundle(m, u, 0.5, 1.0, x, 0.2).is_radial());
    PartialBundle b = terminal_bundle(u, x);
    b.d_x[1] *= 1.01;
    CHECK_FALSE(b.is_radial());

    const PartialBundle r = PartialBundle::radial(3, {1.0, 2.0, -3.0, 0.5, 0.25, 0.125});
    CHECK(r.d_x.size() == 3);
    CHECK(r.d_xx(0, 2) == -3.0);
    CHECK(r.d_xy[1] == 0.125);
    CHECK((r.d_xx - r.d_xx.transpose()).norm() == 0.0);
}

TEST_CASE("first-order approximation leaves an order-one residual") {
    const MarketModel m = two_asset::model();
    const Utility u = two_asset::utility();
    const WealthPoint x = WealthPoint::split_evenly(1.0, 2);
    std::vector<double> deltas{0.4, 0.2, 0.1, 0.05}, res;
    for (double d : deltas) res.push_back(hjb_residual(m, u, 2.0 - d, 2.0, x, two_asset::factor_level, false));
    CHECK(loglog_slope(deltas, res) >= 0.9);
}
