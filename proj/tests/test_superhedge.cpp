#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace frictionlab;
using fltest::chain_tree;
using fltest::move_then_liquidate_tree;
using fltest::one_step_tree;
using fltest::random_claim;
using fltest::random_plan;
using fltest::martingale_binomial;
using fltest::random_tree;

namespace {

Eigen::VectorXd zvec(double cash, int d) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(d + 1);
    z[0] = cash;
    return z;
}


}  // namespace

TEST_CASE("dual value of the frictionless-consistent certificate") {
    std::mt19937_64 rng(5);
    const auto tree = martingale_binomial(rng, 2);
    const auto friction = FrictionSpec::power_scalar(1.0, 2.0);
    const auto cert = MartingaleCertificate::frictionless_consistent(tree);
    cert.validate(tree);

    // the penalty vanishes: Zbar = S and S is a martingale
    CHECK(certificate_penalty(tree, cert, friction) == doctest::Approx(0.0).epsilon(1e-12));

    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Claim claim = Claim::zero(tree);
    double expected = 0.0;
    for (int leaf : tree.leaves()) {
        claim.at(leaf)[0] = u01(rng);
        claim.at(leaf)[1] = -0.2 + u01(rng);
        expected += tree.prob(leaf) *
                    (claim.at(leaf)[0] + tree.node(leaf).price[0] * claim.at(leaf)[1]);
    }
    CHECK(dual_value(tree, cert, claim, friction) == doctest::Approx(expected));
    CHECK(dual_value(tree, cert, Claim::zero(tree), friction) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("dual value agrees with a hand evaluation on a one-step tree") {
    const auto tree = one_step_tree(1.0, 2.0, 0.5, 0.5);
    const auto friction = FrictionSpec::power_scalar(1.0, 2.0);
    // constant certificate: Z0 = 1, Z1 = 1.25 at the root and both leaves
    std::vector<Eigen::VectorXd> leaf_z(2);
    leaf_z[0] = Eigen::VectorXd(2);
    leaf_z[0] << 1.0, 1.25;
    leaf_z[1] = leaf_z[0];
    const auto cert = MartingaleCertificate::from_leaf_values(tree, leaf_z);
    cert.validate(tree);

    Claim claim = Claim::zero(tree);
    claim.at(tree.leaves()[0])[0] = 1.0;  // cash paid in the up state

    // E[Z_T W] = 0.5 * 1; penalty = G*(1.25 - 1) * dt = 0.25^2 / 4 = 0.015625
    CHECK(dual_value(tree, cert, claim, friction) == doctest::Approx(0.5 - 0.015625));
}

TEST_CASE("certificate validation enforces the class constraints") {
    const auto tree = one_step_tree(1.0, 2.0, 0.5, 0.5);

    std::vector<Eigen::VectorXd> leaf_z(2);
    leaf_z[0] = Eigen::VectorXd(2);
    leaf_z[0] << 2.0, 1.0;
    leaf_z[1] = Eigen::VectorXd(2);
    leaf_z[1] << 0.0, 0.5;  // zero cash with live assets is fine at a leaf
    const auto cert = MartingaleCertificate::from_leaf_values(tree, leaf_z);
    CHECK_NOTHROW(cert.validate(tree));

    // but not at a trading date: kill all leaf cash below one branch
    auto bad = cert;
    bad.z[0][0] = 0.0;
    CHECK_THROWS_AS(bad.validate(tree), Error);

    auto negative = cert;
    negative.z[1][1] = -0.3;
    CHECK_THROWS_AS(negative.validate(tree), Error);

    auto broken = cert;
    broken.z[2][0] = 0.9;  // breaks the martingale identity
    CHECK_THROWS_AS(broken.validate(tree), Error);

    auto unnormalized = cert;
    for (auto& v : unnormalized.z) v *= 2.0;
    CHECK_THROWS_AS(unnormalized.validate(tree), Error);
}

TEST_CASE("zero claim prices to zero exactly when prices are martingales") {
    std::mt19937_64 rng(9);
    const auto tree = martingale_binomial(rng, 2);
    const auto friction = FrictionSpec::power_scalar(1.0, 2.0);
    const auto report = superhedge_price(tree, Claim::zero(tree), friction);
    CHECK(report.status == SolveStatus::Success);
    CHECK(report.primal_value == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(std::abs(report.primal_value) < 1e-7);

    // and never above zero in general: the zero plan is feasible
    const auto drift_tree = one_step_tree(1.0, 1.4, 1.1, 0.5);
    const auto drift_report = superhedge_price(drift_tree, Claim::zero(drift_tree), friction);
    CHECK(drift_report.primal_value <= 1e-9);
}

TEST_CASE("cash call approaches the frictionless hedge value as the friction vanishes") {
    const auto tree = move_then_liquidate_tree(1.0, 2.0, 0.5, 0.5);
    Claim claim = Claim::zero(tree);
    for (int leaf : tree.leaves())
        claim.at(leaf)[0] = std::max(tree.node(leaf).price[0] - 1.0, 0.0);

    // one-period frictionless replication oracle
    const double up = 2.0, down = 0.5;
    const double q = (1.0 - down) / (up - down);
    const double lp_value = q * std::max(up - 1.0, 0.0) + (1 - q) * std::max(down - 1.0, 0.0);
    CHECK(lp_value == doctest::Approx(1.0 / 3.0));

    const auto tiny = superhedge_price(tree, claim, FrictionSpec::power_scalar(1e-6, 2.0));
    CHECK(tiny.status == SolveStatus::Success);
    CHECK(std::abs(tiny.primal_value - lp_value) < 2e-3);
    CHECK(std::abs(tiny.duality_gap) < 1e-6);

    const auto unit = superhedge_price(tree, claim, FrictionSpec::power_scalar(1.0, 2.0));
    CHECK(unit.primal_value > lp_value + 1e-3);
}

TEST_CASE("superhedging price is monotone in the claim and the friction scale") {
    std::mt19937_64 rng(13);
    const auto tree = random_tree(rng, {2, 1, 4, false});
    const auto claim = random_claim(rng, tree);
    const auto base = superhedge_price(tree, claim, FrictionSpec::power_scalar(0.5, 2.0));

    Claim bigger = claim;
    for (int leaf : tree.leaves()) bigger.at(leaf)[0] += 0.25;
    const auto priced_up = superhedge_price(tree, bigger, FrictionSpec::power_scalar(0.5, 2.0));
    CHECK(priced_up.primal_value >= base.primal_value + 0.25 - 1e-6);

    const auto stiffer = superhedge_price(tree, claim, FrictionSpec::power_scalar(1.5, 2.0));
    CHECK(stiffer.primal_value >= base.primal_value - 1e-8);
}

TEST_CASE("strong duality on random desk-scale trees") {
    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 10; ++trial) {
        const auto tree = random_tree(rng, {4, 1 + trial % 2, 16, false});
        const auto claim = random_claim(rng, tree);
        const auto friction = trial % 2 == 0
                                  ? FrictionSpec::power_scalar(0.4 + 0.2 * trial, 2.0)
                                  : FrictionSpec::quadratic_impact(0.8, 0.02);
        const auto report = superhedge_price(tree, claim, friction);
        CHECK(report.status == SolveStatus::Success);
        CHECK(std::abs(report.duality_gap) <= 1e-4 * (1.0 + std::abs(report.primal_value)));
        CHECK(report.kkt.feasibility <= 1e-7);
        report.certificate.validate(tree, 1e-6);
        // weak duality is part of the report contract
        CHECK(report.dual_value <= report.primal_value + 1e-8);
    }
}

TEST_CASE("maximize_dual clears the frictionless benchmark and closes the gap") {
    std::mt19937_64 rng(77);
    const auto tree = martingale_binomial(rng, 2);
    const auto friction = FrictionSpec::power_scalar(1.0, 2.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Claim claim = Claim::zero(tree);
    for (int leaf : tree.leaves()) claim.at(leaf)[0] = u01(rng);

    const auto bench = MartingaleCertificate::frictionless_consistent(tree);
    const double floor = dual_value(tree, bench, claim, friction);
    const auto [cert, value] = maximize_dual(tree, claim, friction);
    CHECK(value >= floor - 1e-10);
    cert.validate(tree, 1e-8);

    // with a zero claim the optimum is exactly zero
    const auto [cert0, value0] = maximize_dual(tree, Claim::zero(tree), friction);
    CHECK(value0 == doctest::Approx(0.0).epsilon(1e-10));

    const auto primal = superhedge_price(tree, claim, friction);
    CHECK(std::abs(primal.primal_value - primal.dual_value) <= 1e-4);
}

TEST_CASE("weak duality: substitution and fuzz") {
    std::mt19937_64 rng(123);
    const auto friction = FrictionSpec::power_scalar(1.0, 2.0);

    // zero claim, zero plan, frictionless certificate
    const auto tree0 = one_step_tree(1.0, 2.0, 0.5, 0.5);
    const auto rep0 = verify_weak_duality(
        tree0, zvec(0.5, 1), TradingRatePlan::zero_for_tree(tree0), Claim::zero(tree0),
        MartingaleCertificate::frictionless_consistent(tree0), friction);
    CHECK(rep0.ok);

    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto tree = random_tree(rng, {3, 1, 8, false});
        const auto plan = random_plan(rng, tree, 1.0);
        Eigen::VectorXd z = zvec(0.3, 1);

        // the claim is exactly what the plan delivers, so the plan is feasible
        const auto wealth = roll_forward(tree, z, plan, friction);
        Claim claim = Claim::zero(tree);
        for (int leaf : tree.leaves()) {
            claim.at(leaf)[0] = wealth.cash[static_cast<std::size_t>(leaf)];
            claim.at(leaf)[1] = wealth.assets[static_cast<std::size_t>(leaf)][0];
        }

        // random valid certificate from positive leaf values
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::vector<Eigen::VectorXd> leaf_z;
        for (std::size_t i = 0; i < tree.leaves().size(); ++i) {
            Eigen::VectorXd v(2);
            v << 0.05 + u01(rng), 2.0 * u01(rng);
            leaf_z.push_back(v);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < leaf_z.size(); ++i)
            norm += tree.prob(tree.leaves()[i]) * leaf_z[i][0];
        for (auto& v : leaf_z) v /= norm;
        const auto cert = MartingaleCertificate::from_leaf_values(tree, leaf_z);

        const auto rep = verify_weak_duality(tree, z, plan, claim, cert, friction);
        CHECK(rep.ok);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("weak duality composes with the square-root strategy") {
    const auto grid = TimeGrid::uniform(1.0, 16);
    std::vector<double> prices(grid.times.size(), 1.0);
    const auto tree = chain_tree(prices, grid.times);
    const auto friction = FrictionSpec::quadratic_impact(1.0, 0.25);

    const auto plan = constant_cashflow_plan(tree, friction, 1.0);
    const auto wealth = roll_forward(tree, zvec(1.0, 1), plan, friction);
    const int leaf = tree.leaves()[0];
    Claim claim = Claim::zero(tree);
    claim.at(leaf)[1] = wealth.assets[static_cast<std::size_t>(leaf)][0];  // delivered shares

    const auto [cert, value] = maximize_dual(tree, claim, friction);
    const auto rep = verify_weak_duality(tree, zvec(1.0, 1), plan, claim, cert, friction);
    CHECK(rep.ok);

    auto infeasible = claim;
    infeasible.at(leaf)[0] = 0.5;  // the plan spent its cash; it cannot deliver extra
    CHECK_THROWS_AS(verify_weak_duality(tree, zvec(1.0, 1), plan, infeasible, cert, friction),
                    Error);
}

// --------------------------------------------------------------------------
// Example 1: the divergent dual family.

TEST_CASE("example 1 closed forms diverge along x(n) = n log n / sigma") {
    const GBMParams params{1.0, 0.0, 0.2};
    auto x_of = [&](double n) { return n * std::log(n) / params.sigma; };

    // at lambda = 1 the family is strictly increasing from n = 2 on
    double prev = -1e300;
    for (double n : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
        const double v = example1_dual_family(params, 1.0, 1.0, n, x_of(n)).value;
        CHECK(v > prev);
        prev = v;
    }

    // the family eventually exceeds any fixed threshold (here: 100 within n <= 1024)
    CHECK(example1_dual_family(params, 0.01, 1.0, 1024.0, x_of(1024.0)).value > 100.0);
    // ... and is eventually increasing even at lambda = 0.01, where the
    // penalty makes the first few terms non-monotone
    prev = -1e300;
    for (double n : {8.0, 16.0, 32.0, 64.0}) {
        const double v = example1_dual_family(params, 0.01, 1.0, n, x_of(n)).value;
        CHECK(v > prev);
        prev = v;
    }
    const double v8 = example1_dual_family(params, 0.01, 1.0, 8.0, x_of(8.0)).value;
    const double v64 = example1_dual_family(params, 0.01, 1.0, 64.0, x_of(64.0)).value;
    CHECK(v64 > v8);
}

TEST_CASE("example 1 penalty vanishes as lambda grows") {
    const GBMParams params{1.0, 0.0, 0.2};
    const double n = 8.0, x = 2.0;
    const auto big = example1_dual_family(params, 1e9, 1.0, n, x);
    CHECK(big.value == doctest::Approx(big.terminal_moment).epsilon(1e-8));
    CHECK(big.terminal_moment > 0.0);
}

namespace {

struct McMoments {
    double mean = 0.0;
    double se = 0.0;
};

// Monte Carlo of E[f(W_tau, W_t - W_tau)] for the exponential family.
template <typename F>
McMoments mc_expectation(std::mt19937_64& rng, std::size_t n_paths, double tau, double dt2,
                         F&& f) {
    std::normal_distribution<double> normal(0.0, 1.0);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        const double w_tau = std::sqrt(tau) * normal(rng);
        const double dw = std::sqrt(dt2) * normal(rng);
        const double v = f(w_tau, dw);
        sum += v;
        sumsq += v * v;
    }
    McMoments m;
    m.mean = sum / static_cast<double>(n_paths);
    const double var =
        (sumsq / static_cast<double>(n_paths) - m.mean * m.mean) / static_cast<double>(n_paths);
    m.se = std::sqrt(std::max(var, 0.0));
    return m;
}

}  // namespace

TEST_CASE("example 1 moments match Monte Carlo at x = sigma") {
    const GBMParams params{1.0, 0.0, 0.2};
    const double T = 1.0, n = 8.0, x = params.sigma;
    const double tau = T - 1.0 / n;
    const double sig = params.sigma;
    std::mt19937_64 rng(20240901);

    auto z0 = [&](double w_tau, double dw, double t) {
        const double drift2 = x - sig;
        const double dtt = t - tau;
        return std::exp(-sig * w_tau - 0.5 * sig * sig * tau + drift2 * dw -
                        0.5 * drift2 * drift2 * dtt);
    };
    auto s_t = [&](double w_tau, double dw, double t) {
        return params.s0 *
               std::exp((params.mu - 0.5 * sig * sig) * t + sig * (w_tau + dw));
    };

    // E[Z0_T S_T]
    {
        const auto mc = mc_expectation(rng, 100000, tau, T - tau, [&](double w, double dw) {
            return z0(w, dw, T) * s_t(w, dw, T);
        });
        const double closed = example1_moment_zs(params, T, n, x, T);
        CHECK(std::abs(mc.mean - closed) < 3.0 * mc.se);
    }
    // E[Z0_t S_t] before the drift switch; the integrand is deterministic
    // there, so allow round-off slack on top of the vanishing standard error
    {
        const double t = 0.5;
        const auto mc = mc_expectation(rng, 100000, t, 0.0, [&](double w, double) {
            return std::exp(-sig * w - 0.5 * sig * sig * t) * s_t(w, 0.0, t);
        });
        CHECK(std::abs(mc.mean - example1_moment_zs(params, T, n, x, t)) <
              3.0 * mc.se + 1e-9);
    }
    // E[S0^2 Z0_t / S_t] after the switch
    {
        const double t = tau + 0.5 / n;
        const auto mc =
            mc_expectation(rng, 100000, tau, t - tau, [&](double w, double dw) {
                return params.s0 * params.s0 * z0(w, dw, t) / s_t(w, dw, t);
            });
        CHECK(std::abs(mc.mean - example1_moment_s0sq(params, T, n, x, t)) < 3.0 * mc.se);
    }
}

TEST_CASE("example 1 argument validation") {
    const GBMParams params{1.0, 0.0, 0.2};
    CHECK_THROWS_AS(example1_dual_family(params, 0.01, 1.0, 0.5, 1.0), Error);  // n <= 1/T
    CHECK_THROWS_AS(example1_dual_family(params, 0.01, 1.0, 4.0, -1.0), Error);
}
