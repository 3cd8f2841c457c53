#include <doctest.h>

#include <cmath>
#include <random>

#include "frictionlab/friction.hpp"

using namespace frictionlab;

namespace {

Eigen::VectorXd vec1(double x) { return Eigen::VectorXd::Constant(1, x); }

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

// Independent conjugate oracle: sup of x*y - g(x) over an adaptively widened
// grid with three refinement passes around the incumbent.
double grid_sup_conjugate(const std::function<double(double)>& g, double y) {
    double radius = 1.0;
    auto scan = [&](double lo, double hi, std::size_t points, double* arg) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i <= points; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / points;
            const double v = x * y - g(x);
            if (v > best) {
                best = v;
                *arg = x;
            }
        }
        return best;
    };
    double arg = 0.0;
    double best = scan(-radius, radius, 4000, &arg);
    while (std::abs(arg) > 0.9 * radius && radius < 1e12) {
        radius *= 4.0;
        best = scan(-radius, radius, 4000, &arg);
    }
    double width = radius / 1000.0;
    for (int pass = 0; pass < 3; ++pass) {
        double refined_arg = arg;
        const double refined = scan(arg - width, arg + width, 4000, &refined_arg);
        if (refined > best) {
            best = refined;
            arg = refined_arg;
        }
        width /= 1000.0;
    }
    return best;
}

FrictionSpec tabulated_quadratic(double lambda, double lo, double hi, std::size_t knots) {
    std::vector<double> xs(knots), gs(knots);
    for (std::size_t i = 0; i < knots; ++i) {
        xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(knots - 1);
        gs[i] = lambda * xs[i] * xs[i];
    }
    return FrictionSpec::tabulated(xs, gs, lambda * 0.8, 2.0);
}

}  // namespace

TEST_CASE("eval_g closed forms") {
    CHECK(eval_g(FrictionSpec::power_scalar(1.0, 2.0), vec1(1.0), vec1(3.0)) ==
          doctest::Approx(9.0));
    CHECK(eval_g(FrictionSpec::quadratic_impact(0.5, 1.0), vec1(100.0), vec1(2.0)) ==
          doctest::Approx(100.0));
    CHECK(eval_g(FrictionSpec::matrix_quadratic(Eigen::MatrixXd::Identity(2, 2)), vec2(1, 1),
                 vec2(1.0, 2.0)) == doctest::Approx(5.0));
    // participation cost shifts the whole graph
    CHECK(eval_g(FrictionSpec::power_scalar(1.0, 2.0, 0.25), vec1(1.0), vec1(0.0)) ==
          doctest::Approx(0.25));
}

TEST_CASE("eval_g rejects nonpositive prices for price-scaled kinds") {
    const auto spec = FrictionSpec::quadratic_impact(0.5, 1.0);
    CHECK_THROWS_WITH_AS(eval_g(spec, vec1(0.0), vec1(1.0)),
                         doctest::Contains("positive prices"), Error);
}

TEST_CASE("eval_g_star closed forms") {
    const auto power = FrictionSpec::power_scalar(1.0, 2.0);
    CHECK(eval_g_star(power, vec1(1.0), vec1(2.0)).value == doctest::Approx(1.0));

    // sup of -G attained at zero trading when the participation cost is zero
    CHECK(eval_g_star(power, vec1(1.0), vec1(0.0)).value == doctest::Approx(0.0));
    CHECK(eval_g_star(FrictionSpec::matrix_quadratic(Eigen::MatrixXd::Identity(2, 2)),
                      vec2(1, 1), vec2(0, 0))
              .value == doctest::Approx(0.0));

    const auto quad = FrictionSpec::quadratic_impact(0.5, 1.0);
    CHECK(eval_g_star(quad, vec1(100.0), vec1(-100.0)).value == doctest::Approx(100.0));
}

TEST_CASE("tabulated conjugate matches the closed form through the grid-sup oracle") {
    const auto tab = tabulated_quadratic(1.0, -10.0, 10.0, 8001);
    const auto dual = eval_g_star(tab, vec1(1.0), vec1(3.0));
    CHECK(dual.value == doctest::Approx(2.25).epsilon(1e-6));
    const double oracle = grid_sup_conjugate([](double x) { return x * x; }, 3.0);
    CHECK(dual.value == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("tabulated conjugate diverges when the sup escapes the hull") {
    const auto tab = tabulated_quadratic(1.0, -2.0, 2.0, 801);
    // slope at the right edge is ~4; any y above it pushes the sup outside
    CHECK_THROWS_AS(eval_g_star(tab, vec1(1.0), vec1(10.0)), Error);
}

TEST_CASE("non-convex tabulation is rejected") {
    CHECK_THROWS_WITH_AS(FrictionSpec::tabulated({-1.0, 0.0, 1.0}, {1.0, 2.0, 1.0}, 0.1, 2.0),
                         doctest::Contains("not convex"), Error);
}

TEST_CASE("eval_g_prime closed forms and finite differences") {
    CHECK(eval_g_prime(FrictionSpec::quadratic_impact(1.0, 0.5), vec1(2.0), vec1(3.0))[0] ==
          doctest::Approx(6.0));
    CHECK(eval_g_prime(FrictionSpec::power_scalar(1.0, 2.0), vec1(1.0), vec1(-1.0))[0] ==
          doctest::Approx(-2.0));
    // PowerScalar gradient vanishes at zero for every alpha > 1
    CHECK(eval_g_prime(FrictionSpec::power_scalar(2.0, 1.5), vec1(1.0), vec1(0.0))[0] == 0.0);

    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2, 2);
    diag(0, 0) = 1.0;
    diag(1, 1) = 2.0;
    const auto spec = FrictionSpec::matrix_quadratic(diag);
    const Eigen::VectorXd x = vec2(1.0, 1.0);
    const Eigen::VectorXd grad = eval_g_prime(spec, vec2(1, 1), x);
    CHECK(grad[0] == doctest::Approx(2.0));
    CHECK(grad[1] == doctest::Approx(4.0));
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd lo = x, hi = x;
        lo[i] -= h;
        hi[i] += h;
        const double fd =
            (eval_g(spec, vec2(1, 1), hi) - eval_g(spec, vec2(1, 1), lo)) / (2 * h);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-6));
    }

    CHECK_THROWS_AS(eval_g_prime(tabulated_quadratic(1.0, -2, 2, 41), vec1(1.0), vec1(0.3)),
                    Error);
}

TEST_CASE("dual bound envelope") {
    auto power = FrictionSpec::power_scalar(1.0, 2.0);
    power.h_floor = 1.0;
    CHECK(dual_bound_envelope(power, vec1(2.0)) == doctest::Approx(1.0));
    CHECK(dual_bound_envelope(power, vec1(0.0)) == doctest::Approx(0.0));

    // d = 2 splits the floor per coordinate
    const double env = dual_bound_envelope(power, vec2(1.0, 1.0));
    CHECK(env == doctest::Approx(1.0));
    CHECK(env >= eval_g_star(power, vec2(1, 1), vec2(1, 1)).value);
}

TEST_CASE("friction properties hold on random probes") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(-5.0, 5.0);
    std::uniform_real_distribution<double> lam_dist(0.2, 3.0);
    std::uniform_real_distribution<double> alpha_dist(1.3, 3.0);
    std::uniform_real_distribution<double> cost_dist(0.0, 0.5);

    for (int trial = 0; trial < 300; ++trial) {
        FrictionSpec spec;
        Eigen::VectorXd s, x, y;
        switch (trial % 3) {
            case 0:
                spec = FrictionSpec::power_scalar(lam_dist(rng), alpha_dist(rng),
                                                  cost_dist(rng));
                s = vec1(1.0);
                x = vec1(unif(rng));
                y = vec1(unif(rng));
                break;
            case 1:
                spec = FrictionSpec::quadratic_impact(lam_dist(rng), 0.05, cost_dist(rng));
                s = vec1(0.5 + lam_dist(rng));
                x = vec1(unif(rng));
                y = vec1(unif(rng));
                break;
            default: {
                Eigen::MatrixXd m(2, 2);
                const double a = lam_dist(rng), off = 0.4 * a;
                m << a, off, off, a;
                spec = FrictionSpec::matrix_quadratic(m, cost_dist(rng));
                s = vec2(1.0, 1.0);
                x = vec2(unif(rng), unif(rng));
                y = vec2(unif(rng), unif(rng));
            }
        }

        const double g_x = eval_g(spec, s, x);
        const DualEval dual = eval_g_star(spec, s, y);

        // Fenchel-Young
        CHECK(x.dot(y) <= g_x + dual.value + 1e-9);
        // equality at y = grad G(x)
        const Eigen::VectorXd y_eq = eval_g_prime(spec, s, x);
        const double star_eq = eval_g_star(spec, s, y_eq).value;
        CHECK(x.dot(y_eq) == doctest::Approx(g_x + star_eq).epsilon(1e-6));
        // conjugate lower bound
        CHECK(dual.value >= -spec.participation_cost - 1e-12);
        // the argsup certifies attainment
        CHECK(dual.argsup.dot(y) - eval_g(spec, s, dual.argsup) ==
              doctest::Approx(dual.value).epsilon(1e-9));
        // convexity through zero
        CHECK(eval_g(spec, s, 2.0 * x) >= 2.0 * g_x - spec.participation_cost - 1e-9);
    }
}

TEST_CASE("biconjugation recovers G on a probe grid") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    const auto spec = FrictionSpec::power_scalar(0.7, 1.8);
    const Eigen::VectorXd s = vec1(1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd x = vec1(unif(rng));
        // sup_y (x y - G*(y)) attained at y = grad G(x); scan a bracket around it
        const double y_center = eval_g_prime(spec, s, x)[0];
        double best = -1e300;
        for (int i = -2000; i <= 2000; ++i) {
            const double y = y_center + static_cast<double>(i) / 400.0;
            best = std::max(best, x[0] * y - eval_g_star(spec, s, vec1(y)).value);
        }
        CHECK(best == doctest::Approx(eval_g(spec, s, x)).epsilon(1e-6));
    }
}

TEST_CASE("envelope dominates the conjugate on random probes") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(-8.0, 8.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto spec = FrictionSpec::power_scalar(1.0 + 0.5 * (trial % 5), 2.0);
        spec.h_floor = spec.lambda_coef;  // exact floor for the pure power kind
        const Eigen::VectorXd y = vec1(unif(rng));
        CHECK(eval_g_star(spec, vec1(1.0), y).value <= dual_bound_envelope(spec, y) + 1e-9);
    }
}
