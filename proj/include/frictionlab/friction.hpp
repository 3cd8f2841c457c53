#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "frictionlab/errors.hpp"

namespace frictionlab {

enum class FrictionKind { PowerScalar, QuadraticImpact, MatrixQuadratic, Tabulated };

const char* friction_kind_name(FrictionKind kind);

/// Validation tolerances: absolute for inequalities, relative for equalities.
struct Tolerances {
    double ineq_abs = 1e-9;
    double eq_rel = 1e-6;
};

/// A convex trading-cost functional G together with the parameters of its
/// superlinear lower envelope G(x) >= h_floor * |x|^alpha.
///
/// Kinds:
///   PowerScalar      G(x) = lambda * |x|^alpha            (+ participation cost)
///   QuadraticImpact  G(x) = (lambda/2) * sum_i s_i x_i^2  (price-scaled, s > 0)
///   MatrixQuadratic  G(x) = x' * impact_matrix * x        (SPD matrix, alpha = 2)
///   Tabulated        convex piecewise-linear grid (x_i, g_i), d = 1
struct FrictionSpec {
    FrictionKind kind = FrictionKind::PowerScalar;
    double lambda_coef = 1.0;
    double alpha = 2.0;
    Eigen::MatrixXd impact_matrix;
    double participation_cost = 0.0;
    double h_floor = 1.0;
    std::vector<double> grid_x;
    std::vector<double> grid_g;

    static FrictionSpec power_scalar(double lambda, double alpha,
                                     double participation_cost = 0.0);
    static FrictionSpec quadratic_impact(double lambda, double h_floor,
                                         double participation_cost = 0.0);
    static FrictionSpec matrix_quadratic(const Eigen::MatrixXd& matrix,
                                         double participation_cost = 0.0);
    static FrictionSpec tabulated(std::vector<double> xs, std::vector<double> gs,
                                  double h_floor, double alpha);

    /// Dimension pinned by the functional itself (MatrixQuadratic), or 0 when any d works.
    int fixed_dim() const;

    void validate(const Tolerances& tol = {}) const;

    bool differentiable() const { return kind != FrictionKind::Tabulated; }
};

/// Value of the dual friction G*(y) plus a maximizer of x*y - G(x) when attained.
struct DualEval {
    double value = 0.0;
    Eigen::VectorXd argsup;
    bool attained = true;
};

/// G_t(x) at price s. The price enters only for QuadraticImpact.
double eval_g(const FrictionSpec& spec, const Eigen::VectorXd& s, const Eigen::VectorXd& x);

/// Fenchel conjugate G*(y) = sup_x (x*y - G(x)). Closed form for the three
/// parametric kinds, golden-section search over the grid hull for Tabulated.
DualEval eval_g_star(const FrictionSpec& spec, const Eigen::VectorXd& s,
                     const Eigen::VectorXd& y);

/// Gradient of G at x; rejects Tabulated (NotDifferentiable).
Eigen::VectorXd eval_g_prime(const FrictionSpec& spec, const Eigen::VectorXd& s,
                             const Eigen::VectorXd& x);

/// Upper envelope on G*: conjugate of the declared floor H|x|^alpha, split
/// per coordinate with H/d when d > 1. Dominates eval_g_star for any G above
/// the floor.
double dual_bound_envelope(const FrictionSpec& spec, const Eigen::VectorXd& y);

/// Scalar conjugate of r -> h * r^alpha, evaluated at |y|.
double power_conjugate(double h, double alpha, double y_abs);

}  // namespace frictionlab
