#include "frictionlab/friction.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace frictionlab {

namespace {

void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) raise(code, msg);
}

// Piecewise-linear convex interpolation of the tabulated grid; throws when x
// leaves the hull.
double tabulated_value(const FrictionSpec& spec, double x) {
    const auto& xs = spec.grid_x;
    const auto& gs = spec.grid_g;
    if (x < xs.front() || x > xs.back())
        raise(ErrorCode::InvalidArgument, "tabulated friction evaluated outside its grid hull");
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return gs.front();
    if (it == xs.end()) return gs.back();
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return (1.0 - w) * gs[lo] + w * gs[hi];
}

// Golden-section maximization of the concave h(x) = x*y - G(x) over [a, b].
double golden_max(const FrictionSpec& spec, double y, double a, double b, double* arg) {
    constexpr double invphi = 0.6180339887498949;
    auto h = [&](double x) { return x * y - tabulated_value(spec, x); };
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = h(x1), f2 = h(x2);
    for (int i = 0; i < 160 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = h(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = h(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    if (arg) *arg = xm;
    return h(xm);
}

}  // namespace

const char* friction_kind_name(FrictionKind kind) {
    switch (kind) {
        case FrictionKind::PowerScalar: return "PowerScalar";
        case FrictionKind::QuadraticImpact: return "QuadraticImpact";
        case FrictionKind::MatrixQuadratic: return "MatrixQuadratic";
        case FrictionKind::Tabulated: return "Tabulated";
    }
    return "?";
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
        case ErrorCode::NonConvexTabulation: return "NON_CONVEX_TABULATION";
        case ErrorCode::InvalidPrice: return "INVALID_PRICE";
        case ErrorCode::NotDifferentiable: return "NOT_DIFFERENTIABLE";
        case ErrorCode::ConjugateDiverged: return "CONJUGATE_DIVERGED";
        case ErrorCode::ShapeMismatch: return "SHAPE_MISMATCH";
        case ErrorCode::BetaOutOfRange: return "BETA_OUT_OF_RANGE";
        case ErrorCode::ExplosiveStep: return "EXPLOSIVE_STEP";
        case ErrorCode::EmbeddingNotPSD: return "EMBEDDING_NOT_PSD";
        case ErrorCode::CertificateInvalid: return "CERTIFICATE_INVALID";
        case ErrorCode::PlanInfeasibleForClaim: return "PLAN_INFEASIBLE_FOR_CLAIM";
        case ErrorCode::PlanNotFlat: return "PLAN_NOT_FLAT";
        case ErrorCode::NegativePrices: return "NEGATIVE_PRICES";
        case ErrorCode::InvariantViolation: return "INVARIANT_VIOLATION";
        case ErrorCode::IoError: return "IO_ERROR";
    }
    return "?";
}

FrictionSpec FrictionSpec::power_scalar(double lambda, double alpha, double participation_cost) {
    FrictionSpec s;
    s.kind = FrictionKind::PowerScalar;
    s.lambda_coef = lambda;
    s.alpha = alpha;
    s.participation_cost = participation_cost;
    s.h_floor = lambda;  // G = lambda |x|^alpha meets its own envelope
    s.validate();
    return s;
}

FrictionSpec FrictionSpec::quadratic_impact(double lambda, double h_floor,
                                            double participation_cost) {
    FrictionSpec s;
    s.kind = FrictionKind::QuadraticImpact;
    s.lambda_coef = lambda;
    s.alpha = 2.0;
    s.participation_cost = participation_cost;
    s.h_floor = h_floor;
    s.validate();
    return s;
}

FrictionSpec FrictionSpec::matrix_quadratic(const Eigen::MatrixXd& matrix,
                                            double participation_cost) {
    FrictionSpec s;
    s.kind = FrictionKind::MatrixQuadratic;
    s.impact_matrix = matrix;
    s.alpha = 2.0;
    s.participation_cost = participation_cost;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix);
    if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0)
        s.h_floor = es.eigenvalues().minCoeff();
    s.validate();
    return s;
}

FrictionSpec FrictionSpec::tabulated(std::vector<double> xs, std::vector<double> gs,
                                     double h_floor, double alpha) {
    FrictionSpec s;
    s.kind = FrictionKind::Tabulated;
    s.grid_x = std::move(xs);
    s.grid_g = std::move(gs);
    s.h_floor = h_floor;
    s.alpha = alpha;
    s.participation_cost = 0.0;
    // participation cost is read off the grid at x = 0
    s.validate();
    for (std::size_t i = 0; i + 1 < s.grid_x.size(); ++i) {
        if (s.grid_x[i] <= 0.0 && s.grid_x[i + 1] >= 0.0) {
            s.participation_cost = tabulated_value(s, 0.0);
            break;
        }
    }
    return s;
}

int FrictionSpec::fixed_dim() const {
    if (kind == FrictionKind::MatrixQuadratic) return static_cast<int>(impact_matrix.rows());
    if (kind == FrictionKind::Tabulated) return 1;
    return 0;
}

void FrictionSpec::validate(const Tolerances& tol) const {
    require(participation_cost >= 0.0, ErrorCode::InvalidArgument,
            "participation_cost must be nonnegative");
    require(std::isfinite(participation_cost), ErrorCode::InvalidArgument,
            "participation_cost must be finite");
    switch (kind) {
        case FrictionKind::PowerScalar:
            require(lambda_coef > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
            require(alpha > 1.0, ErrorCode::InvalidArgument, "alpha must exceed 1");
            require(h_floor > 0.0, ErrorCode::InvalidArgument, "h_floor must be positive");
            break;
        case FrictionKind::QuadraticImpact:
            require(lambda_coef > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
            require(h_floor > 0.0, ErrorCode::InvalidArgument, "h_floor must be positive");
            break;
        case FrictionKind::MatrixQuadratic: {
            require(impact_matrix.rows() > 0 && impact_matrix.rows() == impact_matrix.cols(),
                    ErrorCode::InvalidArgument, "impact matrix must be square");
            require(impact_matrix.isApprox(impact_matrix.transpose(), tol.eq_rel),
                    ErrorCode::InvalidArgument, "impact matrix must be symmetric");
            Eigen::LLT<Eigen::MatrixXd> llt(impact_matrix);
            require(llt.info() == Eigen::Success, ErrorCode::InvalidArgument,
                    "impact matrix must be positive definite");
            require(h_floor > 0.0, ErrorCode::InvalidArgument, "h_floor must be positive");
            break;
        }
        case FrictionKind::Tabulated: {
            require(grid_x.size() >= 3 && grid_x.size() == grid_g.size(),
                    ErrorCode::InvalidArgument, "tabulated grid needs >= 3 matched knots");
            require(alpha > 1.0, ErrorCode::InvalidArgument, "alpha must exceed 1");
            require(h_floor > 0.0, ErrorCode::InvalidArgument, "h_floor must be positive");
            double prev_slope = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i + 1 < grid_x.size(); ++i) {
                require(grid_x[i + 1] > grid_x[i], ErrorCode::InvalidArgument,
                        "tabulated grid_x must be strictly increasing");
                const double slope = (grid_g[i + 1] - grid_g[i]) / (grid_x[i + 1] - grid_x[i]);
                if (slope < prev_slope - tol.ineq_abs - tol.eq_rel * std::abs(slope))
                    raise(ErrorCode::NonConvexTabulation,
                          "tabulated grid has decreasing slopes (not convex)");
                prev_slope = slope;
            }
            for (std::size_t i = 0; i < grid_x.size(); ++i) {
                const double floor = h_floor * std::pow(std::abs(grid_x[i]), alpha);
                require(grid_g[i] >= floor - tol.ineq_abs - tol.eq_rel * floor,
                        ErrorCode::InvalidArgument,
                        "tabulated values fall below the declared h_floor envelope");
            }
            break;
        }
    }
}

double power_conjugate(double h, double alpha, double y_abs) {
    if (y_abs == 0.0) return 0.0;
    // sup_r (r y - h r^alpha) = ((alpha-1)/alpha) alpha^{1/(1-alpha)} h^{1/(1-alpha)} y^{alpha/(alpha-1)}
    const double coeff = (alpha - 1.0) / alpha * std::pow(alpha, 1.0 / (1.0 - alpha)) *
                         std::pow(h, 1.0 / (1.0 - alpha));
    return coeff * std::pow(y_abs, alpha / (alpha - 1.0));
}

namespace {

void check_dims(const FrictionSpec& spec, const Eigen::VectorXd& s, const Eigen::VectorXd& v,
                const char* what) {
    if (s.size() != v.size())
        raise(ErrorCode::ShapeMismatch,
              std::string(what) + ": price and argument dimensions differ");
    const int fd = spec.fixed_dim();
    if (fd > 0 && v.size() != fd)
        raise(ErrorCode::ShapeMismatch, std::string(what) + ": dimension does not match spec");
    if (!s.allFinite() || !v.allFinite())
        raise(ErrorCode::InvalidArgument, std::string(what) + ": non-finite input");
    if (spec.kind == FrictionKind::QuadraticImpact && (s.array() <= 0.0).any())
        raise(ErrorCode::InvalidPrice, "QuadraticImpact requires strictly positive prices");
}

}  // namespace

double eval_g(const FrictionSpec& spec, const Eigen::VectorXd& s, const Eigen::VectorXd& x) {
    check_dims(spec, s, x, "eval_g");
    switch (spec.kind) {
        case FrictionKind::PowerScalar:
            return spec.participation_cost + spec.lambda_coef * std::pow(x.norm(), spec.alpha);
        case FrictionKind::QuadraticImpact:
            return spec.participation_cost +
                   0.5 * spec.lambda_coef * (s.array() * x.array().square()).sum();
        case FrictionKind::MatrixQuadratic:
            return spec.participation_cost + x.dot(spec.impact_matrix * x);
        case FrictionKind::Tabulated:
            return tabulated_value(spec, x[0]);
    }
    return 0.0;
}

DualEval eval_g_star(const FrictionSpec& spec, const Eigen::VectorXd& s,
                     const Eigen::VectorXd& y) {
    check_dims(spec, s, y, "eval_g_star");
    DualEval out;
    out.argsup = Eigen::VectorXd::Zero(y.size());
    switch (spec.kind) {
        case FrictionKind::PowerScalar: {
            const double yn = y.norm();
            out.value = power_conjugate(spec.lambda_coef, spec.alpha, yn) -
                        spec.participation_cost;
            if (yn > 0.0) {
                const double r =
                    std::pow(yn / (spec.alpha * spec.lambda_coef), 1.0 / (spec.alpha - 1.0));
                out.argsup = (r / yn) * y;
            }
            return out;
        }
        case FrictionKind::QuadraticImpact: {
            out.value = (y.array().square() / (2.0 * spec.lambda_coef * s.array())).sum() -
                        spec.participation_cost;
            out.argsup = y.array() / (spec.lambda_coef * s.array());
            return out;
        }
        case FrictionKind::MatrixQuadratic: {
            const Eigen::VectorXd w = spec.impact_matrix.llt().solve(y);
            out.value = 0.25 * y.dot(w) - spec.participation_cost;
            out.argsup = 0.5 * w;
            return out;
        }
        case FrictionKind::Tabulated: {
            const double yv = y[0];
            const double a = spec.grid_x.front();
            const double b = spec.grid_x.back();
            // the sup of a piecewise-linear concave function sits at a knot;
            // golden-section plus two refinement passes around the incumbent
            double best_arg = a;
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < spec.grid_x.size(); ++i) {
                const double v = spec.grid_x[i] * yv - spec.grid_g[i];
                if (v > best) {
                    best = v;
                    best_arg = spec.grid_x[i];
                }
            }
            double garg = best_arg;
            const double gval = golden_max(spec, yv, a, b, &garg);
            if (gval > best) {
                best = gval;
                best_arg = garg;
            }
            for (int pass = 0; pass < 2; ++pass) {
                const double half = (b - a) * std::pow(0.05, pass + 1);
                double rarg = best_arg;
                const double rval = golden_max(spec, yv, std::max(a, best_arg - half),
                                               std::min(b, best_arg + half), &rarg);
                if (rval > best) {
                    best = rval;
                    best_arg = rarg;
                }
            }
            // boundary attainment with outward-positive slope: the true sup
            // lives outside the tabulated hull
            const std::size_t last = spec.grid_x.size() - 1;
            const double slope_hi = (spec.grid_g[last] - spec.grid_g[last - 1]) /
                                    (spec.grid_x[last] - spec.grid_x[last - 1]);
            const double slope_lo =
                (spec.grid_g[1] - spec.grid_g[0]) / (spec.grid_x[1] - spec.grid_x[0]);
            if ((best_arg >= b - 1e-12 * (1 + std::abs(b)) && yv > slope_hi) ||
                (best_arg <= a + 1e-12 * (1 + std::abs(a)) && yv < slope_lo))
                raise(ErrorCode::ConjugateDiverged,
                      "conjugate sup not attained inside the tabulated hull");
            out.value = best;
            out.argsup[0] = best_arg;
            return out;
        }
    }
    return out;
}

Eigen::VectorXd eval_g_prime(const FrictionSpec& spec, const Eigen::VectorXd& s,
                             const Eigen::VectorXd& x) {
    check_dims(spec, s, x, "eval_g_prime");
    switch (spec.kind) {
        case FrictionKind::PowerScalar: {
            const double xn = x.norm();
            if (xn == 0.0) return Eigen::VectorXd::Zero(x.size());
            // grad lambda |x|^alpha = lambda alpha |x|^{alpha-2} x; -> 0 as x -> 0 for alpha > 1
            return spec.lambda_coef * spec.alpha * std::pow(xn, spec.alpha - 2.0) * x;
        }
        case FrictionKind::QuadraticImpact:
            return spec.lambda_coef * (s.array() * x.array()).matrix();
        case FrictionKind::MatrixQuadratic:
            return 2.0 * spec.impact_matrix * x;
        case FrictionKind::Tabulated:
            raise(ErrorCode::NotDifferentiable, "tabulated friction has no gradient");
    }
    return {};
}

double dual_bound_envelope(const FrictionSpec& spec, const Eigen::VectorXd& y) {
    if (!(spec.h_floor > 0.0) || !(spec.alpha > 1.0))
        raise(ErrorCode::InvalidArgument, "envelope needs h_floor > 0 and alpha > 1");
    const auto d = y.size();
    if (d == 1) return power_conjugate(spec.h_floor, spec.alpha, std::abs(y[0]));
    double total = 0.0;
    const double h = spec.h_floor / static_cast<double>(d);
    for (Eigen::Index i = 0; i < d; ++i)
        total += power_conjugate(h, spec.alpha, std::abs(y[i]));
    return total;
}

}  // namespace frictionlab
