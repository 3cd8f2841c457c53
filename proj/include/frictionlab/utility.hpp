#pragma once

#include <Eigen/Dense>
#include <vector>

#include "frictionlab/superhedge.hpp"

namespace frictionlab {

enum class UtilityKind { Exponential, NegPower };

/// Utility on the whole real line. Exponential: U(x) = -exp(-a x).
/// NegPower: U(x) = -C (kink - x)^delta below the kink, 0 above; satisfies
/// U(x) <= -C|x|^delta on x <= 0 with the same C.
struct UtilitySpec {
    UtilityKind kind = UtilityKind::Exponential;
    double a = 1.0;      // Exponential risk aversion
    double c_coef = 1.0; // NegPower C
    double delta = 2.0;  // NegPower exponent
    double kink = 1.0;   // NegPower bliss point

    static UtilitySpec exponential(double a);
    static UtilitySpec neg_power(double c_coef, double delta, double kink = 1.0);

    double u(double x) const;
    double u_prime(double x) const;
    /// Convex conjugate: U~(y) = sup_x (U(x) - x y), y > 0.
    double u_conj(double y) const;

    void validate() const;
};

enum class ConstraintClass { TerminalFlat, TerminalNonneg };

/// First-order-condition report (shadow price, discount factor, residuals).
struct FocReport {
    double y_star = 0.0;
    std::vector<double> q_density;               // per leaf id order of tree.leaves()
    std::vector<Eigen::VectorXd> shadow_price;   // per node id, d components (trading nodes)
    double martingale_residual = 0.0;
    double orthogonality_residual = 0.0;
    double duality_gap_bound = 0.0;
    bool optimal_certified = false;
    // Eq-luk metadata: exponent pair for the lower bound U(x) <= -C|x|^delta.
    double luk_delta = 2.0;
    double luk_c = 0.0;
    double luk_eta = 2.0;
};

/// Maximizes E U(V0_T(c, phi) + W) over plans with terminal asset positions
/// exactly zero (TerminalFlat) or nonnegative (TerminalNonneg). W is a
/// bounded per-leaf endowment indexed by node id.
SolveReport maximize_utility(const ScenarioTree& tree, double cash,
                             const std::vector<double>& endowment, const UtilitySpec& utility,
                             const FrictionSpec& friction, const SolverConfig& cfg = {},
                             ConstraintClass constraint = ConstraintClass::TerminalFlat);

/// Checks the first-order conditions at a terminal-flat plan: dQ/dP from
/// marginal utility, shadow price Z = S + G'(phi), Q-martingale property of
/// Z, and the orthogonality E_Q sum phi_k Z_k dt = 0.
FocReport verify_foc(const ScenarioTree& tree, const TradingRatePlan& plan, double cash,
                     const std::vector<double>& endowment, const UtilitySpec& utility,
                     const FrictionSpec& friction, double tol = 1e-6);

/// Upper bound E[U~(y dQ/dP)] + y E_Q[int G*(Z - S) dt + W] + y c minimized
/// over a logarithmic y-grid, minus the plan's achieved objective.
double duality_gap_bound(const ScenarioTree& tree, double cash,
                         const std::vector<double>& endowment, const UtilitySpec& utility,
                         const FrictionSpec& friction, const std::vector<double>& q_density,
                         const std::vector<Eigen::VectorXd>& shadow_price,
                         const TradingRatePlan& plan, double martingale_tol = 1e-6);

/// Objective E U(V0_T((cash,0..0), plan) + W).
double utility_objective(const ScenarioTree& tree, double cash,
                         const std::vector<double>& endowment, const UtilitySpec& utility,
                         const FrictionSpec& friction, const TradingRatePlan& plan);

}  // namespace frictionlab
