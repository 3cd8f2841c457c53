#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "frictionlab/friction.hpp"
#include "frictionlab/market.hpp"
#include "frictionlab/wealth.hpp"

namespace frictionlab {

/// Target terminal position, one (d+1)-vector (cash, assets) per leaf,
/// indexed by leaf node id.
struct Claim {
    std::vector<Eigen::VectorXd> by_node;  // sized node_count; only leaves used

    static Claim zero(const ScenarioTree& tree);
    static Claim cash_only(const ScenarioTree& tree, const std::vector<double>& leaf_cash);

    const Eigen::VectorXd& at(int node_id) const {
        return by_node[static_cast<std::size_t>(node_id)];
    }
    Eigen::VectorXd& at(int node_id) { return by_node[static_cast<std::size_t>(node_id)]; }

    void check_shape_for(const ScenarioTree& tree) const;
};

/// Nonnegative (d+1)-dimensional martingale Z on the tree with Z0_root = 1
/// and Z^i = 0 wherever Z^0 = 0. Determined by its leaf values through
/// backward conditional expectations.
struct MartingaleCertificate {
    std::vector<Eigen::VectorXd> z;  // per node, d+1 components

    const Eigen::VectorXd& at(int node_id) const {
        return z[static_cast<std::size_t>(node_id)];
    }

    /// Rebuilds interior nodes from leaf values.
    static MartingaleCertificate from_leaf_values(const ScenarioTree& tree,
                                                  const std::vector<Eigen::VectorXd>& leaf_z);
    /// Z0 = 1, Zbar = S everywhere: zero penalty when S is a P-martingale.
    static MartingaleCertificate frictionless_consistent(const ScenarioTree& tree);

    double martingale_residual(const ScenarioTree& tree) const;
    void validate(const ScenarioTree& tree, double tol = 1e-10) const;
};

struct SolverConfig {
    int max_iter = 20000;
    double gap_tol = 1e-6;
    double feas_tol = 1e-9;
    std::uint64_t seed = 0;
    double unbounded_ceiling = 1e9;
    int threads = 0;
};

enum class SolveStatus { Success, Unbounded, MaxIterations };

const char* solve_status_name(SolveStatus status);

struct KktResiduals {
    double feasibility = 0.0;
    double stationarity = 0.0;
    double complementarity = 0.0;
    double martingale = 0.0;
};

struct SolveReport {
    SolveStatus status = SolveStatus::Success;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double duality_gap = 0.0;
    TradingRatePlan plan;
    MartingaleCertificate certificate;
    KktResiduals kkt;
    int iterations = 0;
    double wall_time = 0.0;
};

/// Dual objective E[Z_T W] - E sum_k Z0_k G*(Zbar_k - S_k) dt. Nodes with
/// Z0 = 0 contribute no penalty (perspective convention).
double dual_value(const ScenarioTree& tree, const MartingaleCertificate& cert,
                  const Claim& claim, const FrictionSpec& friction);

/// Penalty part alone: E sum_k Z0_k G*(Zbar_k - S_k) dt.
double certificate_penalty(const ScenarioTree& tree, const MartingaleCertificate& cert,
                           const FrictionSpec& friction);

/// Minimal cash c such that some plan dominates the claim componentwise at
/// every leaf from the endowment (c, z_assets). Returns the plan, a
/// martingale certificate recovered from the KKT multipliers, and the gap.
SolveReport superhedge_price(const ScenarioTree& tree, const Claim& claim,
                             const FrictionSpec& friction, const SolverConfig& cfg = {},
                             const Eigen::VectorXd& z_assets = Eigen::VectorXd());

/// Projected gradient ascent over leaf values of Z (clamp to the orthant,
/// zero assets where cash hits zero, rescale so Z0_root = 1). Returns the
/// best certificate found and its dual value.
std::pair<MartingaleCertificate, double> maximize_dual(
    const ScenarioTree& tree, const Claim& claim, const FrictionSpec& friction,
    const SolverConfig& cfg = {}, const std::optional<MartingaleCertificate>& warm = {});

struct WeakDualityReport {
    double lhs = 0.0;  // Z_0 . z
    double rhs = 0.0;  // dual value of the certificate
    bool ok = true;
};

/// Checks Z_0 . z >= dual_value for a plan with V_T(z, phi) >= W.
WeakDualityReport verify_weak_duality(const ScenarioTree& tree, const Eigen::VectorXd& z,
                                      const TradingRatePlan& plan, const Claim& claim,
                                      const MartingaleCertificate& cert,
                                      const FrictionSpec& friction);

/// Closed-form moments of the divergent exponential-martingale family for
/// the GBM + quadratic-impact market (claim: cash payoff S_T).
struct Example1Value {
    double value = 0.0;            // E[S_T Z0_T] - penalty
    double terminal_moment = 0.0;  // E[S_T Z0_T]
    double penalty = 0.0;          // (1/2 lambda) * int (E[S0^2 Z0/S] - 2 S0 + E[Z0 S]) dt
};

Example1Value example1_dual_family(const GBMParams& params, double lambda, double horizon,
                                   double n, double x);

/// E[Z0_t S_t] and E[S0^2 Z0_t / S_t] for the same family, exposed for the
/// Monte Carlo cross-check.
double example1_moment_zs(const GBMParams& params, double horizon, double n, double x, double t);
double example1_moment_s0sq(const GBMParams& params, double horizon, double n, double x,
                            double t);

}  // namespace frictionlab
