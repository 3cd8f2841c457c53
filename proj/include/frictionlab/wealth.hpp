#pragma once

#include <Eigen/Dense>
#include <vector>

#include "frictionlab/friction.hpp"
#include "frictionlab/market.hpp"

namespace frictionlab {

/// Adapted trading rates. Tree form indexes rates by node id (rates at
/// terminal nodes are ignored and kept zero); path form indexes by
/// (path, step).
struct TradingRatePlan {
    enum class Form { Tree, Path };

    Form form = Form::Tree;
    int d = 1;
    std::size_t n_paths = 0;  // path form only
    std::size_t n_steps = 0;  // path form only
    std::vector<Eigen::VectorXd> rates;

    static TradingRatePlan zero_for_tree(const ScenarioTree& tree);
    static TradingRatePlan zero_for_paths(const PathEnsemble& paths);

    const Eigen::VectorXd& at_node(int node_id) const {
        return rates[static_cast<std::size_t>(node_id)];
    }
    Eigen::VectorXd& at_node(int node_id) { return rates[static_cast<std::size_t>(node_id)]; }
    const Eigen::VectorXd& at(std::size_t path, std::size_t k) const {
        return rates[path * n_steps + k];
    }
    Eigen::VectorXd& at(std::size_t path, std::size_t k) { return rates[path * n_steps + k]; }

    void check_shape_for(const ScenarioTree& tree) const;
    void check_shape_for(const PathEnsemble& paths) const;
};

/// Cash and asset positions per node (tree form) or per (path, time) (path form).
struct WealthGrid {
    TradingRatePlan::Form form = TradingRatePlan::Form::Tree;
    std::size_t n_paths = 0;
    std::size_t n_times = 0;
    std::vector<double> cash;
    std::vector<Eigen::VectorXd> assets;

    double cash_at(std::size_t path, std::size_t t) const { return cash[path * n_times + t]; }
    const Eigen::VectorXd& assets_at(std::size_t path, std::size_t t) const {
        return assets[path * n_times + t];
    }
};

/// Wealth dynamics: assets v_{k+1} = v_k + phi_k*dt, cash
/// v0_{k+1} = v0_k - (phi_k . S_k)*dt - G_k(phi_k)*dt. Exact for the tree's
/// step-constant prices.
WealthGrid roll_forward(const ScenarioTree& tree, const Eigen::VectorXd& z,
                        const TradingRatePlan& plan, const FrictionSpec& friction);
WealthGrid roll_forward(const PathEnsemble& paths, const Eigen::VectorXd& z,
                        const TradingRatePlan& plan, const FrictionSpec& friction);

/// Execution prices S~ = S + G(phi)/phi per step (d = 1); NaN where phi = 0.
std::vector<double> execution_price_series(const TradingRatePlan& plan,
                                           const ScenarioTree& tree,
                                           const FrictionSpec& friction);
std::vector<double> execution_price_series(const TradingRatePlan& plan,
                                           const PathEnsemble& paths,
                                           const FrictionSpec& friction);

/// Zeroes the rate wherever the execution price is negative; the result
/// dominates the input plan pointwise at the horizon.
TradingRatePlan filter_positive_execution(const TradingRatePlan& plan, const ScenarioTree& tree,
                                          const FrictionSpec& friction);
TradingRatePlan filter_positive_execution(const TradingRatePlan& plan, const PathEnsemble& paths,
                                          const FrictionSpec& friction);

/// Market bound B = sum_k G*(-S_k) dt per leaf / per path; every feasible
/// payoff satisfies V0_T(z, phi) <= z0 + B.
std::vector<double> market_bound(const ScenarioTree& tree, const FrictionSpec& friction);
std::vector<double> market_bound(const PathEnsemble& paths, const FrictionSpec& friction);

struct VolumeBoundParams {
    double beta = 1.5;
};

struct VolumeBoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double xi_minus = 0.0;
    double m = 0.0;
    bool ok = true;
};

/// Pathwise trading-volume bound: after rescaling the horizon to 1,
///   int |phi|^beta (1+|S|)^beta dt <= xi_- + 2^{beta/(alpha-beta)} m^{alpha/(alpha-beta)} + 1
/// with xi = -int S phi - int G(phi) and m built from the declared floor.
std::vector<VolumeBoundReport> volume_bound_check(const TradingRatePlan& plan,
                                                  const ScenarioTree& tree,
                                                  const FrictionSpec& friction,
                                                  const VolumeBoundParams& params);
std::vector<VolumeBoundReport> volume_bound_check(const TradingRatePlan& plan,
                                                  const PathEnsemble& paths,
                                                  const FrictionSpec& friction,
                                                  const VolumeBoundParams& params);

/// Square-root buying plan of the quadratic-impact market whose cash outflow
/// is exactly k per unit time: phi = (1/lambda)(sqrt(1 + 2 lambda k / S) - 1).
TradingRatePlan constant_cashflow_plan(const ScenarioTree& tree, const FrictionSpec& friction,
                                       double cash_rate);
TradingRatePlan constant_cashflow_plan(const PathEnsemble& paths, const FrictionSpec& friction,
                                       double cash_rate);

}  // namespace frictionlab
