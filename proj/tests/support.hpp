#pragma once

// Shared instance builders for the unit and acceptance suites.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "frictionlab/market.hpp"
#include "frictionlab/superhedge.hpp"
#include "frictionlab/wealth.hpp"

namespace fltest {

using namespace frictionlab;

/// Deterministic single-branch chain with the given per-step prices; the
/// last entry is the terminal price.
inline ScenarioTree chain_tree(const std::vector<double>& prices,
                               const std::vector<double>& times) {
    TimeGrid grid;
    grid.times = times;
    std::vector<TreeNode> nodes(prices.size());
    for (std::size_t i = 0; i < prices.size(); ++i) {
        nodes[i].id = static_cast<int>(i);
        nodes[i].parent = static_cast<int>(i) - 1;
        nodes[i].k = static_cast<int>(i);
        nodes[i].q = 1.0;
        nodes[i].price = Eigen::VectorXd::Constant(1, prices[i]);
    }
    return ScenarioTree(grid, nodes, 1);
}

/// Canonical limited-arbitrage market: deterministic price 1 on [0, 1/2) and
/// 3 on [1/2, 1); riding it nets max_phi(phi - lambda phi^2) = 1/(4 lambda).
inline ScenarioTree rising_price_tree() {
    return chain_tree({1.0, 3.0, 3.0}, {0.0, 0.5, 1.0});
}

/// One binomial move at t = 1/2 followed by a constant-price window on
/// [1/2, 1) in which positions can be unwound.
inline ScenarioTree move_then_liquidate_tree(double s0, double up, double down, double p_up) {
    TimeGrid grid;
    grid.times = {0.0, 0.5, 1.0};
    std::vector<TreeNode> nodes(5);
    nodes[0] = {0, -1, 0, 1.0, Eigen::VectorXd::Constant(1, s0)};
    nodes[1] = {1, 0, 1, p_up, Eigen::VectorXd::Constant(1, s0 * up)};
    nodes[2] = {2, 0, 1, 1.0 - p_up, Eigen::VectorXd::Constant(1, s0 * down)};
    nodes[3] = {3, 1, 2, 1.0, Eigen::VectorXd::Constant(1, s0 * up)};
    nodes[4] = {4, 2, 2, 1.0, Eigen::VectorXd::Constant(1, s0 * down)};
    return ScenarioTree(grid, nodes, 1);
}

/// One-step binomial: root s0, leaves s0*up / s0*down.
inline ScenarioTree one_step_tree(double s0, double up, double down, double p_up,
                                  double horizon = 1.0) {
    TimeGrid grid;
    grid.times = {0.0, horizon};
    std::vector<TreeNode> nodes(3);
    nodes[0] = {0, -1, 0, 1.0, Eigen::VectorXd::Constant(1, s0)};
    nodes[1] = {1, 0, 1, p_up, Eigen::VectorXd::Constant(1, s0 * up)};
    nodes[2] = {2, 0, 1, 1.0 - p_up, Eigen::VectorXd::Constant(1, s0 * down)};
    return ScenarioTree(grid, nodes, 1);
}

struct RandomTreeOptions {
    int max_steps = 3;
    int d = 1;
    std::size_t max_leaves = 16;
    bool martingale_prices = false;
};

inline ScenarioTree random_tree(std::mt19937_64& rng, const RandomTreeOptions& opts = {}) {
    std::uniform_int_distribution<int> steps_dist(1, opts.max_steps);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int steps = steps_dist(rng);

    std::vector<int> branching(static_cast<std::size_t>(steps));
    std::size_t leaves = 1;
    for (int k = 0; k < steps; ++k) {
        int b = 2 + (u01(rng) < 0.3 ? 1 : 0);
        while (leaves * static_cast<std::size_t>(b) > opts.max_leaves && b > 1) --b;
        branching[static_cast<std::size_t>(k)] = b;
        leaves *= static_cast<std::size_t>(b);
    }

    TimeGrid grid = TimeGrid::uniform(0.25 + u01(rng), static_cast<std::size_t>(steps));
    std::vector<TreeNode> nodes;
    TreeNode root;
    root.id = 0;
    root.parent = -1;
    root.k = 0;
    root.q = 1.0;
    root.price =
        Eigen::VectorXd::NullaryExpr(opts.d, [&](Eigen::Index) { return 0.5 + 2.0 * u01(rng); });
    nodes.push_back(root);

    std::vector<int> frontier{0};
    for (int k = 0; k < steps; ++k) {
        std::vector<int> next;
        for (int pid : frontier) {
            const int b = branching[static_cast<std::size_t>(k)];
            std::vector<double> qs(static_cast<std::size_t>(b));
            double total = 0.0;
            for (auto& q : qs) {
                q = 0.1 + u01(rng);
                total += q;
            }
            for (auto& q : qs) q /= total;

            // multiplicative price moves; optionally shifted so the price is
            // a martingale under the branch probabilities
            std::vector<Eigen::VectorXd> moves(static_cast<std::size_t>(b));
            Eigen::VectorXd mean = Eigen::VectorXd::Zero(opts.d);
            for (auto& m : moves) {
                m = Eigen::VectorXd::NullaryExpr(
                    opts.d, [&](Eigen::Index) { return 0.6 + 0.8 * u01(rng); });
            }
            for (std::size_t j = 0; j < moves.size(); ++j) mean += qs[j] * moves[j];
            for (int j = 0; j < b; ++j) {
                TreeNode n;
                n.id = static_cast<int>(nodes.size());
                n.parent = pid;
                n.k = k + 1;
                n.q = qs[static_cast<std::size_t>(j)];
                Eigen::VectorXd mult = moves[static_cast<std::size_t>(j)];
                if (opts.martingale_prices) mult = mult.cwiseQuotient(mean);
                n.price =
                    nodes[static_cast<std::size_t>(pid)].price.cwiseProduct(mult);
                next.push_back(n.id);
                nodes.push_back(std::move(n));
            }
        }
        frontier = std::move(next);
    }
    return ScenarioTree(grid, std::move(nodes), opts.d);
}

/// Binomial tree whose price is a martingale: p*up + (1-p)*down = 1.
inline ScenarioTree martingale_binomial(std::mt19937_64& rng, int steps) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double up = 1.05 + 0.55 * u01(rng);
    const double p = 0.15 + u01(rng) * (0.95 / up - 0.15);
    const double down = (1.0 - p * up) / (1.0 - p);
    return build_binomial_tree({0.5 + u01(rng), 0.0, 0.2},
                               TimeGrid::uniform(1.0, static_cast<std::size_t>(steps)),
                               BranchingRule::multipliers(up, down, p));
}

inline TradingRatePlan random_plan(std::mt19937_64& rng, const ScenarioTree& tree,
                                   double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    TradingRatePlan plan = TradingRatePlan::zero_for_tree(tree);
    for (int id : tree.trading_nodes())
        for (int i = 0; i < tree.asset_count(); ++i) plan.at_node(id)[i] = normal(rng);
    return plan;
}

inline Claim random_claim(std::mt19937_64& rng, const ScenarioTree& tree) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Claim claim = Claim::zero(tree);
    for (int leaf : tree.leaves()) {
        claim.at(leaf)[0] = -1.0 + 3.0 * u01(rng);
        for (int i = 1; i <= tree.asset_count(); ++i) claim.at(leaf)[i] = -0.5 + u01(rng);
    }
    return claim;
}

/// Independent maximizer of a scalar concave function by golden-section.
inline double golden_max_scalar(const std::function<double(double)>& f, double lo, double hi,
                                int iters = 200) {
    const double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace fltest
