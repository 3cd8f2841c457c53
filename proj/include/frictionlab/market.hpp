#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "frictionlab/errors.hpp"

namespace frictionlab {

/// Strictly increasing times t_0 = 0 < ... < t_M = T.
struct TimeGrid {
    std::vector<double> times;

    static TimeGrid uniform(double horizon, std::size_t steps);

    double horizon() const { return times.back(); }
    std::size_t steps() const { return times.size() - 1; }
    double dt(std::size_t k) const { return times[k + 1] - times[k]; }

    void validate() const;
};

struct TreeNode {
    int id = 0;
    int parent = -1;  // -1 for the root
    int k = 0;        // time index
    double q = 1.0;   // conditional probability given the parent
    Eigen::VectorXd price;
};

/// Finite filtered market: a path-distinct tree with one node layer per grid
/// time. Node prices are constant on [t_k, t_{k+1}), so all dt-integrals are
/// exact left-endpoint sums.
class ScenarioTree {
  public:
    ScenarioTree(TimeGrid grid, std::vector<TreeNode> nodes, int asset_count);

    int asset_count() const { return d_; }
    const TimeGrid& grid() const { return grid_; }
    std::size_t node_count() const { return nodes_.size(); }
    const TreeNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const std::vector<int>& children(int id) const {
        return children_[static_cast<std::size_t>(id)];
    }
    bool is_leaf(int id) const { return children_[static_cast<std::size_t>(id)].empty(); }
    const std::vector<int>& leaves() const { return leaves_; }
    /// Unconditional probability of reaching a node.
    double prob(int id) const { return prob_[static_cast<std::size_t>(id)]; }
    /// Node ids on the root-to-leaf path, one per time index.
    std::vector<int> path(int leaf_id) const;
    /// Ids of all non-terminal nodes (k < M), in id order.
    const std::vector<int>& trading_nodes() const { return trading_nodes_; }
    int root() const { return 0; }

    void validate() const;

  private:
    TimeGrid grid_;
    std::vector<TreeNode> nodes_;
    int d_;
    std::vector<std::vector<int>> children_;
    std::vector<double> prob_;
    std::vector<int> leaves_;
    std::vector<int> trading_nodes_;
};

struct GBMParams {
    double s0 = 1.0;
    double mu = 0.0;
    double sigma = 0.2;

    void validate() const;
};

struct GeneratorMeta {
    std::string model;
    std::map<std::string, double> parameters;
    std::uint64_t seed = 0;
};

/// Weighted Monte Carlo path ensemble, prices stored [path][time][asset].
struct PathEnsemble {
    std::size_t n_paths = 0;
    std::size_t n_times = 0;
    int d = 1;
    std::vector<double> prices;
    std::vector<double> weights;
    TimeGrid grid;
    GeneratorMeta meta;

    double at(std::size_t path, std::size_t t, int asset = 0) const {
        return prices[(path * n_times + t) * static_cast<std::size_t>(d) +
                      static_cast<std::size_t>(asset)];
    }
    double& at(std::size_t path, std::size_t t, int asset = 0) {
        return prices[(path * n_times + t) * static_cast<std::size_t>(d) +
                      static_cast<std::size_t>(asset)];
    }

    void validate() const;
};

struct BranchingRule {
    enum class Kind { MomentMatched, Multipliers } kind = Kind::MomentMatched;
    double up = 2.0;
    double down = 0.5;
    double p_up = 0.5;

    static BranchingRule moment_matched() { return {}; }
    static BranchingRule multipliers(double up, double down, double p_up) {
        return {Kind::Multipliers, up, down, p_up};
    }
};

/// Path-distinct binomial tree (2^M leaves). The moment-matched rule uses
/// log-returns +-sigma*sqrt(dt) with p chosen so the per-step log-mean equals
/// (mu - sigma^2/2)*dt; the second log-moment is then sigma^2*dt exactly.
ScenarioTree build_binomial_tree(const GBMParams& params, const TimeGrid& grid,
                                 const BranchingRule& rule);

/// Exact log-Euler GBM sampling; per-path counter-based seeding, so results
/// do not depend on the number of workers.
PathEnsemble simulate_gbm(const GBMParams& params, const TimeGrid& grid,
                          std::size_t n_paths, std::uint64_t seed, int threads = 0);

enum class FbmMethod { Auto, CirculantEmbedding, CovarianceSqrt };

struct FbmParams {
    double s0 = 1.0;
    double sigma = 0.2;
};

/// S = s0 * exp(sigma * B^H) with exact-covariance fractional Brownian
/// increments on a uniform grid (circulant embedding; covariance square root
/// as fallback when the embedding is not PSD).
PathEnsemble simulate_fbm_price(double hurst, const FbmParams& params, const TimeGrid& grid,
                                std::size_t n_paths, std::uint64_t seed, int threads = 0,
                                FbmMethod method = FbmMethod::Auto);

/// Per-step quantile quantization of the fBM log-price onto a tree with 2 or
/// 3 children per node (conditional Gaussian moments via Durbin-Levinson).
ScenarioTree quantize_fbm_tree(double hurst, const FbmParams& params, const TimeGrid& grid,
                               int children_per_node = 2);

}  // namespace frictionlab
