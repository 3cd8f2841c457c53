#include "frictionlab/market.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <random>

#include "parallel.hpp"

namespace frictionlab {

namespace {

void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) raise(code, msg);
}

}  // namespace

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
    require(horizon > 0.0 && steps >= 1, ErrorCode::InvalidArgument,
            "uniform grid needs horizon > 0 and steps >= 1");
    TimeGrid g;
    g.times.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        g.times[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
    g.times.back() = horizon;
    return g;
}

void TimeGrid::validate() const {
    require(times.size() >= 2, ErrorCode::InvalidArgument, "grid needs at least two times");
    require(times.front() == 0.0, ErrorCode::InvalidArgument, "grid must start at 0");
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        require(times[k + 1] > times[k], ErrorCode::InvalidArgument,
                "grid times must be strictly increasing");
    require(times.back() > 0.0, ErrorCode::InvalidArgument, "horizon must be positive");
}

ScenarioTree::ScenarioTree(TimeGrid grid, std::vector<TreeNode> nodes, int asset_count)
    : grid_(std::move(grid)), nodes_(std::move(nodes)), d_(asset_count) {
    grid_.validate();
    require(!nodes_.empty(), ErrorCode::InvalidArgument, "tree has no nodes");
    require(d_ >= 1, ErrorCode::InvalidArgument, "asset_count must be >= 1");
    children_.assign(nodes_.size(), {});
    prob_.assign(nodes_.size(), 0.0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        require(nodes_[i].id == static_cast<int>(i), ErrorCode::InvalidArgument,
                "node ids must be 0..n-1 in order");
        if (nodes_[i].parent >= 0) {
            require(nodes_[i].parent < static_cast<int>(i), ErrorCode::InvalidArgument,
                    "parent must precede child");
            children_[static_cast<std::size_t>(nodes_[i].parent)].push_back(nodes_[i].id);
        }
    }
    prob_[0] = 1.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        prob_[i] = prob_[static_cast<std::size_t>(nodes_[i].parent)] * nodes_[i].q;
    const int last_k = static_cast<int>(grid_.steps());
    for (const auto& n : nodes_) {
        if (children_[static_cast<std::size_t>(n.id)].empty())
            leaves_.push_back(n.id);
        else if (n.k < last_k)
            trading_nodes_.push_back(n.id);
        if (n.k < last_k && children_[static_cast<std::size_t>(n.id)].empty())
            raise(ErrorCode::InvariantViolation, "non-terminal node without children");
    }
    validate();
}

std::vector<int> ScenarioTree::path(int leaf_id) const {
    std::vector<int> out;
    int cur = leaf_id;
    while (cur >= 0) {
        out.push_back(cur);
        cur = nodes_[static_cast<std::size_t>(cur)].parent;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

void ScenarioTree::validate() const {
    const int last_k = static_cast<int>(grid_.steps());
    require(nodes_[0].parent < 0 && nodes_[0].k == 0, ErrorCode::InvariantViolation,
            "root must have k = 0 and no parent");
    std::vector<double> slice_mass(static_cast<std::size_t>(last_k) + 1, 0.0);
    for (const auto& n : nodes_) {
        require(n.k >= 0 && n.k <= last_k, ErrorCode::InvariantViolation,
                "node time index out of range");
        require(n.q > 0.0 && n.q <= 1.0, ErrorCode::InvariantViolation,
                "conditional probability must lie in (0, 1]");
        require(n.price.size() == d_, ErrorCode::ShapeMismatch,
                "node price dimension mismatch");
        require(n.price.allFinite(), ErrorCode::InvariantViolation, "node price not finite");
        if (n.parent >= 0)
            require(n.k == nodes_[static_cast<std::size_t>(n.parent)].k + 1,
                    ErrorCode::InvariantViolation, "child must sit one level below its parent");
        slice_mass[static_cast<std::size_t>(n.k)] += prob_[static_cast<std::size_t>(n.id)];
    }
    for (const auto& n : nodes_) {
        const auto& ch = children_[static_cast<std::size_t>(n.id)];
        if (ch.empty()) {
            require(n.k == last_k, ErrorCode::InvariantViolation,
                    "every leaf must sit at the final time index");
            continue;
        }
        double mass = 0.0;
        for (int c : ch) mass += nodes_[static_cast<std::size_t>(c)].q;
        require(std::abs(mass - 1.0) <= 1e-12,
                ErrorCode::InvariantViolation,
                "children's conditional probabilities must sum to 1");
    }
    for (int k = 0; k <= last_k; ++k)
        require(std::abs(slice_mass[static_cast<std::size_t>(k)] - 1.0) <= 1e-12,
                ErrorCode::InvariantViolation, "time-slice probabilities must sum to 1");
}

void GBMParams::validate() const {
    require(s0 > 0.0, ErrorCode::InvalidArgument, "s0 must be positive");
    require(sigma > 0.0, ErrorCode::InvalidArgument, "sigma must be positive");
    require(std::isfinite(mu), ErrorCode::InvalidArgument, "mu must be finite");
}

void PathEnsemble::validate() const {
    grid.validate();
    require(n_times == grid.times.size(), ErrorCode::ShapeMismatch,
            "ensemble time count must match grid");
    require(prices.size() == n_paths * n_times * static_cast<std::size_t>(d),
            ErrorCode::ShapeMismatch, "ensemble buffer size mismatch");
    require(weights.size() == n_paths, ErrorCode::ShapeMismatch, "one weight per path");
    double total = 0.0;
    for (double w : weights) {
        require(w >= 0.0, ErrorCode::InvariantViolation, "weights must be nonnegative");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorCode::InvariantViolation,
            "weights must sum to 1");
    for (double p : prices)
        require(std::isfinite(p), ErrorCode::InvariantViolation, "ensemble price not finite");
}

ScenarioTree build_binomial_tree(const GBMParams& params, const TimeGrid& grid,
                                 const BranchingRule& rule) {
    params.validate();
    grid.validate();
    const std::size_t steps = grid.steps();

    std::vector<TreeNode> nodes;
    nodes.reserve((std::size_t{2} << steps) - 1);
    TreeNode root;
    root.id = 0;
    root.parent = -1;
    root.k = 0;
    root.q = 1.0;
    root.price = Eigen::VectorXd::Constant(1, params.s0);
    nodes.push_back(root);

    std::vector<int> frontier{0};
    for (std::size_t k = 0; k < steps; ++k) {
        double up = rule.up, down = rule.down, p = rule.p_up;
        if (rule.kind == BranchingRule::Kind::MomentMatched) {
            const double dt = grid.dt(k);
            const double step = params.sigma * std::sqrt(dt);
            up = std::exp(step);
            down = std::exp(-step);
            const double mean = (params.mu - 0.5 * params.sigma * params.sigma) * dt;
            // p (+step) + (1-p)(-step) = mean
            p = 0.5 * (1.0 + mean / step);
        }
        if (!(up > 0.0) || !(down > 0.0))
            raise(ErrorCode::ExplosiveStep, "branch multiplier must stay positive");
        if (!(p > 0.0) || !(p < 1.0))
            raise(ErrorCode::InvariantViolation,
                  "branch probability left (0, 1); refine the grid or adjust drift");
        std::vector<int> next;
        next.reserve(frontier.size() * 2);
        for (int parent : frontier) {
            for (int branch = 0; branch < 2; ++branch) {
                TreeNode n;
                n.id = static_cast<int>(nodes.size());
                n.parent = parent;
                n.k = static_cast<int>(k) + 1;
                n.q = branch == 0 ? p : 1.0 - p;
                const double mult = branch == 0 ? up : down;
                n.price = nodes[static_cast<std::size_t>(parent)].price * mult;
                next.push_back(n.id);
                nodes.push_back(std::move(n));
            }
        }
        frontier = std::move(next);
    }
    return ScenarioTree(grid, std::move(nodes), 1);
}

PathEnsemble simulate_gbm(const GBMParams& params, const TimeGrid& grid, std::size_t n_paths,
                          std::uint64_t seed, int threads) {
    params.validate();
    grid.validate();
    require(n_paths >= 1, ErrorCode::InvalidArgument, "n_paths must be >= 1");

    PathEnsemble ens;
    ens.n_paths = n_paths;
    ens.n_times = grid.times.size();
    ens.d = 1;
    ens.grid = grid;
    ens.prices.resize(n_paths * ens.n_times);
    ens.weights.assign(n_paths, 1.0 / static_cast<double>(n_paths));
    ens.meta.model = "gbm";
    ens.meta.parameters = {{"s0", params.s0}, {"mu", params.mu}, {"sigma", params.sigma}};
    ens.meta.seed = seed;

    const std::size_t steps = grid.steps();
    detail::parallel_for(n_paths, threads, [&](std::size_t p) {
        std::mt19937_64 rng(detail::path_seed(seed, p));
        std::normal_distribution<double> normal(0.0, 1.0);
        double log_s = std::log(params.s0);
        ens.at(p, 0) = params.s0;
        for (std::size_t k = 0; k < steps; ++k) {
            const double dt = grid.dt(k);
            log_s += (params.mu - 0.5 * params.sigma * params.sigma) * dt +
                     params.sigma * std::sqrt(dt) * normal(rng);
            ens.at(p, k + 1) = std::exp(log_s);
        }
    });
    return ens;
}

namespace {

// fGn autocovariance at lag k for unit-variance increments.
double fgn_autocov(double hurst, std::size_t k) {
    const double h2 = 2.0 * hurst;
    const double kk = static_cast<double>(k);
    return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) +
                  std::pow(std::abs(kk - 1.0), h2));
}

std::mutex fftw_mutex;  // FFTW plan creation is not thread-safe

// Davies-Harte eigenvalues of the 2M circulant embedding; empty when not PSD.
std::vector<double> circulant_eigenvalues(double hurst, std::size_t m) {
    const std::size_t n = 2 * m;
    std::vector<std::complex<double>> row(n), freq(n);
    for (std::size_t k = 0; k <= m; ++k) row[k] = fgn_autocov(hurst, k);
    for (std::size_t k = m + 1; k < n; ++k) row[k] = row[n - k];

    {
        std::lock_guard<std::mutex> lock(fftw_mutex);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n),
                                          reinterpret_cast<fftw_complex*>(row.data()),
                                          reinterpret_cast<fftw_complex*>(freq.data()),
                                          FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    std::vector<double> eig(n);
    double min_eig = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        eig[k] = freq[k].real();
        min_eig = std::min(min_eig, eig[k]);
    }
    if (min_eig < -1e-9 * std::abs(eig[0])) return {};
    for (auto& e : eig) e = std::max(e, 0.0);
    return eig;
}

// One fGn sample of length m from the embedding (uses the real part of the
// synthesized complex path; one FFT per sample keeps per-path seeding exact).
// With iid complex weights the real part carries half of each eigenvalue, so
// the scale is 1/sqrt(n), not the 1/sqrt(2n) of the hermitian construction.
void sample_fgn_circulant(const std::vector<double>& eig, std::mt19937_64& rng,
                          std::vector<double>& out) {
    const std::size_t n = eig.size();
    const std::size_t m = n / 2;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::complex<double>> a(n), b(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const double re = normal(rng);
        const double im = normal(rng);
        a[k] = std::sqrt(eig[k]) * scale * std::complex<double>(re, im);
    }
    {
        std::lock_guard<std::mutex> lock(fftw_mutex);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n),
                                          reinterpret_cast<fftw_complex*>(a.data()),
                                          reinterpret_cast<fftw_complex*>(b.data()),
                                          FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    out.resize(m);
    for (std::size_t k = 0; k < m; ++k) out[k] = b[k].real();
}

Eigen::MatrixXd fgn_covariance_sqrt(double hurst, std::size_t m) {
    Eigen::MatrixXd cov(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                fgn_autocov(hurst, i >= j ? i - j : j - i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
}

void require_uniform(const TimeGrid& grid) {
    const double dt0 = grid.dt(0);
    for (std::size_t k = 1; k < grid.steps(); ++k)
        if (std::abs(grid.dt(k) - dt0) > 1e-12 * dt0)
            raise(ErrorCode::InvalidArgument,
                  "fractional Brownian generation requires a uniform grid");
}

}  // namespace

PathEnsemble simulate_fbm_price(double hurst, const FbmParams& params, const TimeGrid& grid,
                                std::size_t n_paths, std::uint64_t seed, int threads,
                                FbmMethod method) {
    grid.validate();
    require_uniform(grid);
    require(hurst > 0.0 && hurst < 1.0, ErrorCode::InvalidArgument, "hurst must lie in (0,1)");
    require(params.s0 > 0.0 && params.sigma > 0.0, ErrorCode::InvalidArgument,
            "s0 and sigma must be positive");
    require(n_paths >= 1, ErrorCode::InvalidArgument, "n_paths must be >= 1");

    const std::size_t m = grid.steps();
    const double dt = grid.dt(0);
    const double inc_scale = std::pow(dt, hurst);  // increments ~ dt^H * fGn(1)

    std::vector<double> eig;
    Eigen::MatrixXd sqrt_cov;
    bool use_circulant = method != FbmMethod::CovarianceSqrt;
    if (use_circulant) {
        eig = circulant_eigenvalues(hurst, m);
        if (eig.empty()) {
            if (method == FbmMethod::CirculantEmbedding)
                raise(ErrorCode::EmbeddingNotPSD, "circulant embedding not PSD");
            use_circulant = false;  // EmbeddingNotPSD: exact fallback
        }
    }
    if (!use_circulant) sqrt_cov = fgn_covariance_sqrt(hurst, m);

    PathEnsemble ens;
    ens.n_paths = n_paths;
    ens.n_times = grid.times.size();
    ens.d = 1;
    ens.grid = grid;
    ens.prices.resize(n_paths * ens.n_times);
    ens.weights.assign(n_paths, 1.0 / static_cast<double>(n_paths));
    ens.meta.model = "fbm";
    ens.meta.parameters = {{"s0", params.s0}, {"sigma", params.sigma}, {"hurst", hurst}};
    ens.meta.seed = seed;

    detail::parallel_for(n_paths, threads, [&](std::size_t p) {
        std::mt19937_64 rng(detail::path_seed(seed, p));
        std::vector<double> fgn(m);
        if (use_circulant) {
            sample_fgn_circulant(eig, rng, fgn);
        } else {
            std::normal_distribution<double> normal(0.0, 1.0);
            Eigen::VectorXd zvec(static_cast<Eigen::Index>(m));
            for (std::size_t k = 0; k < m; ++k) zvec[static_cast<Eigen::Index>(k)] = normal(rng);
            Eigen::VectorXd inc = sqrt_cov * zvec;
            for (std::size_t k = 0; k < m; ++k) fgn[k] = inc[static_cast<Eigen::Index>(k)];
        }
        double b = 0.0;
        ens.at(p, 0) = params.s0;
        for (std::size_t k = 0; k < m; ++k) {
            b += inc_scale * fgn[k];
            ens.at(p, k + 1) = params.s0 * std::exp(params.sigma * b);
        }
    });
    return ens;
}

ScenarioTree quantize_fbm_tree(double hurst, const FbmParams& params, const TimeGrid& grid,
                               int children_per_node) {
    grid.validate();
    require_uniform(grid);
    require(hurst > 0.0 && hurst < 1.0, ErrorCode::InvalidArgument, "hurst must lie in (0,1)");
    require(children_per_node == 2 || children_per_node == 3, ErrorCode::InvalidArgument,
            "quantization supports 2 or 3 children per node");

    const std::size_t m = grid.steps();
    const double dt = grid.dt(0);
    const double inc_scale = std::pow(dt, hurst);

    // Durbin-Levinson: AR prediction coefficients and innovation variances of
    // the unit fGn; conditional mean of X_k given the realized past is
    // phi_k . (X_{k-1}, ..., X_0).
    std::vector<std::vector<double>> phi(m);
    std::vector<double> pred_var(m);
    if (m > 0) {
        pred_var[0] = fgn_autocov(hurst, 0);
        std::vector<double> cur;
        for (std::size_t k = 1; k < m; ++k) {
            double num = fgn_autocov(hurst, k);
            for (std::size_t j = 0; j < cur.size(); ++j)
                num -= cur[j] * fgn_autocov(hurst, k - 1 - j);
            const double kappa = num / pred_var[k - 1];
            std::vector<double> nxt(k);
            nxt[k - 1] = kappa;
            for (std::size_t j = 0; j + 1 < k; ++j)
                nxt[j] = cur[j] - kappa * cur[k - 2 - j];
            pred_var[k] = pred_var[k - 1] * (1.0 - kappa * kappa);
            cur = nxt;
            phi[k] = cur;
        }
        phi[0] = {};
    }

    struct Partial {
        int id;
        std::vector<double> increments;  // realized unit-fGn increments
    };

    std::vector<TreeNode> nodes;
    TreeNode root;
    root.id = 0;
    root.parent = -1;
    root.k = 0;
    root.q = 1.0;
    root.price = Eigen::VectorXd::Constant(1, params.s0);
    nodes.push_back(root);

    std::vector<Partial> frontier{{0, {}}};
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<Partial> next;
        next.reserve(frontier.size() * static_cast<std::size_t>(children_per_node));
        for (const auto& node : frontier) {
            double mean = 0.0;
            for (std::size_t j = 0; j < phi[k].size(); ++j)
                mean += phi[k][j] * node.increments[node.increments.size() - 1 - j];
            const double sd = std::sqrt(std::max(pred_var[k], 0.0));
            // two-point quantization matches mean/variance; three-point adds
            // the fourth moment (Gauss-Hermite weights)
            std::vector<std::pair<double, double>> branches;
            if (children_per_node == 2) {
                branches = {{mean + sd, 0.5}, {mean - sd, 0.5}};
            } else {
                const double r = std::sqrt(3.0) * sd;
                branches = {{mean + r, 1.0 / 6.0}, {mean, 2.0 / 3.0}, {mean - r, 1.0 / 6.0}};
            }
            double log_price = 0.0;
            for (double inc : node.increments) log_price += inc;
            for (const auto& [x, q] : branches) {
                TreeNode n;
                n.id = static_cast<int>(nodes.size());
                n.parent = node.id;
                n.k = static_cast<int>(k) + 1;
                n.q = q;
                n.price = Eigen::VectorXd::Constant(
                    1, params.s0 * std::exp(params.sigma * inc_scale * (log_price + x)));
                Partial child{n.id, node.increments};
                child.increments.push_back(x);
                next.push_back(std::move(child));
                nodes.push_back(std::move(n));
            }
        }
        frontier = std::move(next);
    }
    return ScenarioTree(grid, std::move(nodes), 1);
}

}  // namespace frictionlab
