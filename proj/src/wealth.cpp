#include "frictionlab/wealth.hpp"

#include <cmath>
#include <limits>

namespace frictionlab {

namespace {

void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) raise(code, msg);
}

Eigen::VectorXd price_of(const PathEnsemble& paths, std::size_t p, std::size_t k) {
    Eigen::VectorXd s(paths.d);
    for (int i = 0; i < paths.d; ++i) s[i] = paths.at(p, k, i);
    return s;
}

}  // namespace

TradingRatePlan TradingRatePlan::zero_for_tree(const ScenarioTree& tree) {
    TradingRatePlan plan;
    plan.form = Form::Tree;
    plan.d = tree.asset_count();
    plan.rates.assign(tree.node_count(), Eigen::VectorXd::Zero(tree.asset_count()));
    return plan;
}

TradingRatePlan TradingRatePlan::zero_for_paths(const PathEnsemble& paths) {
    TradingRatePlan plan;
    plan.form = Form::Path;
    plan.d = paths.d;
    plan.n_paths = paths.n_paths;
    plan.n_steps = paths.grid.steps();
    plan.rates.assign(plan.n_paths * plan.n_steps, Eigen::VectorXd::Zero(paths.d));
    return plan;
}

void TradingRatePlan::check_shape_for(const ScenarioTree& tree) const {
    require(form == Form::Tree, ErrorCode::ShapeMismatch, "plan is not in tree form");
    require(d == tree.asset_count(), ErrorCode::ShapeMismatch, "plan asset count mismatch");
    require(rates.size() == tree.node_count(), ErrorCode::ShapeMismatch,
            "plan must carry one rate per node");
    for (const auto& r : rates) {
        require(r.size() == d, ErrorCode::ShapeMismatch, "rate dimension mismatch");
        require(r.allFinite(), ErrorCode::InvalidArgument, "rates must be finite");
    }
}

void TradingRatePlan::check_shape_for(const PathEnsemble& paths) const {
    require(form == Form::Path, ErrorCode::ShapeMismatch, "plan is not in path form");
    require(d == paths.d, ErrorCode::ShapeMismatch, "plan asset count mismatch");
    require(n_paths == paths.n_paths && n_steps == paths.grid.steps(),
            ErrorCode::ShapeMismatch, "plan grid mismatch");
    require(rates.size() == n_paths * n_steps, ErrorCode::ShapeMismatch,
            "plan must carry one rate per (path, step)");
    for (const auto& r : rates) {
        require(r.size() == d, ErrorCode::ShapeMismatch, "rate dimension mismatch");
        require(r.allFinite(), ErrorCode::InvalidArgument, "rates must be finite");
    }
}

WealthGrid roll_forward(const ScenarioTree& tree, const Eigen::VectorXd& z,
                        const TradingRatePlan& plan, const FrictionSpec& friction) {
    plan.check_shape_for(tree);
    friction.validate();
    require(z.size() == tree.asset_count() + 1, ErrorCode::ShapeMismatch,
            "initial position must have d+1 components");

    WealthGrid wealth;
    wealth.form = TradingRatePlan::Form::Tree;
    wealth.cash.assign(tree.node_count(), 0.0);
    wealth.assets.assign(tree.node_count(), Eigen::VectorXd::Zero(tree.asset_count()));
    wealth.cash[0] = z[0];
    wealth.assets[0] = z.tail(tree.asset_count());
    for (const auto& node : tree.nodes()) {
        if (tree.is_leaf(node.id)) continue;
        const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
        const auto& phi = plan.at_node(node.id);
        const double cost = (phi.dot(node.price) + eval_g(friction, node.price, phi)) * dt;
        for (int child : tree.children(node.id)) {
            wealth.cash[static_cast<std::size_t>(child)] =
                wealth.cash[static_cast<std::size_t>(node.id)] - cost;
            wealth.assets[static_cast<std::size_t>(child)] =
                wealth.assets[static_cast<std::size_t>(node.id)] + phi * dt;
        }
    }
    return wealth;
}

WealthGrid roll_forward(const PathEnsemble& paths, const Eigen::VectorXd& z,
                        const TradingRatePlan& plan, const FrictionSpec& friction) {
    plan.check_shape_for(paths);
    friction.validate();
    require(z.size() == paths.d + 1, ErrorCode::ShapeMismatch,
            "initial position must have d+1 components");

    WealthGrid wealth;
    wealth.form = TradingRatePlan::Form::Path;
    wealth.n_paths = paths.n_paths;
    wealth.n_times = paths.n_times;
    wealth.cash.assign(paths.n_paths * paths.n_times, 0.0);
    wealth.assets.assign(paths.n_paths * paths.n_times, Eigen::VectorXd::Zero(paths.d));
    for (std::size_t p = 0; p < paths.n_paths; ++p) {
        wealth.cash[p * paths.n_times] = z[0];
        wealth.assets[p * paths.n_times] = z.tail(paths.d);
        for (std::size_t k = 0; k < plan.n_steps; ++k) {
            const double dt = paths.grid.dt(k);
            const Eigen::VectorXd s = price_of(paths, p, k);
            const auto& phi = plan.at(p, k);
            const double cost = (phi.dot(s) + eval_g(friction, s, phi)) * dt;
            wealth.cash[p * paths.n_times + k + 1] = wealth.cash[p * paths.n_times + k] - cost;
            wealth.assets[p * paths.n_times + k + 1] =
                wealth.assets[p * paths.n_times + k] + phi * dt;
        }
    }
    return wealth;
}

namespace {

double execution_price(const FrictionSpec& friction, const Eigen::VectorXd& s, double phi) {
    if (phi == 0.0) return std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, phi);
    return s[0] + eval_g(friction, s, x) / phi;
}

}  // namespace

std::vector<double> execution_price_series(const TradingRatePlan& plan, const ScenarioTree& tree,
                                           const FrictionSpec& friction) {
    plan.check_shape_for(tree);
    require(tree.asset_count() == 1, ErrorCode::InvalidArgument,
            "execution prices are defined for d = 1");
    std::vector<double> out(tree.node_count(), std::numeric_limits<double>::quiet_NaN());
    for (int id : tree.trading_nodes())
        out[static_cast<std::size_t>(id)] =
            execution_price(friction, tree.node(id).price, plan.at_node(id)[0]);
    return out;
}

std::vector<double> execution_price_series(const TradingRatePlan& plan, const PathEnsemble& paths,
                                           const FrictionSpec& friction) {
    plan.check_shape_for(paths);
    require(paths.d == 1, ErrorCode::InvalidArgument, "execution prices are defined for d = 1");
    std::vector<double> out(plan.n_paths * plan.n_steps);
    for (std::size_t p = 0; p < plan.n_paths; ++p)
        for (std::size_t k = 0; k < plan.n_steps; ++k)
            out[p * plan.n_steps + k] =
                execution_price(friction, price_of(paths, p, k), plan.at(p, k)[0]);
    return out;
}

TradingRatePlan filter_positive_execution(const TradingRatePlan& plan, const ScenarioTree& tree,
                                          const FrictionSpec& friction) {
    auto prices = execution_price_series(plan, tree, friction);
    TradingRatePlan out = plan;
    for (int id : tree.trading_nodes()) {
        const double ep = prices[static_cast<std::size_t>(id)];
        if (!std::isnan(ep) && ep < 0.0) out.at_node(id).setZero();
    }
    return out;
}

TradingRatePlan filter_positive_execution(const TradingRatePlan& plan, const PathEnsemble& paths,
                                          const FrictionSpec& friction) {
    auto prices = execution_price_series(plan, paths, friction);
    TradingRatePlan out = plan;
    for (std::size_t i = 0; i < prices.size(); ++i)
        if (!std::isnan(prices[i]) && prices[i] < 0.0) out.rates[i].setZero();
    return out;
}

std::vector<double> market_bound(const ScenarioTree& tree, const FrictionSpec& friction) {
    friction.validate();
    std::vector<double> per_node(tree.node_count(), 0.0);
    for (const auto& node : tree.nodes()) {
        if (tree.is_leaf(node.id)) continue;
        const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
        const double g_star = eval_g_star(friction, node.price, -node.price).value;
        for (int child : tree.children(node.id))
            per_node[static_cast<std::size_t>(child)] =
                per_node[static_cast<std::size_t>(node.id)] + g_star * dt;
    }
    std::vector<double> out;
    out.reserve(tree.leaves().size());
    for (int leaf : tree.leaves()) out.push_back(per_node[static_cast<std::size_t>(leaf)]);
    return out;
}

std::vector<double> market_bound(const PathEnsemble& paths, const FrictionSpec& friction) {
    friction.validate();
    std::vector<double> out(paths.n_paths, 0.0);
    for (std::size_t p = 0; p < paths.n_paths; ++p) {
        double b = 0.0;
        for (std::size_t k = 0; k < paths.grid.steps(); ++k) {
            const Eigen::VectorXd s = price_of(paths, p, k);
            b += eval_g_star(friction, s, -s).value * paths.grid.dt(k);
        }
        out[p] = b;
    }
    return out;
}

namespace {

// Both sides of the pathwise bound, after rescaling the horizon to 1:
// u = t/T, rates scale by T, and the floor becomes H T^{1-alpha}.
VolumeBoundReport volume_bound_path(const FrictionSpec& friction, double alpha, double beta,
                                    double horizon,
                                    const std::vector<const Eigen::VectorXd*>& prices,
                                    const std::vector<const Eigen::VectorXd*>& rates,
                                    const std::vector<double>& dts) {
    const double h_scaled = friction.h_floor * std::pow(horizon, 1.0 - alpha);
    const double exp_m = alpha / (alpha - beta);

    double lhs = 0.0, xi = 0.0, m_int = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k) {
        const double du = dts[k] / horizon;
        const Eigen::VectorXd& s = *prices[k];
        const Eigen::VectorXd& phi = *rates[k];
        const Eigen::VectorXd phi_scaled = phi * horizon;
        const double speed = phi_scaled.norm();
        const double weight = 1.0 + s.norm();
        lhs += std::pow(speed * weight, beta) * du;
        xi += (-phi.dot(s) - eval_g(friction, s, phi)) * dts[k];
        m_int += std::pow(std::pow(h_scaled, -beta / alpha) * std::pow(weight, beta), exp_m) * du;
    }
    VolumeBoundReport rep;
    rep.lhs = lhs;
    rep.xi_minus = std::max(-xi, 0.0);
    rep.m = std::pow(m_int, 1.0 / exp_m);
    rep.rhs = rep.xi_minus + std::pow(2.0, beta / (alpha - beta)) * std::pow(rep.m, exp_m) + 1.0;
    rep.ok = rep.lhs <= rep.rhs + 1e-9;
    return rep;
}

double friction_alpha(const FrictionSpec& friction) {
    return friction.kind == FrictionKind::QuadraticImpact ||
                   friction.kind == FrictionKind::MatrixQuadratic
               ? 2.0
               : friction.alpha;
}

}  // namespace

std::vector<VolumeBoundReport> volume_bound_check(const TradingRatePlan& plan,
                                                  const ScenarioTree& tree,
                                                  const FrictionSpec& friction,
                                                  const VolumeBoundParams& params) {
    plan.check_shape_for(tree);
    friction.validate();
    const double alpha = friction_alpha(friction);
    if (!(params.beta > 1.0 && params.beta < alpha))
        raise(ErrorCode::BetaOutOfRange, "volume bound needs 1 < beta < alpha");

    std::vector<VolumeBoundReport> out;
    out.reserve(tree.leaves().size());
    for (int leaf : tree.leaves()) {
        const auto path = tree.path(leaf);
        std::vector<const Eigen::VectorXd*> prices, rates;
        std::vector<double> dts;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            prices.push_back(&tree.node(path[k]).price);
            rates.push_back(&plan.at_node(path[k]));
            dts.push_back(tree.grid().dt(k));
        }
        out.push_back(volume_bound_path(friction, alpha, params.beta, tree.grid().horizon(),
                                        prices, rates, dts));
    }
    return out;
}

std::vector<VolumeBoundReport> volume_bound_check(const TradingRatePlan& plan,
                                                  const PathEnsemble& paths,
                                                  const FrictionSpec& friction,
                                                  const VolumeBoundParams& params) {
    plan.check_shape_for(paths);
    friction.validate();
    const double alpha = friction_alpha(friction);
    if (!(params.beta > 1.0 && params.beta < alpha))
        raise(ErrorCode::BetaOutOfRange, "volume bound needs 1 < beta < alpha");

    std::vector<VolumeBoundReport> out(paths.n_paths);
    for (std::size_t p = 0; p < paths.n_paths; ++p) {
        std::vector<Eigen::VectorXd> price_store;
        price_store.reserve(paths.grid.steps());
        std::vector<const Eigen::VectorXd*> prices, rates;
        std::vector<double> dts;
        for (std::size_t k = 0; k < paths.grid.steps(); ++k) {
            price_store.push_back(price_of(paths, p, k));
            rates.push_back(&plan.at(p, k));
            dts.push_back(paths.grid.dt(k));
        }
        for (const auto& s : price_store) prices.push_back(&s);
        out[p] = volume_bound_path(friction, alpha, params.beta, paths.grid.horizon(), prices,
                                   rates, dts);
    }
    return out;
}

namespace {

void check_cashflow_spec(const FrictionSpec& friction, double cash_rate) {
    if (friction.kind != FrictionKind::QuadraticImpact)
        raise(ErrorCode::InvalidArgument,
              "constant cash-flow plans are defined for QuadraticImpact frictions");
    if (friction.participation_cost != 0.0)
        raise(ErrorCode::InvalidArgument,
              "constant cash-flow identity requires zero participation cost");
    if (cash_rate < 0.0) raise(ErrorCode::InvalidArgument, "cash rate must be nonnegative");
}

// phi = (1/lambda)(sqrt(1 + 2 lambda k / S) - 1), written in the form stable
// as lambda -> 0 (phi -> k/S).
double cashflow_rate(double lambda, double cash_rate, double s) {
    if (s <= 0.0) raise(ErrorCode::InvalidPrice, "constant cash-flow plan needs S > 0");
    const double ratio = 2.0 * lambda * cash_rate / s;
    return (2.0 * cash_rate / s) / (1.0 + std::sqrt(1.0 + ratio));
}

}  // namespace

TradingRatePlan constant_cashflow_plan(const ScenarioTree& tree, const FrictionSpec& friction,
                                       double cash_rate) {
    friction.validate();
    check_cashflow_spec(friction, cash_rate);
    require(tree.asset_count() == 1, ErrorCode::InvalidArgument,
            "constant cash-flow plan is one-dimensional");
    TradingRatePlan plan = TradingRatePlan::zero_for_tree(tree);
    for (int id : tree.trading_nodes())
        plan.at_node(id)[0] = cashflow_rate(friction.lambda_coef, cash_rate,
                                            tree.node(id).price[0]);
    return plan;
}

TradingRatePlan constant_cashflow_plan(const PathEnsemble& paths, const FrictionSpec& friction,
                                       double cash_rate) {
    friction.validate();
    check_cashflow_spec(friction, cash_rate);
    require(paths.d == 1, ErrorCode::InvalidArgument,
            "constant cash-flow plan is one-dimensional");
    TradingRatePlan plan = TradingRatePlan::zero_for_paths(paths);
    for (std::size_t p = 0; p < paths.n_paths; ++p)
        for (std::size_t k = 0; k < plan.n_steps; ++k)
            plan.at(p, k)[0] =
                cashflow_rate(friction.lambda_coef, cash_rate, paths.at(p, k));
    return plan;
}

}  // namespace frictionlab
