#include "frictionlab/utility.hpp"

#include <chrono>
#include <cmath>

#include "optimize.hpp"

namespace frictionlab {

namespace {

void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) raise(code, msg);
}

}  // namespace

UtilitySpec UtilitySpec::exponential(double a) {
    UtilitySpec u;
    u.kind = UtilityKind::Exponential;
    u.a = a;
    u.validate();
    return u;
}

UtilitySpec UtilitySpec::neg_power(double c_coef, double delta, double kink) {
    UtilitySpec u;
    u.kind = UtilityKind::NegPower;
    u.c_coef = c_coef;
    u.delta = delta;
    u.kink = kink;
    u.validate();
    return u;
}

void UtilitySpec::validate() const {
    switch (kind) {
        case UtilityKind::Exponential:
            require(a > 0.0, ErrorCode::InvalidArgument, "exponential utility needs a > 0");
            break;
        case UtilityKind::NegPower:
            require(c_coef > 0.0 && delta > 1.0, ErrorCode::InvalidArgument,
                    "neg-power utility needs C > 0 and delta > 1");
            require(std::isfinite(kink), ErrorCode::InvalidArgument, "kink must be finite");
            break;
    }
}

double UtilitySpec::u(double x) const {
    switch (kind) {
        case UtilityKind::Exponential:
            return -std::exp(std::min(700.0, -a * x));
        case UtilityKind::NegPower:
            return x >= kink ? 0.0 : -c_coef * std::pow(kink - x, delta);
    }
    return 0.0;
}

double UtilitySpec::u_prime(double x) const {
    switch (kind) {
        case UtilityKind::Exponential:
            return a * std::exp(std::min(700.0, -a * x));
        case UtilityKind::NegPower:
            return x >= kink ? 0.0 : c_coef * delta * std::pow(kink - x, delta - 1.0);
    }
    return 0.0;
}

double UtilitySpec::u_conj(double y) const {
    require(y > 0.0, ErrorCode::InvalidArgument, "conjugate defined for y > 0");
    switch (kind) {
        case UtilityKind::Exponential:
            return (y / a) * (std::log(y / a) - 1.0);
        case UtilityKind::NegPower: {
            const double r = std::pow(y / (c_coef * delta), 1.0 / (delta - 1.0));
            return -c_coef * std::pow(r, delta) + r * y - kink * y;
        }
    }
    return 0.0;
}

namespace {

struct UtilityProblem {
    const ScenarioTree& tree;
    double cash;
    const std::vector<double>& endowment;
    const UtilitySpec& utility;
    const FrictionSpec& friction;
    std::vector<int> var_of_node;
    int n_nodes = 0;
    int d = 0;

    UtilityProblem(const ScenarioTree& t, double c, const std::vector<double>& w,
                   const UtilitySpec& u, const FrictionSpec& f)
        : tree(t), cash(c), endowment(w), utility(u), friction(f), d(t.asset_count()) {
        var_of_node.assign(t.node_count(), -1);
        for (int id : t.trading_nodes()) var_of_node[static_cast<std::size_t>(id)] = n_nodes++;
    }

    int n_vars() const { return n_nodes * d; }

    TradingRatePlan plan_of(const Eigen::VectorXd& x) const {
        TradingRatePlan plan = TradingRatePlan::zero_for_tree(tree);
        for (int id : tree.trading_nodes())
            plan.at_node(id) = x.segment(var_of_node[static_cast<std::size_t>(id)] * d, d);
        return plan;
    }

    // Terminal cash per leaf, via a forward pass over nodes.
    void terminal_cash(const Eigen::VectorXd& x, std::vector<double>& v0) const {
        v0.assign(tree.node_count(), 0.0);
        v0[0] = cash;
        for (const auto& node : tree.nodes()) {
            if (tree.is_leaf(node.id)) continue;
            const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
            const Eigen::VectorXd phi =
                x.segment(var_of_node[static_cast<std::size_t>(node.id)] * d, d);
            const double cost = (phi.dot(node.price) + eval_g(friction, node.price, phi)) * dt;
            for (int child : tree.children(node.id))
                v0[static_cast<std::size_t>(child)] = v0[static_cast<std::size_t>(node.id)] - cost;
        }
    }

    // E U(V0_T + W) and its gradient in the stacked rates.
    double eval(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
        std::vector<double> v0;
        terminal_cash(x, v0);
        double value = 0.0;
        std::vector<double> marg(tree.node_count(), 0.0);  // subtree sum of p * U'
        for (int leaf : tree.leaves()) {
            const auto li = static_cast<std::size_t>(leaf);
            const double wu = v0[li] + endowment[li];
            value += tree.prob(leaf) * utility.u(wu);
            if (grad) marg[li] = tree.prob(leaf) * utility.u_prime(wu);
        }
        if (grad) {
            for (std::size_t i = tree.node_count(); i-- > 0;) {
                const int id = static_cast<int>(i);
                if (tree.is_leaf(id)) continue;
                for (int child : tree.children(id)) marg[i] += marg[static_cast<std::size_t>(child)];
            }
            grad->setZero(n_vars());
            for (int id : tree.trading_nodes()) {
                const auto& node = tree.node(id);
                const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
                const Eigen::VectorXd phi =
                    x.segment(var_of_node[static_cast<std::size_t>(id)] * d, d);
                grad->segment(var_of_node[static_cast<std::size_t>(id)] * d, d) =
                    -marg[static_cast<std::size_t>(id)] * dt *
                    (node.price + eval_g_prime(friction, node.price, phi));
            }
        }
        return value;
    }

    // Rows (leaf, asset): terminal asset positions as a linear map of rates.
    Eigen::MatrixXd flatness_matrix() const {
        const auto& leaves = tree.leaves();
        Eigen::MatrixXd A =
            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(leaves.size()) * d, n_vars());
        for (std::size_t li = 0; li < leaves.size(); ++li) {
            for (int id : tree.path(leaves[li])) {
                if (tree.is_leaf(id)) continue;
                const double dt = tree.grid().dt(static_cast<std::size_t>(tree.node(id).k));
                for (int i = 0; i < d; ++i)
                    A(static_cast<Eigen::Index>(li) * d + i,
                      var_of_node[static_cast<std::size_t>(id)] * d + i) = dt;
            }
        }
        return A;
    }
};

void check_endowment(const ScenarioTree& tree, const std::vector<double>& endowment) {
    require(endowment.size() == tree.node_count(), ErrorCode::ShapeMismatch,
            "endowment must carry one value per node (leaves used)");
    for (int leaf : tree.leaves())
        require(std::isfinite(endowment[static_cast<std::size_t>(leaf)]),
                ErrorCode::InvalidArgument, "endowment must be bounded");
}

}  // namespace

double utility_objective(const ScenarioTree& tree, double cash,
                         const std::vector<double>& endowment, const UtilitySpec& utility,
                         const FrictionSpec& friction, const TradingRatePlan& plan) {
    plan.check_shape_for(tree);
    check_endowment(tree, endowment);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(tree.asset_count() + 1);
    z[0] = cash;
    const WealthGrid wealth = roll_forward(tree, z, plan, friction);
    double value = 0.0;
    for (int leaf : tree.leaves()) {
        const auto li = static_cast<std::size_t>(leaf);
        value += tree.prob(leaf) * utility.u(wealth.cash[li] + endowment[li]);
    }
    return value;
}

SolveReport maximize_utility(const ScenarioTree& tree, double cash,
                             const std::vector<double>& endowment, const UtilitySpec& utility,
                             const FrictionSpec& friction, const SolverConfig& cfg,
                             ConstraintClass constraint) {
    const auto t0 = std::chrono::steady_clock::now();
    utility.validate();
    friction.validate();
    require(friction.differentiable(), ErrorCode::NotDifferentiable,
            "utility maximization needs a differentiable friction");
    check_endowment(tree, endowment);

    UtilityProblem prob(tree, cash, endowment, utility, friction);
    SolveReport report;

    if (constraint == ConstraintClass::TerminalFlat) {
        const Eigen::MatrixXd A = prob.flatness_matrix();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        lu.setThreshold(1e-12);
        const Eigen::Index null_dim = lu.dimensionOfKernel();
        if (null_dim == 0) {
            // only the zero plan is terminal-flat (e.g. a single trading date)
            report.plan = TradingRatePlan::zero_for_tree(tree);
            report.primal_value = utility_objective(tree, cash, endowment, utility, friction,
                                                    report.plan);
            report.status = SolveStatus::Success;
            report.wall_time =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return report;
        }
        const Eigen::MatrixXd N = lu.kernel();
        auto fg = [&](const Eigen::VectorXd& xi, Eigen::VectorXd& grad) {
            Eigen::VectorXd gfull;
            const double value = prob.eval(N * xi, &gfull);
            grad = -(N.transpose() * gfull);
            return -value;
        };
        detail::LbfgsOptions opts;
        opts.max_iter = cfg.max_iter;
        opts.grad_tol = std::min(1e-10, cfg.gap_tol);
        auto sol = detail::lbfgs_minimize(fg, Eigen::VectorXd::Zero(null_dim), opts);
        report.plan = prob.plan_of(N * sol.x);
        report.primal_value = -sol.f;
        report.iterations = sol.iterations;
        report.kkt.stationarity = sol.grad_norm;
        report.status = sol.converged ? SolveStatus::Success : SolveStatus::MaxIterations;
    } else {
        // terminal assets >= 0: method of multipliers on -objective
        const Eigen::MatrixXd A = prob.flatness_matrix();
        const int n_cons = static_cast<int>(A.rows());
        auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
            Eigen::VectorXd gfull;
            const double value = prob.eval(x, &gfull);
            grad = -gfull;
            return -value;
        };
        auto constraints = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) { g = -(A * x); };
        auto constraints_jtw = [&](const Eigen::VectorXd&, const Eigen::VectorXd& w,
                                   Eigen::VectorXd& jtw) { jtw = -(A.transpose() * w); };
        detail::AugLagOptions al;
        al.feas_tol = std::min(cfg.feas_tol, 1e-10);
        al.inner.max_iter = 600;
        al.inner.grad_tol = 1e-12;
        auto sol = detail::auglag_minimize(objective, constraints, constraints_jtw, n_cons,
                                           Eigen::VectorXd::Zero(prob.n_vars()), al);
        report.plan = prob.plan_of(sol.x);
        report.primal_value = -sol.f;
        report.iterations = sol.inner_iterations;
        report.kkt.feasibility = sol.feasibility;
        report.status = sol.converged ? SolveStatus::Success : SolveStatus::MaxIterations;
    }
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

namespace {

// Conditional density process D_n = E[dQ/dP | node] and Q-conditional child
// probabilities q_c * D_c / D_n.
std::vector<double> density_process(const ScenarioTree& tree, const std::vector<double>& q_leaf) {
    std::vector<double> density(tree.node_count(), 0.0);
    for (std::size_t i = 0; i < tree.leaves().size(); ++i)
        density[static_cast<std::size_t>(tree.leaves()[i])] = q_leaf[i];
    for (std::size_t i = tree.node_count(); i-- > 0;) {
        const int id = static_cast<int>(i);
        if (tree.is_leaf(id)) continue;
        double acc = 0.0;
        for (int child : tree.children(id))
            acc += tree.node(child).q * density[static_cast<std::size_t>(child)];
        density[i] = acc;
    }
    return density;
}

double shadow_martingale_residual(const ScenarioTree& tree,
                                  const std::vector<Eigen::VectorXd>& shadow,
                                  const std::vector<double>& density) {
    const int last_trading_k = static_cast<int>(tree.grid().steps()) - 1;
    double worst = 0.0;
    for (int id : tree.trading_nodes()) {
        const auto& node = tree.node(id);
        if (node.k >= last_trading_k) continue;  // children are leaves, no shadow there
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(tree.asset_count());
        for (int child : tree.children(id)) {
            const double qw = tree.node(child).q * density[static_cast<std::size_t>(child)] /
                              density[static_cast<std::size_t>(id)];
            acc += qw * shadow[static_cast<std::size_t>(child)];
        }
        worst = std::max(worst,
                         (acc - shadow[static_cast<std::size_t>(id)]).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

}  // namespace

FocReport verify_foc(const ScenarioTree& tree, const TradingRatePlan& plan, double cash,
                     const std::vector<double>& endowment, const UtilitySpec& utility,
                     const FrictionSpec& friction, double tol) {
    plan.check_shape_for(tree);
    check_endowment(tree, endowment);
    require(friction.differentiable(), ErrorCode::NotDifferentiable,
            "FOC verification needs a differentiable friction");

    Eigen::VectorXd z = Eigen::VectorXd::Zero(tree.asset_count() + 1);
    z[0] = cash;
    const WealthGrid wealth = roll_forward(tree, z, plan, friction);
    for (int leaf : tree.leaves())
        if (wealth.assets[static_cast<std::size_t>(leaf)].lpNorm<Eigen::Infinity>() > 1e-8)
            raise(ErrorCode::PlanNotFlat, "plan does not end with zero asset positions");

    FocReport rep;
    const auto& leaves = tree.leaves();
    std::vector<double> uprime(leaves.size());
    double y_star = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        const auto li = static_cast<std::size_t>(leaves[i]);
        uprime[i] = utility.u_prime(wealth.cash[li] + endowment[li]);
        y_star += tree.prob(leaves[i]) * uprime[i];
    }
    require(y_star > 0.0, ErrorCode::InvariantViolation,
            "marginal utility vanished; cannot normalize the density");
    rep.y_star = y_star;
    rep.q_density.resize(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) rep.q_density[i] = uprime[i] / y_star;

    rep.shadow_price.assign(tree.node_count(), Eigen::VectorXd::Zero(tree.asset_count()));
    for (int id : tree.trading_nodes()) {
        const auto& node = tree.node(id);
        rep.shadow_price[static_cast<std::size_t>(id)] =
            node.price + eval_g_prime(friction, node.price, plan.at_node(id));
    }

    const auto density = density_process(tree, rep.q_density);
    rep.martingale_residual = shadow_martingale_residual(tree, rep.shadow_price, density);

    double orth = 0.0;
    for (int id : tree.trading_nodes()) {
        const auto& node = tree.node(id);
        const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
        orth += tree.prob(id) * density[static_cast<std::size_t>(id)] *
                plan.at_node(id).dot(rep.shadow_price[static_cast<std::size_t>(id)]) * dt;
    }
    rep.orthogonality_residual = std::abs(orth);

    rep.duality_gap_bound = duality_gap_bound(tree, cash, endowment, utility, friction,
                                              rep.q_density, rep.shadow_price, plan,
                                              std::max(tol, rep.martingale_residual * 2.0));
    rep.optimal_certified =
        rep.martingale_residual <= tol && rep.orthogonality_residual <= tol;

    // Eq-luk metadata: exponent pair for the declared lower bound.
    if (utility.kind == UtilityKind::Exponential) {
        rep.luk_delta = 2.0;
        rep.luk_c = utility.a * utility.a * std::exp(2.0) / 4.0;
    } else {
        rep.luk_delta = utility.delta;
        rep.luk_c = utility.c_coef;
    }
    rep.luk_eta = rep.luk_delta / (rep.luk_delta - 1.0);
    return rep;
}

double duality_gap_bound(const ScenarioTree& tree, double cash,
                         const std::vector<double>& endowment, const UtilitySpec& utility,
                         const FrictionSpec& friction, const std::vector<double>& q_density,
                         const std::vector<Eigen::VectorXd>& shadow_price,
                         const TradingRatePlan& plan, double martingale_tol) {
    check_endowment(tree, endowment);
    const auto& leaves = tree.leaves();
    require(q_density.size() == leaves.size(), ErrorCode::ShapeMismatch,
            "density must carry one value per leaf");
    double mean = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (!(q_density[i] > 0.0))
            raise(ErrorCode::InvalidArgument, "density values must be strictly positive");
        mean += tree.prob(leaves[i]) * q_density[i];
    }
    if (std::abs(mean - 1.0) > 1e-10)
        raise(ErrorCode::InvalidArgument, "density must have unit expectation");
    require(shadow_price.size() == tree.node_count(), ErrorCode::ShapeMismatch,
            "shadow price must carry one vector per node");

    const auto density = density_process(tree, q_density);
    if (shadow_martingale_residual(tree, shadow_price, density) > martingale_tol)
        raise(ErrorCode::CertificateInvalid, "shadow price is not a Q-martingale within tol");

    // Per-leaf penalty int G*(Z - S) dt along the path.
    std::vector<double> path_pen(tree.node_count(), 0.0);
    for (const auto& node : tree.nodes()) {
        if (tree.is_leaf(node.id)) continue;
        const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
        const double pen =
            eval_g_star(friction, node.price,
                        shadow_price[static_cast<std::size_t>(node.id)] - node.price)
                .value *
            dt;
        for (int child : tree.children(node.id))
            path_pen[static_cast<std::size_t>(child)] =
                path_pen[static_cast<std::size_t>(node.id)] + pen;
    }

    const double achieved =
        utility_objective(tree, cash, endowment, utility, friction, plan);

    // E_Q[int G*(Z-S) dt + W] under the density, plus the conjugate term.
    double eq_term = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        const auto li = static_cast<std::size_t>(leaves[i]);
        eq_term += tree.prob(leaves[i]) * q_density[i] * (path_pen[li] + endowment[li]);
    }
    Eigen::VectorXd zvec = Eigen::VectorXd::Zero(tree.asset_count() + 1);
    zvec[0] = cash;
    const WealthGrid wealth = roll_forward(tree, zvec, plan, friction);
    double y_center = 0.0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        const auto li = static_cast<std::size_t>(leaves[i]);
        y_center += tree.prob(leaves[i]) *
                    utility.u_prime(wealth.cash[li] + endowment[li]);
    }
    y_center = std::max(y_center, 1e-300);

    auto bound_at = [&](double y) {
        double b = y * (eq_term + cash);
        for (std::size_t i = 0; i < leaves.size(); ++i)
            b += tree.prob(leaves[i]) * utility.u_conj(y * q_density[i]);
        return b;
    };
    double best = bound_at(y_center);
    for (int k = -40; k <= 40; ++k) {
        const double y = y_center * std::pow(10.0, static_cast<double>(k) / 20.0);
        best = std::min(best, bound_at(y));
    }
    return best - achieved;
}

}  // namespace frictionlab
