#include "frictionlab/superhedge.hpp"

#include <chrono>
#include <cmath>

#include "optimize.hpp"

namespace frictionlab {

namespace {

void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) raise(code, msg);
}

constexpr double kDegenerate = 1e-14;

}  // namespace

const char* solve_status_name(SolveStatus status) {
    switch (status) {
        case SolveStatus::Success: return "success";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::MaxIterations: return "max_iterations";
    }
    return "?";
}

Claim Claim::zero(const ScenarioTree& tree) {
    Claim c;
    c.by_node.assign(tree.node_count(), Eigen::VectorXd::Zero(tree.asset_count() + 1));
    return c;
}

Claim Claim::cash_only(const ScenarioTree& tree, const std::vector<double>& leaf_cash) {
    require(leaf_cash.size() == tree.leaves().size(), ErrorCode::ShapeMismatch,
            "one cash value per leaf expected");
    Claim c = zero(tree);
    for (std::size_t i = 0; i < leaf_cash.size(); ++i)
        c.at(tree.leaves()[i])[0] = leaf_cash[i];
    return c;
}

void Claim::check_shape_for(const ScenarioTree& tree) const {
    require(by_node.size() == tree.node_count(), ErrorCode::ShapeMismatch,
            "claim must carry one vector per node");
    for (int leaf : tree.leaves()) {
        const auto& w = at(leaf);
        require(w.size() == tree.asset_count() + 1, ErrorCode::ShapeMismatch,
                "claim vectors must have d+1 components");
        require(w.allFinite(), ErrorCode::InvalidArgument, "claim must be finite");
    }
}

MartingaleCertificate MartingaleCertificate::from_leaf_values(
    const ScenarioTree& tree, const std::vector<Eigen::VectorXd>& leaf_z) {
    require(leaf_z.size() == tree.leaves().size(), ErrorCode::ShapeMismatch,
            "one leaf value per leaf expected");
    MartingaleCertificate cert;
    cert.z.assign(tree.node_count(), Eigen::VectorXd::Zero(tree.asset_count() + 1));
    for (std::size_t i = 0; i < leaf_z.size(); ++i)
        cert.z[static_cast<std::size_t>(tree.leaves()[i])] = leaf_z[i];
    // backward conditional expectations, children carry larger ids
    for (std::size_t i = tree.node_count(); i-- > 0;) {
        const int id = static_cast<int>(i);
        if (tree.is_leaf(id)) continue;
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(tree.asset_count() + 1);
        for (int child : tree.children(id))
            acc += tree.node(child).q * cert.z[static_cast<std::size_t>(child)];
        cert.z[i] = acc;
    }
    return cert;
}

MartingaleCertificate MartingaleCertificate::frictionless_consistent(const ScenarioTree& tree) {
    std::vector<Eigen::VectorXd> leaf_z;
    leaf_z.reserve(tree.leaves().size());
    for (int leaf : tree.leaves()) {
        Eigen::VectorXd z(tree.asset_count() + 1);
        z[0] = 1.0;
        z.tail(tree.asset_count()) = tree.node(leaf).price;
        leaf_z.push_back(std::move(z));
    }
    return from_leaf_values(tree, leaf_z);
}

double MartingaleCertificate::martingale_residual(const ScenarioTree& tree) const {
    double worst = 0.0;
    for (const auto& node : tree.nodes()) {
        if (tree.is_leaf(node.id)) continue;
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(tree.asset_count() + 1);
        for (int child : tree.children(node.id))
            acc += tree.node(child).q * z[static_cast<std::size_t>(child)];
        worst = std::max(worst, (acc - z[static_cast<std::size_t>(node.id)]).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

void MartingaleCertificate::validate(const ScenarioTree& tree, double tol) const {
    require(z.size() == tree.node_count(), ErrorCode::CertificateInvalid,
            "certificate must carry one vector per node");
    double scale = 1.0;
    for (const auto& v : z) {
        require(v.size() == tree.asset_count() + 1, ErrorCode::CertificateInvalid,
                "certificate vectors must have d+1 components");
        require(v.allFinite(), ErrorCode::CertificateInvalid, "certificate must be finite");
        scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
        if (v.minCoeff() < -tol * scale)
            raise(ErrorCode::CertificateInvalid, "certificate must be nonnegative");
    }
    // Z^i = 0 on {Z^0 = 0} is needed at trading dates, where the penalty's
    // perspective convention reads the ratio; terminal values are free.
    for (int id : tree.trading_nodes()) {
        const auto& v = z[static_cast<std::size_t>(id)];
        if (v[0] <= kDegenerate * scale &&
            v.tail(v.size() - 1).lpNorm<Eigen::Infinity>() > tol * scale)
            raise(ErrorCode::CertificateInvalid,
                  "asset components must vanish where the cash component does");
    }
    if (std::abs(z[0][0] - 1.0) > tol * scale)
        raise(ErrorCode::CertificateInvalid, "certificate must be normalized to Z0_root = 1");
    if (martingale_residual(tree) > tol * scale)
        raise(ErrorCode::CertificateInvalid, "certificate is not a martingale");
}

namespace {

// Perspective penalty z0 * G*(ztilde/z0 - S) at one trading node, with the
// closure value 0 at (z0, ztilde) = 0, and its gradient in (z0, ztilde).
// Below the cash floor the ratio is read at the floor, which acts as a steep
// barrier against ztilde > 0 with z0 = 0 (an invalid trading-date state).
double perspective_penalty(const FrictionSpec& friction, const Eigen::VectorXd& s,
                           const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    const auto d = s.size();
    const double z0 = z[0];
    if (z0 <= kDegenerate && z.tail(d).lpNorm<Eigen::Infinity>() <= kDegenerate) {
        if (grad) grad->setZero(d + 1);
        return 0.0;
    }
    const double z0_eff = std::max(z0, kDegenerate);
    const Eigen::VectorXd u = z.tail(d) / z0_eff - s;
    const DualEval dual = eval_g_star(friction, s, u);
    if (grad) {
        grad->resize(d + 1);
        (*grad)[0] = z0 > kDegenerate ? dual.value - dual.argsup.dot(u) : 0.0;
        grad->tail(d) = dual.argsup;
    }
    return z0_eff * dual.value;
}

}  // namespace

double certificate_penalty(const ScenarioTree& tree, const MartingaleCertificate& cert,
                           const FrictionSpec& friction) {
    double total = 0.0;
    for (int id : tree.trading_nodes()) {
        const auto& node = tree.node(id);
        const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
        total += tree.prob(id) * dt *
                 perspective_penalty(friction, node.price, cert.at(id), nullptr);
    }
    return total;
}

double dual_value(const ScenarioTree& tree, const MartingaleCertificate& cert,
                  const Claim& claim, const FrictionSpec& friction) {
    claim.check_shape_for(tree);
    cert.validate(tree, 1e-8);
    double terminal = 0.0;
    for (int leaf : tree.leaves()) terminal += tree.prob(leaf) * cert.at(leaf).dot(claim.at(leaf));
    return terminal - certificate_penalty(tree, cert, friction);
}

// ---------------------------------------------------------------------------
// Dual ascent over leaf values.

namespace {

struct DualProblem {
    const ScenarioTree& tree;
    const Claim& claim;
    const FrictionSpec& friction;

    std::size_t n_leaves() const { return tree.leaves().size(); }

    MartingaleCertificate cert(const std::vector<Eigen::VectorXd>& y) const {
        return MartingaleCertificate::from_leaf_values(tree, y);
    }

    // Objective and gradient w.r.t. the leaf values.
    double eval(const std::vector<Eigen::VectorXd>& y, std::vector<Eigen::VectorXd>* grad) const {
        const auto d = tree.asset_count();
        MartingaleCertificate c = cert(y);
        double value = 0.0;
        std::vector<Eigen::VectorXd> acc;  // per node: sum of dt * grad psi над ancestors
        if (grad) acc.assign(tree.node_count(), Eigen::VectorXd::Zero(d + 1));
        std::vector<Eigen::VectorXd> psi_grad(grad ? tree.node_count() : 0);

        for (int id : tree.trading_nodes()) {
            const auto& node = tree.node(id);
            const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
            Eigen::VectorXd g;
            const double pen =
                perspective_penalty(friction, node.price, c.at(id), grad ? &g : nullptr);
            value -= tree.prob(id) * dt * pen;
            if (grad) psi_grad[static_cast<std::size_t>(id)] = dt * g;
        }
        if (grad) {
            for (const auto& node : tree.nodes()) {
                if (tree.is_leaf(node.id)) continue;
                const auto& base = acc[static_cast<std::size_t>(node.id)];
                for (int child : tree.children(node.id))
                    acc[static_cast<std::size_t>(child)] =
                        base + psi_grad[static_cast<std::size_t>(node.id)];
            }
            grad->assign(n_leaves(), Eigen::VectorXd());
        }
        for (std::size_t i = 0; i < n_leaves(); ++i) {
            const int leaf = tree.leaves()[i];
            const double p = tree.prob(leaf);
            value += p * y[i].dot(claim.at(leaf));
            if (grad) (*grad)[i] = p * (claim.at(leaf) - acc[static_cast<std::size_t>(leaf)]);
        }
        return value;
    }

    // Clamp to the orthant and rescale so Z0 at the root equals one. Leaf
    // asset values may stay positive with zero leaf cash; the penalty floor
    // keeps trading dates away from the invalid ratio.
    bool project(std::vector<Eigen::VectorXd>& y) const {
        double norm = 0.0;
        for (std::size_t i = 0; i < n_leaves(); ++i) {
            y[i] = y[i].cwiseMax(0.0);
            norm += tree.prob(tree.leaves()[i]) * y[i][0];
        }
        if (!(norm > kDegenerate)) return false;
        for (auto& v : y) v /= norm;
        return true;
    }
};

std::vector<Eigen::VectorXd> leaf_values_of(const ScenarioTree& tree,
                                            const MartingaleCertificate& cert) {
    std::vector<Eigen::VectorXd> y;
    y.reserve(tree.leaves().size());
    for (int leaf : tree.leaves()) y.push_back(cert.at(leaf));
    return y;
}

double stack_dot(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
    return s;
}

}  // namespace

std::pair<MartingaleCertificate, double> maximize_dual(
    const ScenarioTree& tree, const Claim& claim, const FrictionSpec& friction,
    const SolverConfig& cfg, const std::optional<MartingaleCertificate>& warm) {
    claim.check_shape_for(tree);
    friction.validate();
    DualProblem prob{tree, claim, friction};

    std::vector<Eigen::VectorXd> y = leaf_values_of(
        tree, warm ? *warm : MartingaleCertificate::frictionless_consistent(tree));
    if (!prob.project(y)) y = leaf_values_of(tree, MartingaleCertificate::frictionless_consistent(tree));

    std::vector<Eigen::VectorXd> grad;
    double value = prob.eval(y, &grad);
    auto best_y = y;
    double best_value = value;

    // The rescale projection kills any gradient component normal to the
    // normalization constraint sum_l p_l y_l[0] = 1; remove it up front so
    // steps move along the constraint surface.
    double a_norm2 = 0.0;
    for (int leaf : tree.leaves()) a_norm2 += tree.prob(leaf) * tree.prob(leaf);
    auto tangentialize = [&](std::vector<Eigen::VectorXd>& g) {
        double a_dot = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            a_dot += tree.prob(tree.leaves()[i]) * g[i][0];
        const double shift = a_dot / a_norm2;
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i][0] -= shift * tree.prob(tree.leaves()[i]);
    };
    tangentialize(grad);

    double step = 1.0;
    const double scale = 1.0 + std::abs(value);
    for (int it = 0; it < cfg.max_iter; ++it) {
        bool moved = false;
        std::vector<Eigen::VectorXd> cand;
        double cand_value = value;
        for (int bt = 0; bt < 60; ++bt) {
            cand = y;
            for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += step * grad[i];
            if (!prob.project(cand)) {
                step *= 0.5;
                continue;
            }
            cand_value = prob.eval(cand, nullptr);
            // Armijo along the projected direction
            std::vector<Eigen::VectorXd> diff = cand;
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= y[i];
            const double gain = stack_dot(grad, diff);
            if (cand_value >= value + 1e-4 * gain - 1e-16 * scale && cand_value > value - 1e-16 * scale) {
                moved = true;
                break;
            }
            step *= 0.5;
            if (step < 1e-18) break;
        }
        if (!moved) break;
        double move = 0.0;
        for (std::size_t i = 0; i < cand.size(); ++i)
            move = std::max(move, (cand[i] - y[i]).lpNorm<Eigen::Infinity>());
        y = std::move(cand);
        value = prob.eval(y, &grad);
        tangentialize(grad);
        if (value > best_value) {
            best_value = value;
            best_y = y;
        }
        step *= 1.5;
        if (move <= 1e-14 * scale) break;
        if (best_value > cfg.unbounded_ceiling) break;
    }
    return {prob.cert(best_y), best_value};
}

// ---------------------------------------------------------------------------
// Primal: augmented Lagrangian over (c, rates).

namespace {

struct PrimalLayout {
    const ScenarioTree& tree;
    std::vector<int> var_of_node;  // trading node id -> variable block
    int n_nodes = 0;
    int d = 0;

    explicit PrimalLayout(const ScenarioTree& t) : tree(t), d(t.asset_count()) {
        var_of_node.assign(t.node_count(), -1);
        for (int id : t.trading_nodes()) var_of_node[static_cast<std::size_t>(id)] = n_nodes++;
    }

    int n_vars() const { return 1 + n_nodes * d; }

    Eigen::VectorXd rate_of(const Eigen::VectorXd& x, int node_id) const {
        const int v = var_of_node[static_cast<std::size_t>(node_id)];
        return x.segment(1 + v * d, d);
    }

    TradingRatePlan plan_of(const Eigen::VectorXd& x) const {
        TradingRatePlan plan = TradingRatePlan::zero_for_tree(tree);
        for (int id : tree.trading_nodes()) plan.at_node(id) = rate_of(x, id);
        return plan;
    }
};

}  // namespace

SolveReport superhedge_price(const ScenarioTree& tree, const Claim& claim,
                             const FrictionSpec& friction, const SolverConfig& cfg,
                             const Eigen::VectorXd& z_assets_in) {
    const auto t0 = std::chrono::steady_clock::now();
    claim.check_shape_for(tree);
    friction.validate();
    const int d = tree.asset_count();
    Eigen::VectorXd z_assets = z_assets_in.size() == 0 ? Eigen::VectorXd::Zero(d) : z_assets_in;
    require(z_assets.size() == d, ErrorCode::ShapeMismatch,
            "asset endowment must have d components");

    PrimalLayout layout(tree);
    const auto& leaves = tree.leaves();
    const std::size_t n_leaves = leaves.size();
    const int n_cons = static_cast<int>(n_leaves) * (d + 1);

    std::vector<std::vector<int>> leaf_paths(n_leaves);
    for (std::size_t li = 0; li < n_leaves; ++li) leaf_paths[li] = tree.path(leaves[li]);

    // Per-x cache of node costs and cost gradients.
    struct NodeEval {
        double cost_dt = 0.0;           // (phi.S + G(phi)) dt
        Eigen::VectorXd grad_cost_dt;   // (S + G'(phi)) dt
    };
    std::vector<NodeEval> node_eval(tree.node_count());

    auto refresh = [&](const Eigen::VectorXd& x) {
        for (int id : tree.trading_nodes()) {
            const auto& node = tree.node(id);
            const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
            const Eigen::VectorXd phi = layout.rate_of(x, id);
            auto& ev = node_eval[static_cast<std::size_t>(id)];
            ev.cost_dt = (phi.dot(node.price) + eval_g(friction, node.price, phi)) * dt;
            ev.grad_cost_dt = (node.price + eval_g_prime(friction, node.price, phi)) * dt;
        }
    };

    // g layout per leaf: [cash, asset_1..asset_d]; cash: W0 - c + sum cost_dt;
    // assets: W_i - z_i - sum phi_i dt.
    auto constraints = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        refresh(x);
        g.resize(n_cons);
        for (std::size_t li = 0; li < n_leaves; ++li) {
            const int leaf = leaves[li];
            double cash = -x[0];
            Eigen::VectorXd assets = -z_assets;
            for (int id : leaf_paths[li]) {
                if (tree.is_leaf(id)) continue;
                const auto& node = tree.node(id);
                const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
                cash += node_eval[static_cast<std::size_t>(id)].cost_dt;
                assets -= layout.rate_of(x, id) * dt;
            }
            const auto& w = claim.at(leaf);
            g[static_cast<int>(li) * (d + 1)] = w[0] + cash;
            g.segment(static_cast<int>(li) * (d + 1) + 1, d) = w.tail(d) + assets;
        }
    };

    auto constraints_jtw = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                               Eigen::VectorXd& jtw) {
        refresh(x);
        jtw.setZero(x.size());
        // bottom-up accumulation of leaf multipliers onto nodes
        std::vector<double> w_cash(tree.node_count(), 0.0);
        std::vector<Eigen::VectorXd> w_assets(tree.node_count(), Eigen::VectorXd::Zero(d));
        for (std::size_t li = 0; li < n_leaves; ++li) {
            const int leaf = leaves[li];
            w_cash[static_cast<std::size_t>(leaf)] = w[static_cast<int>(li) * (d + 1)];
            w_assets[static_cast<std::size_t>(leaf)] =
                w.segment(static_cast<int>(li) * (d + 1) + 1, d);
        }
        for (std::size_t i = tree.node_count(); i-- > 0;) {
            const int id = static_cast<int>(i);
            if (tree.is_leaf(id)) continue;
            for (int child : tree.children(id)) {
                w_cash[i] += w_cash[static_cast<std::size_t>(child)];
                w_assets[i] += w_assets[static_cast<std::size_t>(child)];
            }
        }
        jtw[0] = -w_cash[0];
        for (int id : tree.trading_nodes()) {
            const int v = layout.var_of_node[static_cast<std::size_t>(id)];
            const auto& node = tree.node(id);
            const double dt = tree.grid().dt(static_cast<std::size_t>(node.k));
            jtw.segment(1 + v * d, d) =
                w_cash[static_cast<std::size_t>(id)] *
                    node_eval[static_cast<std::size_t>(id)].grad_cost_dt -
                w_assets[static_cast<std::size_t>(id)] * dt;
        }
    };

    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        grad.setZero(x.size());
        grad[0] = 1.0;
        return x[0];
    };

    // warm start: zero plan, cash covering claim cash at zero trading
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(layout.n_vars());
    double c0 = 0.0;
    for (int leaf : leaves) c0 = std::max(c0, claim.at(leaf)[0]);
    x0[0] = c0;

    detail::AugLagOptions al;
    al.feas_tol = std::min(cfg.feas_tol, 1e-9);
    al.inner.max_iter = 1500;
    al.inner.grad_tol = 1e-12;
    auto sol = detail::auglag_minimize(objective, constraints, constraints_jtw, n_cons, x0, al);

    SolveReport report;
    report.plan = layout.plan_of(sol.x);
    report.primal_value = sol.x[0];
    report.kkt.feasibility = sol.feasibility;
    report.iterations = sol.inner_iterations;

    // KKT multipliers induce the dual certificate: Z_T(leaf) = lambda / p.
    std::vector<Eigen::VectorXd> leaf_z(n_leaves);
    for (std::size_t li = 0; li < n_leaves; ++li) {
        const double p = tree.prob(leaves[li]);
        Eigen::VectorXd zl(d + 1);
        zl[0] = sol.multipliers[static_cast<int>(li) * (d + 1)] / p;
        zl.tail(d) = sol.multipliers.segment(static_cast<int>(li) * (d + 1) + 1, d) / p;
        leaf_z[li] = zl.cwiseMax(0.0);
    }
    // normalize and polish with the projected dual ascent
    double norm = 0.0;
    for (std::size_t li = 0; li < n_leaves; ++li) norm += tree.prob(leaves[li]) * leaf_z[li][0];
    std::optional<MartingaleCertificate> warm;
    if (norm > kDegenerate) {
        for (auto& zl : leaf_z) zl /= norm;
        warm = MartingaleCertificate::from_leaf_values(tree, leaf_z);
    }
    SolverConfig polish_cfg = cfg;
    polish_cfg.max_iter = std::max(200, cfg.max_iter / 10);
    auto [cert, dual] = maximize_dual(tree, claim, friction, polish_cfg, warm);
    report.certificate = cert;
    report.dual_value = dual;
    report.duality_gap = report.primal_value - report.dual_value;
    report.kkt.martingale = cert.martingale_residual(tree);

    // stationarity: Z0 (S + G'(phi)) - Ztilde at trading nodes
    double stat = 0.0;
    double comp = 0.0;
    for (int id : tree.trading_nodes()) {
        const auto& node = tree.node(id);
        const auto& zc = cert.at(id);
        if (zc[0] <= kDegenerate) continue;
        const Eigen::VectorXd phi = report.plan.at_node(id);
        const Eigen::VectorXd shadow =
            node.price + eval_g_prime(friction, node.price, phi);
        stat = std::max(stat, (zc[0] * shadow - zc.tail(d)).lpNorm<Eigen::Infinity>());
    }
    Eigen::VectorXd gvals(n_cons);
    constraints(sol.x, gvals);
    for (int j = 0; j < n_cons; ++j)
        comp = std::max(comp, std::abs(sol.multipliers[j] * gvals[j]));
    report.kkt.stationarity = stat;
    report.kkt.complementarity = comp;

    if (report.dual_value > cfg.unbounded_ceiling) {
        report.status = SolveStatus::Unbounded;
    } else if (sol.feasibility > 1e-7) {
        report.status = SolveStatus::MaxIterations;
    } else {
        report.status = SolveStatus::Success;
    }
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

WeakDualityReport verify_weak_duality(const ScenarioTree& tree, const Eigen::VectorXd& z,
                                      const TradingRatePlan& plan, const Claim& claim,
                                      const MartingaleCertificate& cert,
                                      const FrictionSpec& friction) {
    claim.check_shape_for(tree);
    const WealthGrid wealth = roll_forward(tree, z, plan, friction);
    for (int leaf : tree.leaves()) {
        const auto& w = claim.at(leaf);
        const auto li = static_cast<std::size_t>(leaf);
        if (wealth.cash[li] < w[0] - 1e-7 ||
            (wealth.assets[li].array() < w.tail(tree.asset_count()).array() - 1e-7).any())
            raise(ErrorCode::PlanInfeasibleForClaim,
                  "plan does not dominate the claim at every leaf");
    }
    WeakDualityReport rep;
    rep.lhs = cert.at(tree.root()).dot(z);
    rep.rhs = dual_value(tree, cert, claim, friction);
    rep.ok = rep.lhs >= rep.rhs - 1e-8;
    return rep;
}

// ---------------------------------------------------------------------------
// Example 1: closed-form moments of the divergent dual family.

namespace {

// int_0^w exp(p u) du = expm1(p w) / p, stable for small p.
double exp_integral_from_zero(double p, double w) {
    if (std::abs(p * w) < 1e-12) return w;
    return std::expm1(p * w) / p;
}

void check_example1_args(const GBMParams& params, double horizon, double n, double x) {
    params.validate();
    if (!(horizon > 0.0) || !(n > 1.0 / horizon))
        raise(ErrorCode::InvalidArgument, "example 1 needs n > 1/T");
    if (!(x > 0.0)) raise(ErrorCode::InvalidArgument, "example 1 needs x > 0");
}

}  // namespace

double example1_moment_zs(const GBMParams& params, double horizon, double n, double x,
                          double t) {
    check_example1_args(params, horizon, n, x);
    const double tau = horizon - 1.0 / n;
    const double base = params.mu - params.sigma * params.sigma;
    const double extra = t > tau ? params.sigma * x * (t - tau) : 0.0;
    return params.s0 * std::exp(base * t + extra);
}

double example1_moment_s0sq(const GBMParams& params, double horizon, double n, double x,
                            double t) {
    check_example1_args(params, horizon, n, x);
    const double tau = horizon - 1.0 / n;
    const double base = 2.0 * params.sigma * params.sigma - params.mu;
    const double extra = t > tau ? -params.sigma * x * (t - tau) : 0.0;
    return params.s0 * std::exp(base * t + extra);
}

Example1Value example1_dual_family(const GBMParams& params, double lambda, double horizon,
                                   double n, double x) {
    check_example1_args(params, horizon, n, x);
    if (!(lambda > 0.0)) raise(ErrorCode::InvalidArgument, "lambda must be positive");
    const double tau = horizon - 1.0 / n;
    const double width = horizon - tau;
    const double sx = params.sigma * x;
    const double p_zs = params.mu - params.sigma * params.sigma;
    const double p_inv = 2.0 * params.sigma * params.sigma - params.mu;

    // Tail integrals in the shifted variable u = t - tau; the exponent stays
    // O(sx / n) even when x grows like n log n.
    const double i_zs =
        params.s0 * (exp_integral_from_zero(p_zs, tau) +
                     std::exp(p_zs * tau) * exp_integral_from_zero(p_zs + sx, width));
    const double i_inv =
        params.s0 * (exp_integral_from_zero(p_inv, tau) +
                     std::exp(p_inv * tau) * exp_integral_from_zero(p_inv - sx, width));

    Example1Value out;
    out.terminal_moment = params.s0 * std::exp(p_zs * horizon + sx * width);
    out.penalty =
        (i_inv - 2.0 * params.s0 * horizon + i_zs) / (2.0 * lambda);
    out.value = out.terminal_moment - out.penalty;
    return out;
}

}  // namespace frictionlab
