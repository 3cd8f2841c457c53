#pragma once

// Small dense first-order solvers shared by the superhedging and utility
// modules. Deterministic: fixed iteration and reduction order.

#include <Eigen/Dense>
#include <deque>
#include <functional>

namespace frictionlab::detail {

struct LbfgsOptions {
    int max_iter = 2000;
    double grad_tol = 1e-10;
    int memory = 10;
    double armijo = 1e-4;
    double min_step = 1e-18;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Minimizes a C^1 convex function with L-BFGS and Armijo backtracking.
inline LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
    const Eigen::VectorXd& x0, const LbfgsOptions& opts = {}) {
    using Eigen::VectorXd;
    VectorXd x = x0;
    VectorXd g(x.size());
    double f = fg(x, g);

    std::deque<VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    LbfgsResult res;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        const double gnorm = g.norm();
        if (gnorm <= opts.grad_tol) {
            res.converged = true;
            break;
        }

        // Two-loop recursion.
        VectorXd q = g;
        const int m = static_cast<int>(s_hist.size());
        std::vector<double> alpha(static_cast<std::size_t>(m));
        for (int i = m - 1; i >= 0; --i) {
            const auto ui = static_cast<std::size_t>(i);
            alpha[ui] = rho_hist[ui] * s_hist[ui].dot(q);
            q -= alpha[ui] * y_hist[ui];
        }
        if (m > 0) {
            const auto last = static_cast<std::size_t>(m - 1);
            const double ys = y_hist[last].dot(s_hist[last]);
            const double yy = y_hist[last].squaredNorm();
            if (ys > 0 && yy > 0) q *= ys / yy;
        }
        for (int i = 0; i < m; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const double beta = rho_hist[ui] * y_hist[ui].dot(q);
            q += (alpha[ui] - beta) * s_hist[ui];
        }
        VectorXd dir = -q;
        double dg = dir.dot(g);
        if (!(dg < 0)) {  // fall back to steepest descent
            dir = -g;
            dg = -gnorm * gnorm;
        }

        double step = 1.0;
        VectorXd x_new(x.size()), g_new(x.size());
        double f_new = f;
        bool accepted = false;
        while (step >= opts.min_step) {
            x_new = x + step * dir;
            f_new = fg(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + opts.armijo * step * dg) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        VectorXd s = x_new - x;
        VectorXd yv = g_new - g;
        const double ys = yv.dot(s);
        if (ys > 1e-14 * s.norm() * yv.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yv));
            rho_hist.push_back(1.0 / ys);
            if (static_cast<int>(s_hist.size()) > opts.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x.swap(x_new);
        g.swap(g_new);
        f = f_new;
    }
    res.x = std::move(x);
    res.f = f;
    res.grad_norm = g.norm();
    res.iterations = it;
    return res;
}

/// Inequality-constrained convex minimization by the method of multipliers:
/// minimize f(x) s.t. g_j(x) <= 0 with smooth convex g_j.
struct AugLagOptions {
    int max_outer = 120;
    double feas_tol = 1e-10;
    double multiplier_tol = 1e-9;
    double rho_init = 10.0;
    double rho_max = 1e8;  // larger values poison the multiplier updates
    double rho_growth = 5.0;
    LbfgsOptions inner;
};

struct AugLagResult {
    Eigen::VectorXd x;
    Eigen::VectorXd multipliers;
    double f = 0.0;
    double feasibility = 0.0;  // max_j g_j(x)_+
    int outer_iterations = 0;
    int inner_iterations = 0;
    bool converged = false;
};

/// objective: returns f and grad_f; constraints: fills g (size m) and the
/// m-by-n Jacobian callback applied as J^T * w accumulation.
inline AugLagResult auglag_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& objective,
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& constraints,
    const std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&, Eigen::VectorXd&)>&
        constraints_jtw,
    int n_constraints, const Eigen::VectorXd& x0, const AugLagOptions& opts = {}) {
    using Eigen::VectorXd;
    VectorXd x = x0;
    VectorXd lambda = VectorXd::Zero(n_constraints);
    double rho = opts.rho_init;

    AugLagResult res;
    VectorXd gvals(n_constraints);
    double feas_prev = std::numeric_limits<double>::infinity();
    int total_inner = 0;

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        auto fg = [&](const VectorXd& xx, VectorXd& grad) {
            VectorXd gobj(xx.size());
            double f = objective(xx, gobj);
            VectorXd gc(n_constraints);
            constraints(xx, gc);
            // psi(g) = (max(0, lambda + rho g)^2 - lambda^2) / (2 rho)
            VectorXd w(n_constraints);
            for (int j = 0; j < n_constraints; ++j) {
                const double t = lambda[j] + rho * gc[j];
                if (t > 0) {
                    f += (t * t - lambda[j] * lambda[j]) / (2 * rho);
                    w[j] = t;
                } else {
                    f -= lambda[j] * lambda[j] / (2 * rho);
                    w[j] = 0.0;
                }
            }
            VectorXd jtw(xx.size());
            constraints_jtw(xx, w, jtw);
            grad = gobj + jtw;
            return f;
        };

        auto sol = lbfgs_minimize(fg, x, opts.inner);
        x = sol.x;
        total_inner += sol.iterations;

        constraints(x, gvals);
        double feas = 0.0;
        for (int j = 0; j < n_constraints; ++j) feas = std::max(feas, gvals[j]);
        double dlam = 0.0, lam_scale = 1.0;
        for (int j = 0; j < n_constraints; ++j) {
            const double updated = std::max(0.0, lambda[j] + rho * gvals[j]);
            dlam = std::max(dlam, std::abs(updated - lambda[j]));
            lam_scale = std::max(lam_scale, std::abs(updated));
            lambda[j] = updated;
        }

        res.outer_iterations = outer + 1;
        if (feas <= opts.feas_tol && dlam <= opts.multiplier_tol * lam_scale) {
            res.converged = true;
            break;
        }
        if (feas > 0.25 * feas_prev && feas > opts.feas_tol)
            rho = std::min(opts.rho_max, rho * opts.rho_growth);
        feas_prev = feas;
    }

    VectorXd gobj(x.size());
    res.f = objective(x, gobj);
    constraints(x, gvals);
    double feas = 0.0;
    for (int j = 0; j < n_constraints; ++j) feas = std::max(feas, gvals[j]);
    res.feasibility = feas;
    res.x = std::move(x);
    res.multipliers = std::move(lambda);
    res.inner_iterations = total_inner;
    return res;
}

}  // namespace frictionlab::detail
