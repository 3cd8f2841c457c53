#include "frictionlab/arbitrage.hpp"

#include <cmath>

namespace frictionlab {

Na2Report detect_na2(const ScenarioTree& tree, const FrictionSpec& friction,
                     const SolverConfig& cfg) {
    for (const auto& node : tree.nodes())
        if ((node.price.array() < 0.0).any())
            raise(ErrorCode::NegativePrices,
                  "second-kind arbitrage detection requires nonnegative prices");

    const Claim zero = Claim::zero(tree);
    SolveReport solved = superhedge_price(tree, zero, friction, cfg);

    Na2Report report;
    report.status = solved.status;
    report.c_star = solved.primal_value;
    report.certificate = solved.certificate;
    report.epsilon_achieved = certificate_penalty(tree, solved.certificate, friction);

    double price_scale = 0.0;
    for (const auto& node : tree.nodes())
        price_scale = std::max(price_scale, node.price.lpNorm<Eigen::Infinity>());
    // solver noise vs genuine profit at desk scale
    report.arbitrage_found = report.c_star < -1e-7 * (1.0 + price_scale);
    if (report.arbitrage_found) report.witness_plan = solved.plan;
    return report;
}

Na2CertificateSearch na2_certificate_search(const ScenarioTree& tree,
                                            const FrictionSpec& friction, double epsilon,
                                            const SolverConfig& cfg) {
    // With W = 0 the dual objective is pure penalty minimization.
    const Claim zero = Claim::zero(tree);
    auto [cert, value] = maximize_dual(tree, zero, friction, cfg);

    Na2CertificateSearch out;
    out.certificate = cert;
    out.penalty = certificate_penalty(tree, cert, friction);
    out.found = out.penalty < epsilon;
    return out;
}

}  // namespace frictionlab
