#pragma once

#include <optional>

#include "frictionlab/superhedge.hpp"

namespace frictionlab {

/// Result of the second-kind arbitrage scan: c_star is the minimal cash
/// endowment superhedging the zero claim.
struct Na2Report {
    bool arbitrage_found = false;
    double c_star = 0.0;
    std::optional<TradingRatePlan> witness_plan;  // present when c_star < 0
    MartingaleCertificate certificate;
    double epsilon_achieved = 0.0;  // penalty of the returned certificate
    SolveStatus status = SolveStatus::Success;
};

/// Superhedges W = 0 (cash and assets) from (c, 0, ..., 0); arbitrage iff the
/// minimal c is negative beyond tolerance. Requires S >= 0 on all nodes.
Na2Report detect_na2(const ScenarioTree& tree, const FrictionSpec& friction,
                     const SolverConfig& cfg = {});

struct Na2CertificateSearch {
    bool found = false;
    MartingaleCertificate certificate;
    double penalty = 0.0;
};

/// Seeks a certificate with penalty E sum Z0 G*(Zbar - S) dt below epsilon;
/// reports the best penalty achieved otherwise.
Na2CertificateSearch na2_certificate_search(const ScenarioTree& tree,
                                            const FrictionSpec& friction, double epsilon,
                                            const SolverConfig& cfg = {});

}  // namespace frictionlab
