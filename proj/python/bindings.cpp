#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "frictionlab/arbitrage.hpp"
#include "frictionlab/io.hpp"
#include "frictionlab/superhedge.hpp"
#include "frictionlab/utility.hpp"
#include "frictionlab/wealth.hpp"

namespace py = pybind11;
using namespace frictionlab;

namespace {

py::object json_to_py(const io::json& j) {
    py::module_ pyjson = py::module_::import("json");
    return pyjson.attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pricing, hedging and optimizing under superlinear trading frictions";

    py::register_exception<Error>(m, "FrictionlabError");

    py::enum_<FrictionKind>(m, "FrictionKind")
        .value("PowerScalar", FrictionKind::PowerScalar)
        .value("QuadraticImpact", FrictionKind::QuadraticImpact)
        .value("MatrixQuadratic", FrictionKind::MatrixQuadratic)
        .value("Tabulated", FrictionKind::Tabulated);

    py::class_<FrictionSpec>(m, "FrictionSpec")
        .def_static("power_scalar", &FrictionSpec::power_scalar, py::arg("lam"),
                    py::arg("alpha"), py::arg("participation_cost") = 0.0)
        .def_static("quadratic_impact", &FrictionSpec::quadratic_impact, py::arg("lam"),
                    py::arg("h_floor"), py::arg("participation_cost") = 0.0)
        .def_static("matrix_quadratic", &FrictionSpec::matrix_quadratic, py::arg("matrix"),
                    py::arg("participation_cost") = 0.0)
        .def_static("tabulated", &FrictionSpec::tabulated, py::arg("grid_x"), py::arg("grid_g"),
                    py::arg("h_floor"), py::arg("alpha"))
        .def_readonly("kind", &FrictionSpec::kind)
        .def_readonly("lambda_coef", &FrictionSpec::lambda_coef)
        .def_readonly("alpha", &FrictionSpec::alpha)
        .def_readonly("participation_cost", &FrictionSpec::participation_cost)
        .def_readwrite("h_floor", &FrictionSpec::h_floor)
        .def("validate", [](const FrictionSpec& s) { s.validate(); });

    py::class_<DualEval>(m, "DualEval")
        .def_readonly("value", &DualEval::value)
        .def_readonly("argsup", &DualEval::argsup)
        .def_readonly("attained", &DualEval::attained);

    m.def("eval_g", &eval_g, py::arg("spec"), py::arg("s"), py::arg("x"));
    m.def("eval_g_star", &eval_g_star, py::arg("spec"), py::arg("s"), py::arg("y"));
    m.def("eval_g_prime", &eval_g_prime, py::arg("spec"), py::arg("s"), py::arg("x"));
    m.def("dual_bound_envelope", &dual_bound_envelope, py::arg("spec"), py::arg("y"));

    py::class_<TimeGrid>(m, "TimeGrid")
        .def_static("uniform", &TimeGrid::uniform, py::arg("horizon"), py::arg("steps"))
        .def_readonly("times", &TimeGrid::times)
        .def("horizon", &TimeGrid::horizon)
        .def("steps", &TimeGrid::steps);

    py::class_<TreeNode>(m, "TreeNode")
        .def_readonly("id", &TreeNode::id)
        .def_readonly("parent", &TreeNode::parent)
        .def_readonly("k", &TreeNode::k)
        .def_readonly("q", &TreeNode::q)
        .def_readonly("price", &TreeNode::price);

    py::class_<ScenarioTree>(m, "ScenarioTree")
        .def("asset_count", &ScenarioTree::asset_count)
        .def("node_count", &ScenarioTree::node_count)
        .def("leaves", &ScenarioTree::leaves)
        .def("trading_nodes", &ScenarioTree::trading_nodes)
        .def("prob", &ScenarioTree::prob)
        .def("node", &ScenarioTree::node, py::return_value_policy::reference_internal)
        .def("grid", &ScenarioTree::grid, py::return_value_policy::reference_internal)
        .def("to_json", [](const ScenarioTree& t) { return json_to_py(io::to_json(t)); });

    py::class_<GBMParams>(m, "GBMParams")
        .def(py::init([](double s0, double mu, double sigma) {
                 return GBMParams{s0, mu, sigma};
             }),
             py::arg("s0"), py::arg("mu"), py::arg("sigma"))
        .def_readwrite("s0", &GBMParams::s0)
        .def_readwrite("mu", &GBMParams::mu)
        .def_readwrite("sigma", &GBMParams::sigma);

    py::class_<BranchingRule>(m, "BranchingRule")
        .def_static("moment_matched", &BranchingRule::moment_matched)
        .def_static("multipliers", &BranchingRule::multipliers, py::arg("up"), py::arg("down"),
                    py::arg("p_up"));

    m.def("build_binomial_tree", &build_binomial_tree, py::arg("params"), py::arg("grid"),
          py::arg("rule") = BranchingRule::moment_matched());
    m.def(
        "tree_from_json_str",
        [](const std::string& text) { return io::tree_from_json(io::json::parse(text)); },
        py::arg("text"));

    py::class_<PathEnsemble>(m, "PathEnsemble")
        .def_readonly("n_paths", &PathEnsemble::n_paths)
        .def_readonly("n_times", &PathEnsemble::n_times)
        .def_readonly("d", &PathEnsemble::d)
        .def_readonly("weights", &PathEnsemble::weights)
        .def("at", py::overload_cast<std::size_t, std::size_t, int>(&PathEnsemble::at,
                                                                    py::const_),
             py::arg("path"), py::arg("t"), py::arg("asset") = 0)
        .def_property_readonly("prices", [](const PathEnsemble& e) { return e.prices; });

    py::enum_<FbmMethod>(m, "FbmMethod")
        .value("Auto", FbmMethod::Auto)
        .value("CirculantEmbedding", FbmMethod::CirculantEmbedding)
        .value("CovarianceSqrt", FbmMethod::CovarianceSqrt);

    py::class_<FbmParams>(m, "FbmParams")
        .def(py::init([](double s0, double sigma) { return FbmParams{s0, sigma}; }),
             py::arg("s0"), py::arg("sigma"));

    m.def("simulate_gbm", &simulate_gbm, py::arg("params"), py::arg("grid"), py::arg("n_paths"),
          py::arg("seed"), py::arg("threads") = 0);
    m.def("simulate_fbm_price", &simulate_fbm_price, py::arg("hurst"), py::arg("params"),
          py::arg("grid"), py::arg("n_paths"), py::arg("seed"), py::arg("threads") = 0,
          py::arg("method") = FbmMethod::Auto);
    m.def("quantize_fbm_tree", &quantize_fbm_tree, py::arg("hurst"), py::arg("params"),
          py::arg("grid"), py::arg("children_per_node") = 2);

    py::class_<TradingRatePlan>(m, "TradingRatePlan")
        .def_static("zero_for_tree", &TradingRatePlan::zero_for_tree)
        .def_static("zero_for_paths", &TradingRatePlan::zero_for_paths)
        .def("rate_at_node",
             [](const TradingRatePlan& p, int node) { return p.at_node(node); })
        .def("set_rate_at_node", [](TradingRatePlan& p, int node,
                                    const Eigen::VectorXd& v) { p.at_node(node) = v; })
        .def("rate_at", [](const TradingRatePlan& p, std::size_t path,
                           std::size_t k) { return p.at(path, k); })
        .def("set_rate_at", [](TradingRatePlan& p, std::size_t path, std::size_t k,
                               const Eigen::VectorXd& v) { p.at(path, k) = v; });

    py::class_<WealthGrid>(m, "WealthGrid")
        .def_readonly("cash", &WealthGrid::cash)
        .def("cash_at", &WealthGrid::cash_at)
        .def("assets_at", &WealthGrid::assets_at);

    m.def("roll_forward_tree",
          py::overload_cast<const ScenarioTree&, const Eigen::VectorXd&,
                            const TradingRatePlan&, const FrictionSpec&>(&roll_forward),
          py::arg("tree"), py::arg("z"), py::arg("plan"), py::arg("friction"));
    m.def("roll_forward_paths",
          py::overload_cast<const PathEnsemble&, const Eigen::VectorXd&,
                            const TradingRatePlan&, const FrictionSpec&>(&roll_forward),
          py::arg("paths"), py::arg("z"), py::arg("plan"), py::arg("friction"));
    m.def("market_bound_tree",
          py::overload_cast<const ScenarioTree&, const FrictionSpec&>(&market_bound));
    m.def("market_bound_paths",
          py::overload_cast<const PathEnsemble&, const FrictionSpec&>(&market_bound));
    m.def("execution_price_series_tree",
          py::overload_cast<const TradingRatePlan&, const ScenarioTree&, const FrictionSpec&>(
              &execution_price_series));
    m.def("filter_positive_execution_tree",
          py::overload_cast<const TradingRatePlan&, const ScenarioTree&, const FrictionSpec&>(
              &filter_positive_execution));
    m.def(
        "volume_bound_check_tree",
        [](const TradingRatePlan& plan, const ScenarioTree& tree, const FrictionSpec& friction,
           double beta) { return volume_bound_check(plan, tree, friction, {beta}); },
        py::arg("plan"), py::arg("tree"), py::arg("friction"), py::arg("beta"));
    m.def(
        "volume_bound_check_paths",
        [](const TradingRatePlan& plan, const PathEnsemble& paths, const FrictionSpec& friction,
           double beta) { return volume_bound_check(plan, paths, friction, {beta}); },
        py::arg("plan"), py::arg("paths"), py::arg("friction"), py::arg("beta"));
    m.def("constant_cashflow_plan_tree",
          py::overload_cast<const ScenarioTree&, const FrictionSpec&, double>(
              &constant_cashflow_plan));
    m.def("constant_cashflow_plan_paths",
          py::overload_cast<const PathEnsemble&, const FrictionSpec&, double>(
              &constant_cashflow_plan));

    py::class_<VolumeBoundReport>(m, "VolumeBoundReport")
        .def_readonly("lhs", &VolumeBoundReport::lhs)
        .def_readonly("rhs", &VolumeBoundReport::rhs)
        .def_readonly("ok", &VolumeBoundReport::ok);

    py::class_<Claim>(m, "Claim")
        .def_static("zero", &Claim::zero)
        .def("value_at", [](const Claim& c, int node) { return c.at(node); })
        .def("set_value_at",
             [](Claim& c, int node, const Eigen::VectorXd& v) { c.at(node) = v; });

    py::class_<MartingaleCertificate>(m, "MartingaleCertificate")
        .def_static("frictionless_consistent", &MartingaleCertificate::frictionless_consistent)
        .def("value_at", [](const MartingaleCertificate& c, int node) { return c.at(node); })
        .def("martingale_residual", &MartingaleCertificate::martingale_residual)
        .def("validate", &MartingaleCertificate::validate, py::arg("tree"),
             py::arg("tol") = 1e-10);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("max_iter", &SolverConfig::max_iter)
        .def_readwrite("gap_tol", &SolverConfig::gap_tol)
        .def_readwrite("feas_tol", &SolverConfig::feas_tol)
        .def_readwrite("seed", &SolverConfig::seed)
        .def_readwrite("threads", &SolverConfig::threads);

    py::enum_<SolveStatus>(m, "SolveStatus")
        .value("Success", SolveStatus::Success)
        .value("Unbounded", SolveStatus::Unbounded)
        .value("MaxIterations", SolveStatus::MaxIterations);

    py::class_<KktResiduals>(m, "KktResiduals")
        .def_readonly("feasibility", &KktResiduals::feasibility)
        .def_readonly("stationarity", &KktResiduals::stationarity)
        .def_readonly("complementarity", &KktResiduals::complementarity)
        .def_readonly("martingale", &KktResiduals::martingale);

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("status", &SolveReport::status)
        .def_readonly("primal_value", &SolveReport::primal_value)
        .def_readonly("dual_value", &SolveReport::dual_value)
        .def_readonly("duality_gap", &SolveReport::duality_gap)
        .def_readonly("plan", &SolveReport::plan)
        .def_readonly("certificate", &SolveReport::certificate)
        .def_readonly("kkt", &SolveReport::kkt)
        .def_readonly("iterations", &SolveReport::iterations)
        .def_readonly("wall_time", &SolveReport::wall_time);

    m.def("dual_value", &dual_value, py::arg("tree"), py::arg("cert"), py::arg("claim"),
          py::arg("friction"));
    m.def("certificate_penalty", &certificate_penalty);
    m.def("superhedge_price", &superhedge_price, py::arg("tree"), py::arg("claim"),
          py::arg("friction"), py::arg("cfg") = SolverConfig{},
          py::arg("z_assets") = Eigen::VectorXd());
    m.def("maximize_dual", &maximize_dual, py::arg("tree"), py::arg("claim"),
          py::arg("friction"), py::arg("cfg") = SolverConfig{},
          py::arg("warm") = std::optional<MartingaleCertificate>{});
    m.def(
        "verify_weak_duality",
        [](const ScenarioTree& tree, const Eigen::VectorXd& z, const TradingRatePlan& plan,
           const Claim& claim, const MartingaleCertificate& cert, const FrictionSpec& friction) {
            const auto rep = verify_weak_duality(tree, z, plan, claim, cert, friction);
            return py::make_tuple(rep.lhs, rep.rhs, rep.ok);
        });

    py::class_<Example1Value>(m, "Example1Value")
        .def_readonly("value", &Example1Value::value)
        .def_readonly("terminal_moment", &Example1Value::terminal_moment)
        .def_readonly("penalty", &Example1Value::penalty);

    m.def("example1_dual_family", &example1_dual_family, py::arg("params"), py::arg("lam"),
          py::arg("horizon"), py::arg("n"), py::arg("x"));
    m.def("example1_moment_zs", &example1_moment_zs);
    m.def("example1_moment_s0sq", &example1_moment_s0sq);

    py::class_<Na2Report>(m, "Na2Report")
        .def_readonly("arbitrage_found", &Na2Report::arbitrage_found)
        .def_readonly("c_star", &Na2Report::c_star)
        .def_readonly("witness_plan", &Na2Report::witness_plan)
        .def_readonly("certificate", &Na2Report::certificate)
        .def_readonly("epsilon_achieved", &Na2Report::epsilon_achieved);

    m.def("detect_na2", &detect_na2, py::arg("tree"), py::arg("friction"),
          py::arg("cfg") = SolverConfig{});

    py::class_<Na2CertificateSearch>(m, "Na2CertificateSearch")
        .def_readonly("found", &Na2CertificateSearch::found)
        .def_readonly("certificate", &Na2CertificateSearch::certificate)
        .def_readonly("penalty", &Na2CertificateSearch::penalty);

    m.def("na2_certificate_search", &na2_certificate_search, py::arg("tree"),
          py::arg("friction"), py::arg("epsilon"), py::arg("cfg") = SolverConfig{});

    py::enum_<UtilityKind>(m, "UtilityKind")
        .value("Exponential", UtilityKind::Exponential)
        .value("NegPower", UtilityKind::NegPower);

    py::class_<UtilitySpec>(m, "UtilitySpec")
        .def_static("exponential", &UtilitySpec::exponential, py::arg("a"))
        .def_static("neg_power", &UtilitySpec::neg_power, py::arg("c"), py::arg("delta"),
                    py::arg("kink") = 1.0)
        .def("u", &UtilitySpec::u)
        .def("u_prime", &UtilitySpec::u_prime)
        .def("u_conj", &UtilitySpec::u_conj);

    py::enum_<ConstraintClass>(m, "ConstraintClass")
        .value("TerminalFlat", ConstraintClass::TerminalFlat)
        .value("TerminalNonneg", ConstraintClass::TerminalNonneg);

    py::class_<FocReport>(m, "FocReport")
        .def_readonly("y_star", &FocReport::y_star)
        .def_readonly("q_density", &FocReport::q_density)
        .def_readonly("martingale_residual", &FocReport::martingale_residual)
        .def_readonly("orthogonality_residual", &FocReport::orthogonality_residual)
        .def_readonly("duality_gap_bound", &FocReport::duality_gap_bound)
        .def_readonly("optimal_certified", &FocReport::optimal_certified);

    m.def("save_ensemble", &io::save_ensemble, py::arg("ensemble"), py::arg("path"));
    m.def("load_ensemble", &io::load_ensemble, py::arg("path"));
    m.def("save_plan_matrix", &io::save_plan_matrix, py::arg("plan"), py::arg("path"));
    m.def("load_plan_matrix", &io::load_plan_matrix, py::arg("path"));

    m.def("maximize_utility", &maximize_utility, py::arg("tree"), py::arg("cash"),
          py::arg("endowment"), py::arg("utility"), py::arg("friction"),
          py::arg("cfg") = SolverConfig{},
          py::arg("constraint") = ConstraintClass::TerminalFlat);
    m.def("verify_foc", &verify_foc, py::arg("tree"), py::arg("plan"), py::arg("cash"),
          py::arg("endowment"), py::arg("utility"), py::arg("friction"),
          py::arg("tol") = 1e-6);
    m.def("utility_objective", &utility_objective);
}
