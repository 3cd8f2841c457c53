#include "frictionlab/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace frictionlab::io {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) raise(ErrorCode::IoError, msg);
}

std::vector<double> as_doubles(const json& j) { return j.get<std::vector<double>>(); }

json vec_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vec_from(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    Eigen::Index i = 0;
    for (const auto& x : j) v[i++] = x.get<double>();
    return v;
}

}  // namespace

json to_json(const FrictionSpec& spec) {
    json j;
    j["kind"] = friction_kind_name(spec.kind);
    switch (spec.kind) {
        case FrictionKind::PowerScalar:
            j["lambda"] = spec.lambda_coef;
            j["alpha"] = spec.alpha;
            break;
        case FrictionKind::QuadraticImpact:
            j["lambda"] = spec.lambda_coef;
            j["alpha"] = 2.0;
            break;
        case FrictionKind::MatrixQuadratic: {
            json rows = json::array();
            for (Eigen::Index r = 0; r < spec.impact_matrix.rows(); ++r)
                rows.push_back(vec_json(spec.impact_matrix.row(r)));
            j["matrix"] = rows;
            break;
        }
        case FrictionKind::Tabulated:
            j["alpha"] = spec.alpha;
            j["grid_x"] = spec.grid_x;
            j["grid_g"] = spec.grid_g;
            break;
    }
    j["participation_cost"] = spec.participation_cost;
    j["h_floor"] = spec.h_floor;
    return j;
}

FrictionSpec friction_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    FrictionSpec spec;
    if (kind == "PowerScalar") {
        spec = FrictionSpec::power_scalar(j.at("lambda").get<double>(),
                                          j.at("alpha").get<double>(),
                                          j.value("participation_cost", 0.0));
        if (j.contains("h_floor")) spec.h_floor = j.at("h_floor").get<double>();
    } else if (kind == "QuadraticImpact") {
        spec = FrictionSpec::quadratic_impact(j.at("lambda").get<double>(),
                                              j.value("h_floor", j.at("lambda").get<double>() / 2.0),
                                              j.value("participation_cost", 0.0));
    } else if (kind == "MatrixQuadratic") {
        const auto& rows = j.at("matrix");
        const auto n = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index r = 0; r < n; ++r) m.row(r) = vec_from(rows[static_cast<std::size_t>(r)]);
        spec = FrictionSpec::matrix_quadratic(m, j.value("participation_cost", 0.0));
        if (j.contains("h_floor")) spec.h_floor = j.at("h_floor").get<double>();
    } else if (kind == "Tabulated") {
        spec = FrictionSpec::tabulated(as_doubles(j.at("grid_x")), as_doubles(j.at("grid_g")),
                                       j.at("h_floor").get<double>(),
                                       j.at("alpha").get<double>());
    } else {
        raise(ErrorCode::IoError, "unknown friction kind: " + kind);
    }
    spec.validate();
    return spec;
}

json to_json(const TimeGrid& grid) { return json(grid.times); }

TimeGrid grid_from_json(const json& j) {
    TimeGrid g;
    g.times = as_doubles(j);
    g.validate();
    return g;
}

json to_json(const ScenarioTree& tree) {
    json j;
    j["d"] = tree.asset_count();
    j["grid"] = to_json(tree.grid());
    json nodes = json::array();
    for (const auto& n : tree.nodes()) {
        json nj;
        nj["id"] = n.id;
        if (n.parent >= 0)
            nj["parent"] = n.parent;
        else
            nj["parent"] = nullptr;
        nj["k"] = n.k;
        nj["q"] = n.q;
        nj["S"] = vec_json(n.price);
        nodes.push_back(std::move(nj));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

ScenarioTree tree_from_json(const json& j) {
    const int d = j.at("d").get<int>();
    TimeGrid grid = grid_from_json(j.at("grid"));
    std::vector<TreeNode> nodes;
    for (const auto& nj : j.at("nodes")) {
        TreeNode n;
        n.id = nj.at("id").get<int>();
        n.parent = nj.at("parent").is_null() ? -1 : nj.at("parent").get<int>();
        n.k = nj.at("k").get<int>();
        n.q = nj.at("q").get<double>();
        n.price = vec_from(nj.at("S"));
        nodes.push_back(std::move(n));
    }
    return ScenarioTree(std::move(grid), std::move(nodes), d);
}

json to_json(const ScenarioTree& tree, const TradingRatePlan& plan) {
    plan.check_shape_for(tree);
    json rates;
    for (int id : tree.trading_nodes()) rates[std::to_string(id)] = vec_json(plan.at_node(id));
    json j;
    j["node_rates"] = std::move(rates);
    return j;
}

TradingRatePlan plan_from_json(const ScenarioTree& tree, const json& j) {
    TradingRatePlan plan = TradingRatePlan::zero_for_tree(tree);
    for (const auto& [key, value] : j.at("node_rates").items()) {
        const int id = std::stoi(key);
        require(id >= 0 && id < static_cast<int>(tree.node_count()), "rate for unknown node");
        plan.at_node(id) = vec_from(value);
    }
    plan.check_shape_for(tree);
    return plan;
}

json to_json(const ScenarioTree& tree, const Claim& claim) {
    claim.check_shape_for(tree);
    json w;
    for (int leaf : tree.leaves()) w[std::to_string(leaf)] = vec_json(claim.at(leaf));
    json j;
    j["W"] = std::move(w);
    return j;
}

Claim claim_from_json(const ScenarioTree& tree, const json& j) {
    Claim claim = Claim::zero(tree);
    for (const auto& [key, value] : j.at("W").items()) {
        const int id = std::stoi(key);
        require(id >= 0 && id < static_cast<int>(tree.node_count()), "claim for unknown node");
        claim.at(id) = vec_from(value);
    }
    claim.check_shape_for(tree);
    return claim;
}

json to_json(const ScenarioTree& tree, const MartingaleCertificate& cert) {
    json z;
    for (const auto& n : tree.nodes()) z[std::to_string(n.id)] = vec_json(cert.at(n.id));
    json j;
    j["Z"] = std::move(z);
    return j;
}

MartingaleCertificate certificate_from_json(const ScenarioTree& tree, const json& j) {
    MartingaleCertificate cert;
    cert.z.assign(tree.node_count(), Eigen::VectorXd::Zero(tree.asset_count() + 1));
    for (const auto& [key, value] : j.at("Z").items()) {
        const int id = std::stoi(key);
        require(id >= 0 && id < static_cast<int>(tree.node_count()),
                "certificate value for unknown node");
        cert.z[static_cast<std::size_t>(id)] = vec_from(value);
    }
    return cert;
}

json to_json(const UtilitySpec& utility) {
    json j;
    switch (utility.kind) {
        case UtilityKind::Exponential:
            j["kind"] = "Exponential";
            j["a"] = utility.a;
            break;
        case UtilityKind::NegPower:
            j["kind"] = "NegPower";
            j["C"] = utility.c_coef;
            j["delta"] = utility.delta;
            j["kink"] = utility.kink;
            break;
    }
    return j;
}

UtilitySpec utility_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "Exponential") return UtilitySpec::exponential(j.at("a").get<double>());
    if (kind == "NegPower")
        return UtilitySpec::neg_power(j.at("C").get<double>(), j.at("delta").get<double>(),
                                      j.value("kink", 1.0));
    raise(ErrorCode::IoError, "unknown utility kind: " + kind);
}

json to_json(const ScenarioTree& tree, const SolveReport& report) {
    json j;
    j["status"] = solve_status_name(report.status);
    j["primal_value"] = report.primal_value;
    j["dual_value"] = report.dual_value;
    j["duality_gap"] = report.duality_gap;
    j["plan"] = to_json(tree, report.plan);
    if (!report.certificate.z.empty()) j["certificate"] = to_json(tree, report.certificate);
    j["kkt_residuals"] = {{"feasibility", report.kkt.feasibility},
                          {"stationarity", report.kkt.stationarity},
                          {"complementarity", report.kkt.complementarity},
                          {"martingale", report.kkt.martingale}};
    j["iterations"] = report.iterations;
    j["wall_time"] = report.wall_time;
    return j;
}

json to_json(const ScenarioTree& tree, const Na2Report& report) {
    json j;
    j["arbitrage_found"] = report.arbitrage_found;
    j["c_star"] = report.c_star;
    j["status"] = solve_status_name(report.status);
    if (report.witness_plan) j["witness_plan"] = to_json(tree, *report.witness_plan);
    j["certificate"] = to_json(tree, report.certificate);
    j["epsilon_achieved"] = report.epsilon_achieved;
    return j;
}

json to_json(const ScenarioTree& tree, const FocReport& report) {
    json j;
    j["y_star"] = report.y_star;
    json q;
    for (std::size_t i = 0; i < tree.leaves().size(); ++i)
        q[std::to_string(tree.leaves()[i])] = report.q_density[i];
    j["q_density"] = std::move(q);
    json z;
    for (int id : tree.trading_nodes())
        z[std::to_string(id)] = vec_json(report.shadow_price[static_cast<std::size_t>(id)]);
    j["shadow_price"] = std::move(z);
    j["martingale_residual"] = report.martingale_residual;
    j["orthogonality_residual"] = report.orthogonality_residual;
    j["duality_gap_bound"] = report.duality_gap_bound;
    j["optimal_certified"] = report.optimal_certified;
    j["luk"] = {{"C", report.luk_c}, {"delta", report.luk_delta}, {"eta", report.luk_eta}};
    return j;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const std::exception& e) {
        raise(ErrorCode::IoError, path + ": " + e.what());
    }
}

void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot write " + path);
    out << j.dump(2) << '\n';
}

namespace {
constexpr char kEnsembleMagic[9] = "FLENS001";
}

void save_ensemble(const PathEnsemble& ensemble, const std::string& path) {
    ensemble.validate();
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write " + path);
    out.write(kEnsembleMagic, 8);
    const std::uint64_t dims[3] = {ensemble.n_paths, ensemble.n_times,
                                   static_cast<std::uint64_t>(ensemble.d)};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(ensemble.prices.data()),
              static_cast<std::streamsize>(ensemble.prices.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(ensemble.weights.data()),
              static_cast<std::streamsize>(ensemble.weights.size() * sizeof(double)));
    require(out.good(), "short write to " + path);

    json meta;
    meta["model"] = ensemble.meta.model;
    meta["parameters"] = ensemble.meta.parameters;
    meta["seed"] = ensemble.meta.seed;
    meta["grid"] = to_json(ensemble.grid);
    save_json(meta, path + ".json");
}

PathEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    require(in.good() && std::string(magic, 8) == kEnsembleMagic, "bad ensemble magic");
    std::uint64_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    PathEnsemble ens;
    ens.n_paths = dims[0];
    ens.n_times = dims[1];
    ens.d = static_cast<int>(dims[2]);
    ens.prices.resize(ens.n_paths * ens.n_times * static_cast<std::size_t>(ens.d));
    ens.weights.resize(ens.n_paths);
    in.read(reinterpret_cast<char*>(ens.prices.data()),
            static_cast<std::streamsize>(ens.prices.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(ens.weights.data()),
            static_cast<std::streamsize>(ens.weights.size() * sizeof(double)));
    require(in.good(), "short read from " + path);

    const json meta = load_json(path + ".json");
    ens.meta.model = meta.at("model").get<std::string>();
    for (const auto& [key, value] : meta.at("parameters").items())
        ens.meta.parameters[key] = value.get<double>();
    ens.meta.seed = meta.at("seed").get<std::uint64_t>();
    ens.grid = grid_from_json(meta.at("grid"));
    ens.validate();
    return ens;
}

namespace {
constexpr char kPlanMagic[9] = "FLPLN001";
}

void save_plan_matrix(const TradingRatePlan& plan, const std::string& path) {
    require(plan.form == TradingRatePlan::Form::Path, "only path-form plans persist as matrices");
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "cannot write " + path);
    out.write(kPlanMagic, 8);
    const std::uint64_t dims[3] = {plan.n_paths, plan.n_steps,
                                   static_cast<std::uint64_t>(plan.d)};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    for (const auto& r : plan.rates)
        out.write(reinterpret_cast<const char*>(r.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(plan.d)));
    require(out.good(), "short write to " + path);
}

TradingRatePlan load_plan_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    require(in.good() && std::string(magic, 8) == kPlanMagic, "bad plan magic");
    std::uint64_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    TradingRatePlan plan;
    plan.form = TradingRatePlan::Form::Path;
    plan.n_paths = dims[0];
    plan.n_steps = dims[1];
    plan.d = static_cast<int>(dims[2]);
    plan.rates.assign(plan.n_paths * plan.n_steps, Eigen::VectorXd::Zero(plan.d));
    for (auto& r : plan.rates)
        in.read(reinterpret_cast<char*>(r.data()),
                static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(plan.d)));
    require(in.good(), "short read from " + path);
    return plan;
}

std::string fingerprint_bytes(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

std::string fingerprint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    return fingerprint_bytes(bytes.data(), bytes.size());
}

}  // namespace frictionlab::io
