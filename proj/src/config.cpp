#include "ulf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ulf {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& message) {
    throw InvalidArgument(context.empty() ? message : context + ": " + message);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) fail(context, "unknown key '" + key + "'");
    }
}

const json& require(const json& obj, const std::string& key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(context, "missing field '" + key + "'");
    return *it;
}

double require_number(const json& obj, const std::string& key, const std::string& context) {
    const json& v = require(obj, key, context);
    if (!v.is_number()) fail(context + "." + key, "expected a number");
    return v.get<double>();
}

VectorXd parse_vector(const json& arr, const std::string& context) {
    if (!arr.is_array()) fail(context, "expected an array of numbers");
    VectorXd out(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) fail(context, "expected an array of numbers");
        out(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return out;
}

MatrixXd parse_matrix(const json& arr, const std::string& context) {
    if (!arr.is_array() || arr.empty()) fail(context, "expected an array of rows");
    const std::size_t rows = arr.size();
    std::size_t cols = 0;
    MatrixXd out;
    for (std::size_t i = 0; i < rows; ++i) {
        const VectorXd row = parse_vector(arr[i], context);
        if (i == 0) {
            cols = static_cast<std::size_t>(row.size());
            out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (static_cast<std::size_t>(row.size()) != cols) {
            fail(context, "ragged matrix rows");
        }
        out.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return out;
}

GaussianDensity parse_density(const json& obj, const std::string& context) {
    if (!obj.is_object()) fail(context, "expected an object");
    reject_unknown_keys(obj, {"mean", "cov", "cov_diag"}, context);
    const VectorXd mean = parse_vector(require(obj, "mean", context), context + ".mean");
    MatrixXd cov;
    if (obj.contains("cov")) {
        cov = parse_matrix(obj["cov"], context + ".cov");
    } else if (obj.contains("cov_diag")) {
        cov = parse_vector(obj["cov_diag"], context + ".cov_diag").asDiagonal();
    } else {
        fail(context, "missing field 'cov' (or 'cov_diag')");
    }
    try {
        return make_gaussian(mean, cov);
    } catch (const Error& e) {
        fail(context, e.what());
    }
}

DynamicsSpec parse_dynamics(const json& obj, const std::string& context) {
    if (!obj.is_object()) fail(context, "expected an object");
    const json& type = require(obj, "type", context);
    if (!type.is_string()) fail(context + ".type", "expected a string");
    const std::string kind = type.get<std::string>();
    if (kind == "ncv") {
        reject_unknown_keys(obj, {"type", "q"}, context);
        return NearlyConstantVelocity{require_number(obj, "q", context)};
    }
    if (kind == "ct") {
        reject_unknown_keys(obj, {"type", "q", "turn_rate_noise"}, context);
        return CoordinatedTurn{require_number(obj, "q", context),
                               require_number(obj, "turn_rate_noise", context)};
    }
    fail(context + ".type", "expected 'ncv' or 'ct', got '" + kind + "'");
}

Sensor parse_sensor(const json& obj, const std::string& context) {
    if (!obj.is_object()) fail(context, "expected an object");
    const json& type = require(obj, "type", context);
    if (!type.is_string()) fail(context + ".type", "expected a string");
    const std::string kind = type.get<std::string>();

    Sensor sensor;
    const VectorXd pos = parse_vector(require(obj, "position", context), context + ".position");
    if (pos.size() != 2) fail(context + ".position", "expected a 2-vector");
    sensor.position = pos;

    if (kind == "range_bearing") {
        reject_unknown_keys(obj, {"type", "position", "sigma_range", "sigma_bearing"}, context);
        sensor.kind = RangeBearingSensor{require_number(obj, "sigma_range", context),
                                         require_number(obj, "sigma_bearing", context)};
    } else if (kind == "range_only") {
        reject_unknown_keys(obj, {"type", "position", "sigma_range"}, context);
        sensor.kind = RangeOnlySensor{require_number(obj, "sigma_range", context)};
    } else if (kind == "position") {
        reject_unknown_keys(obj, {"type", "position", "sigma"}, context);
        sensor.kind = PositionSensor{require_number(obj, "sigma", context)};
    } else {
        fail(context + ".type", "expected 'range_bearing', 'range_only' or 'position'");
    }
    return sensor;
}

Scenario parse_scenario(const json& obj, const std::string& context) {
    if (!obj.is_object()) fail(context, "expected an object");
    reject_unknown_keys(obj, {"n_steps", "dt", "dynamics", "sensors", "init_truth", "init_filter"},
                        context);
    Scenario sc;
    const json& steps = require(obj, "n_steps", context);
    if (!steps.is_number_integer()) fail(context + ".n_steps", "expected an integer");
    sc.n_steps = steps.get<int>();
    sc.dt = require_number(obj, "dt", context);
    sc.dynamics = parse_dynamics(require(obj, "dynamics", context), context + ".dynamics");
    const json& sensors = require(obj, "sensors", context);
    if (!sensors.is_array()) fail(context + ".sensors", "expected an array");
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        std::ostringstream os;
        os << context << ".sensors[" << i << "]";
        sc.sensors.push_back(parse_sensor(sensors[i], os.str()));
    }
    sc.init_truth = parse_density(require(obj, "init_truth", context), context + ".init_truth");
    sc.init_filter = parse_density(require(obj, "init_filter", context), context + ".init_filter");
    try {
        validate(sc);
    } catch (const Error& e) {
        fail(context, e.what());
    }
    return sc;
}

QuadratureRule parse_rule(const json& obj, const std::string& linearizer,
                          const std::string& context) {
    if (linearizer == "unscented") {
        UnscentedRule rule;
        if (obj.contains("alpha")) rule.alpha = obj["alpha"].get<double>();
        if (obj.contains("beta")) rule.beta = obj["beta"].get<double>();
        if (obj.contains("kappa")) rule.kappa = obj["kappa"].get<double>();
        return QuadratureRule::unscented(rule.alpha, rule.beta, rule.kappa);
    }
    if (linearizer == "monte_carlo") {
        const std::int64_t count =
            obj.contains("sample_count") ? obj["sample_count"].get<std::int64_t>() : 1000;
        const std::uint64_t seed =
            obj.contains("quadrature_seed") ? obj["quadrature_seed"].get<std::uint64_t>() : 0;
        return QuadratureRule::monte_carlo(count, seed);
    }
    if (linearizer == "cubature") return QuadratureRule::cubature();
    fail(context + ".linearizer",
         "expected 'analytical', 'unscented', 'cubature' or 'monte_carlo'");
}

FilterSpec parse_filter(const json& entry, const std::string& context) {
    if (entry.is_string()) {
        try {
            return FilterSpec::from_zoo(entry.get<std::string>());
        } catch (const UnknownFilterName& e) {
            fail(context, e.what());
        }
    }
    if (!entry.is_object()) fail(context, "expected a zoo name or a filter object");
    reject_unknown_keys(entry,
                        {"name", "linearizer", "class", "max_iters", "tol", "damping", "alpha",
                         "beta", "kappa", "sample_count", "quadrature_seed"},
                        context);
    FilterSpec spec;
    const json& name = require(entry, "name", context);
    if (!name.is_string()) fail(context + ".name", "expected a string");
    spec.name = name.get<std::string>();

    const json& lin = require(entry, "linearizer", context);
    if (!lin.is_string()) fail(context + ".linearizer", "expected a string");
    const std::string lin_kind = lin.get<std::string>();
    if (lin_kind == "analytical") {
        spec.linearizer = Linearizer::analytical();
    } else {
        try {
            spec.linearizer = Linearizer::statistical(parse_rule(entry, lin_kind, context));
        } catch (const Error& e) {
            fail(context, e.what());
        }
    }

    const json& cls = require(entry, "class", context);
    if (!cls.is_string()) fail(context + ".class", "expected a string");
    const std::string cls_name = cls.get<std::string>();
    if (cls_name == "standard") {
        spec.policy.filter_class = FilterClass::Standard;
        spec.policy.max_iters = 1;
    } else if (cls_name == "iterated") {
        spec.policy.filter_class = FilterClass::Iterated;
    } else if (cls_name == "dynamically_iterated") {
        spec.policy.filter_class = FilterClass::DynamicallyIterated;
    } else {
        fail(context + ".class", "expected 'standard', 'iterated' or 'dynamically_iterated'");
    }
    if (entry.contains("max_iters")) spec.policy.max_iters = entry["max_iters"].get<int>();
    if (entry.contains("tol")) spec.policy.tol = entry["tol"].get<double>();
    if (entry.contains("damping")) spec.policy.damping = entry["damping"].get<double>();
    if (spec.policy.max_iters < 1) fail(context + ".max_iters", "must be >= 1");
    if (!(spec.policy.tol > 0.0)) fail(context + ".tol", "must be > 0");
    if (!(spec.policy.damping > 0.0) || spec.policy.damping > 1.0) {
        fail(context + ".damping", "must be in (0, 1]");
    }
    return spec;
}

json density_to_json(const GaussianDensity& d) {
    json obj;
    obj["mean"] = std::vector<double>(d.mean.data(), d.mean.data() + d.mean.size());
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < d.cov.rows(); ++i) {
        rows.emplace_back(d.cov.row(i).begin(), d.cov.row(i).end());
    }
    obj["cov"] = rows;
    return obj;
}

json scenario_to_json(const Scenario& sc) {
    json obj;
    obj["n_steps"] = sc.n_steps;
    obj["dt"] = sc.dt;
    if (const auto* ncv = std::get_if<NearlyConstantVelocity>(&sc.dynamics)) {
        obj["dynamics"] = {{"type", "ncv"}, {"q", ncv->accel_psd}};
    } else {
        const auto& ct = std::get<CoordinatedTurn>(sc.dynamics);
        obj["dynamics"] = {{"type", "ct"}, {"q", ct.accel_psd}, {"turn_rate_noise", ct.turn_rate_psd}};
    }
    obj["sensors"] = json::array();
    for (const Sensor& s : sc.sensors) {
        json sensor;
        sensor["position"] = {s.position(0), s.position(1)};
        if (const auto* rb = std::get_if<RangeBearingSensor>(&s.kind)) {
            sensor["type"] = "range_bearing";
            sensor["sigma_range"] = rb->sigma_range;
            sensor["sigma_bearing"] = rb->sigma_bearing;
        } else if (const auto* ro = std::get_if<RangeOnlySensor>(&s.kind)) {
            sensor["type"] = "range_only";
            sensor["sigma_range"] = ro->sigma_range;
        } else {
            sensor["type"] = "position";
            sensor["sigma"] = std::get<PositionSensor>(s.kind).sigma;
        }
        obj["sensors"].push_back(sensor);
    }
    obj["init_truth"] = density_to_json(sc.init_truth);
    obj["init_filter"] = density_to_json(sc.init_filter);
    return obj;
}

bool rule_equal(const QuadratureRule& a, const QuadratureRule& b);

json filter_to_json(const FilterSpec& spec) {
    // Zoo entries round-trip as their names.
    for (const std::string& name : zoo_names()) {
        if (spec.name != name) continue;
        auto [lin, policy] = filter_zoo(name);
        if (lin.kind == spec.linearizer.kind &&
            (lin.kind == LinearizerKind::Analytical ||
             rule_equal(lin.rule, spec.linearizer.rule)) &&
            policy.filter_class == spec.policy.filter_class &&
            policy.max_iters == spec.policy.max_iters && policy.tol == spec.policy.tol &&
            policy.damping == spec.policy.damping) {
            return json(name);
        }
    }
    json obj;
    obj["name"] = spec.name;
    if (spec.linearizer.kind == LinearizerKind::Analytical) {
        obj["linearizer"] = "analytical";
    } else if (const auto* ut = std::get_if<UnscentedRule>(&spec.linearizer.rule.kind)) {
        obj["linearizer"] = "unscented";
        obj["alpha"] = ut->alpha;
        obj["beta"] = ut->beta;
        if (ut->kappa) obj["kappa"] = *ut->kappa;
    } else if (const auto* mc = std::get_if<MonteCarloRule>(&spec.linearizer.rule.kind)) {
        obj["linearizer"] = "monte_carlo";
        obj["sample_count"] = mc->sample_count;
        obj["quadrature_seed"] = mc->seed;
    } else {
        obj["linearizer"] = "cubature";
    }
    switch (spec.policy.filter_class) {
        case FilterClass::Standard: obj["class"] = "standard"; break;
        case FilterClass::Iterated: obj["class"] = "iterated"; break;
        case FilterClass::DynamicallyIterated: obj["class"] = "dynamically_iterated"; break;
    }
    obj["max_iters"] = spec.policy.max_iters;
    obj["tol"] = spec.policy.tol;
    obj["damping"] = spec.policy.damping;
    return obj;
}

bool rule_equal(const QuadratureRule& a, const QuadratureRule& b) {
    if (a.kind.index() != b.kind.index()) return false;
    if (const auto* ua = std::get_if<UnscentedRule>(&a.kind)) {
        const auto& ub = std::get<UnscentedRule>(b.kind);
        return ua->alpha == ub.alpha && ua->beta == ub.beta && ua->kappa == ub.kappa;
    }
    if (const auto* ma = std::get_if<MonteCarloRule>(&a.kind)) {
        const auto& mb = std::get<MonteCarloRule>(b.kind);
        return ma->sample_count == mb.sample_count && ma->seed == mb.seed;
    }
    return true;
}

bool sensor_equal(const Sensor& a, const Sensor& b) {
    if (a.position != b.position || a.kind.index() != b.kind.index()) return false;
    if (const auto* ra = std::get_if<RangeBearingSensor>(&a.kind)) {
        const auto& rb = std::get<RangeBearingSensor>(b.kind);
        return ra->sigma_range == rb.sigma_range && ra->sigma_bearing == rb.sigma_bearing;
    }
    if (const auto* ra = std::get_if<RangeOnlySensor>(&a.kind)) {
        return ra->sigma_range == std::get<RangeOnlySensor>(b.kind).sigma_range;
    }
    return std::get<PositionSensor>(a.kind).sigma == std::get<PositionSensor>(b.kind).sigma;
}

}  // namespace

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    if (a.n_mc != b.n_mc || a.base_seed != b.base_seed || a.output_dir != b.output_dir ||
        a.propagate_smoothed != b.propagate_smoothed) {
        return false;
    }
    const Scenario& sa = a.scenario;
    const Scenario& sb = b.scenario;
    if (sa.n_steps != sb.n_steps || sa.dt != sb.dt ||
        sa.dynamics.index() != sb.dynamics.index() || sa.sensors.size() != sb.sensors.size()) {
        return false;
    }
    if (const auto* na = std::get_if<NearlyConstantVelocity>(&sa.dynamics)) {
        if (na->accel_psd != std::get<NearlyConstantVelocity>(sb.dynamics).accel_psd) return false;
    } else {
        const auto& ca = std::get<CoordinatedTurn>(sa.dynamics);
        const auto& cb = std::get<CoordinatedTurn>(sb.dynamics);
        if (ca.accel_psd != cb.accel_psd || ca.turn_rate_psd != cb.turn_rate_psd) return false;
    }
    for (std::size_t i = 0; i < sa.sensors.size(); ++i) {
        if (!sensor_equal(sa.sensors[i], sb.sensors[i])) return false;
    }
    if (sa.init_truth.mean != sb.init_truth.mean || sa.init_truth.cov != sb.init_truth.cov ||
        sa.init_filter.mean != sb.init_filter.mean || sa.init_filter.cov != sb.init_filter.cov) {
        return false;
    }
    if (a.filters.size() != b.filters.size()) return false;
    for (std::size_t i = 0; i < a.filters.size(); ++i) {
        const FilterSpec& fa = a.filters[i];
        const FilterSpec& fb = b.filters[i];
        if (fa.name != fb.name || fa.linearizer.kind != fb.linearizer.kind ||
            fa.policy.filter_class != fb.policy.filter_class ||
            fa.policy.max_iters != fb.policy.max_iters || fa.policy.tol != fb.policy.tol ||
            fa.policy.damping != fb.policy.damping) {
            return false;
        }
        if (fa.linearizer.kind == LinearizerKind::Statistical &&
            !rule_equal(fa.linearizer.rule, fb.linearizer.rule)) {
            return false;
        }
    }
    return true;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        fail("config", std::string("parse error: ") + e.what());
    }
    if (!root.is_object()) fail("config", "top level must be an object");
    reject_unknown_keys(root,
                        {"scenario", "filters", "n_mc", "base_seed", "output_dir",
                         "propagate_smoothed"},
                        "config");

    ExperimentConfig cfg;
    cfg.scenario = parse_scenario(require(root, "scenario", "config"), "config.scenario");

    const json& filters = require(root, "filters", "config");
    if (!filters.is_array() || filters.empty()) {
        fail("config.filters", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < filters.size(); ++i) {
        std::ostringstream os;
        os << "config.filters[" << i << "]";
        cfg.filters.push_back(parse_filter(filters[i], os.str()));
    }

    const json& n_mc = require(root, "n_mc", "config");
    if (!n_mc.is_number_integer()) fail("config.n_mc", "expected an integer");
    cfg.n_mc = n_mc.get<int>();
    if (cfg.n_mc < 1) fail("config.n_mc", "must be >= 1");

    const json& seed = require(root, "base_seed", "config");
    if (!seed.is_number_integer()) fail("config.base_seed", "expected an integer");
    cfg.base_seed = seed.get<std::uint64_t>();

    const json& outdir = require(root, "output_dir", "config");
    if (!outdir.is_string()) fail("config.output_dir", "expected a string");
    cfg.output_dir = outdir.get<std::string>();

    if (root.contains("propagate_smoothed")) {
        if (!root["propagate_smoothed"].is_boolean()) {
            fail("config.propagate_smoothed", "expected a boolean");
        }
        cfg.propagate_smoothed = root["propagate_smoothed"].get<bool>();
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config_text(buffer.str());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
}

std::string serialize_config(const ExperimentConfig& config) {
    json root;
    root["scenario"] = scenario_to_json(config.scenario);
    root["filters"] = json::array();
    for (const FilterSpec& f : config.filters) root["filters"].push_back(filter_to_json(f));
    root["n_mc"] = config.n_mc;
    root["base_seed"] = config.base_seed;
    root["output_dir"] = config.output_dir;
    root["propagate_smoothed"] = config.propagate_smoothed;
    return root.dump(2) + "\n";
}

}  // namespace ulf
