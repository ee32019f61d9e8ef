#pragma once

// Experiment configuration files (JSON) and line-delimited tube/report files.
//
// Tube files hold one JSON object per line. Step records carry
//   n, t, system, center, theta_lower, theta_upper, recentered, monotone_check
// where center is a list of row-major matrices (two 2x2 factors for the
// torus, one 3x3 for SO(3)). A run that aborts appends one final record
//   {"truncated": true, "failed_step": k, "error_kind": ..., "message": ...}.
// Doubles are written with the shortest round-trip representation, so a
// re-read tube is bit-identical to the one in memory.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lie_group.hpp"
#include "reach.hpp"
#include "systems.hpp"
#include "validation.hpp"

namespace lie_reach::io {

using json = nlohmann::json;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string system;
    // torus
    Vec<2> omega{5.0, 2.0};
    // so3
    So3Control control;

    std::vector<double> center;
    std::vector<double> box_lower;
    std::vector<double> box_upper;
    double h = 0.01;
    double horizon = 0.0;
    std::string tableau = "rk4";
    ReachMode mode = ReachMode::embedding;
    RecenterPolicy recenter = RecenterPolicy::always();
    TruncationOrder order = TruncationOrder::third;
    std::uint64_t seed = 0;

    [[nodiscard]] int steps() const { return static_cast<int>(std::lround(horizon / h)); }
};

namespace detail {

inline std::vector<double> read_vector(const json &j, const char *key, std::size_t expected)
{
    if (!j.is_array()) throw config_error(std::string("'") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto &x : j) {
        if (!x.is_number()) throw config_error(std::string("'") + key + "' must be an array of numbers");
        out.push_back(x.get<double>());
    }
    if (out.size() != expected) {
        throw config_error(std::string("'") + key + "' must have " + std::to_string(expected) + " entries, got "
                           + std::to_string(out.size()));
    }
    return out;
}

inline double read_number(const json &j, const char *key)
{
    if (!j.is_number()) throw config_error(std::string("'") + key + "' must be a number");
    return j.get<double>();
}

inline std::string read_string(const json &j, const char *key)
{
    if (!j.is_string()) throw config_error(std::string("'") + key + "' must be a string");
    return j.get<std::string>();
}

template <int N>
std::vector<double> to_std(const Vec<N> &v)
{
    return {v.data(), v.data() + N};
}

} // namespace detail

// Missing keys fall back to the matching case study; unknown keys are
// rejected.
inline ExperimentConfig parse_config(const json &j)
{
    if (!j.is_object()) throw config_error("config must be a JSON object");
    if (!j.contains("system")) throw config_error("config is missing 'system'");

    ExperimentConfig cfg;
    cfg.system = detail::read_string(j.at("system"), "system");

    std::set<std::string> allowed{"system", "center", "box_lower", "box_upper", "h", "T",
                                  "tableau", "mode", "recenter", "recenter_width", "order", "seed"};
    std::size_t dim = 0;
    if (cfg.system == "torus") {
        const auto cs = torus_case_study();
        allowed.insert("omega");
        dim = 2;
        cfg.omega = {cs.system.omega1, cs.system.omega2};
        cfg.center = detail::to_std(Torus2::log(cs.initial.center));
        cfg.box_lower = detail::to_std(cs.initial.box.lower());
        cfg.box_upper = detail::to_std(cs.initial.box.upper());
        cfg.h = cs.config.h;
        cfg.horizon = cs.config.steps * cs.config.h;
        cfg.mode = cs.config.mode;
        cfg.order = cs.config.order;
    } else if (cfg.system == "so3") {
        const auto cs = so3_case_study();
        allowed.insert("control");
        dim = 3;
        cfg.control = cs.system.control;
        cfg.center = {0.0, 0.0, 0.0};
        cfg.box_lower = detail::to_std(cs.initial.box.lower());
        cfg.box_upper = detail::to_std(cs.initial.box.upper());
        cfg.h = cs.config.h;
        cfg.horizon = cs.config.steps * cs.config.h;
        cfg.mode = cs.config.mode;
        cfg.order = cs.config.order;
    } else {
        throw config_error("unknown system '" + cfg.system + "' (expected 'torus' or 'so3')");
    }

    for (const auto &[key, _] : j.items()) {
        if (!allowed.contains(key)) throw config_error("unknown key '" + key + "' for system '" + cfg.system + "'");
    }

    if (j.contains("omega")) {
        const auto w = detail::read_vector(j.at("omega"), "omega", 2);
        cfg.omega = {w[0], w[1]};
    }
    if (j.contains("control")) {
        const auto &c = j.at("control");
        if (!c.is_object()) throw config_error("'control' must be an object");
        for (const auto &[key, _] : c.items()) {
            if (key != "kind" && key != "value" && key != "disturbance") {
                throw config_error("unknown key 'control." + key + "'");
            }
        }
        if (c.contains("kind")) {
            const auto kind = detail::read_string(c.at("kind"), "control.kind");
            if (kind == "case_study") {
                cfg.control.kind = So3Control::Kind::case_study;
            } else if (kind == "constant") {
                cfg.control.kind = So3Control::Kind::constant;
            } else {
                throw config_error("unknown control kind '" + kind + "'");
            }
        }
        if (c.contains("value")) {
            const auto v = detail::read_vector(c.at("value"), "control.value", 3);
            cfg.control.constant = {v[0], v[1], v[2]};
        }
        if (c.contains("disturbance")) {
            cfg.control.disturbance = detail::read_number(c.at("disturbance"), "control.disturbance");
            if (!(cfg.control.disturbance >= 0.0)) throw config_error("control.disturbance must be >= 0");
        }
    }
    if (j.contains("center")) cfg.center = detail::read_vector(j.at("center"), "center", dim);
    if (j.contains("box_lower")) cfg.box_lower = detail::read_vector(j.at("box_lower"), "box_lower", dim);
    if (j.contains("box_upper")) cfg.box_upper = detail::read_vector(j.at("box_upper"), "box_upper", dim);
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(cfg.box_lower[i] <= cfg.box_upper[i])) throw config_error("box_lower must not exceed box_upper");
    }
    if (j.contains("h")) cfg.h = detail::read_number(j.at("h"), "h");
    if (!(cfg.h > 0.0)) throw config_error("'h' must be positive");
    if (j.contains("T")) cfg.horizon = detail::read_number(j.at("T"), "T");
    if (!(cfg.horizon >= 0.0)) throw config_error("'T' must be non-negative");
    if (std::abs(cfg.steps() * cfg.h - cfg.horizon) > 1e-9 * std::max(1.0, cfg.horizon)) {
        throw config_error("'T' must be an integer multiple of 'h'");
    }
    if (j.contains("tableau")) {
        cfg.tableau = detail::read_string(j.at("tableau"), "tableau");
        try {
            (void)ButcherTableau::from_name(cfg.tableau);
        } catch (const std::invalid_argument &e) {
            throw config_error(e.what());
        }
    }
    if (j.contains("mode")) {
        const auto mode = detail::read_string(j.at("mode"), "mode");
        if (mode == "monotone") {
            cfg.mode = ReachMode::monotone;
        } else if (mode == "embedding") {
            cfg.mode = ReachMode::embedding;
        } else {
            throw config_error("unknown mode '" + mode + "' (expected 'monotone' or 'embedding')");
        }
    }
    if (j.contains("recenter")) {
        const auto policy = detail::read_string(j.at("recenter"), "recenter");
        if (policy == "always") {
            cfg.recenter = RecenterPolicy::always();
        } else if (policy == "never") {
            cfg.recenter = RecenterPolicy::never();
        } else if (policy == "width") {
            if (!j.contains("recenter_width")) throw config_error("recenter 'width' needs 'recenter_width'");
            const double w = detail::read_number(j.at("recenter_width"), "recenter_width");
            if (!(w > 0.0)) throw config_error("'recenter_width' must be positive");
            cfg.recenter = RecenterPolicy::width(w);
        } else {
            throw config_error("unknown recenter policy '" + policy + "'");
        }
    }
    if (j.contains("recenter_width") && cfg.recenter.kind != RecenterPolicy::Kind::width) {
        throw config_error("'recenter_width' is only valid with recenter 'width'");
    }
    if (j.contains("order")) {
        const auto &o = j.at("order");
        if (!o.is_number_integer()) throw config_error("'order' must be 2 or 3");
        try {
            cfg.order = truncation_order_from_int(o.get<int>());
        } catch (const std::invalid_argument &e) {
            throw config_error(e.what());
        }
    }
    if (j.contains("seed")) {
        const auto &s = j.at("seed");
        if (!s.is_number_unsigned()) throw config_error("'seed' must be a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error &e) {
        throw config_error("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

inline ReachConfig reach_config(const ExperimentConfig &cfg)
{
    ReachConfig rc;
    rc.h = cfg.h;
    rc.steps = cfg.steps();
    rc.tableau = ButcherTableau::from_name(cfg.tableau);
    rc.mode = cfg.mode;
    rc.recenter = cfg.recenter;
    rc.order = cfg.order;
    return rc;
}

// Builds the typed case study for cfg and returns fn(case_study).
template <class Fn>
decltype(auto) with_experiment(const ExperimentConfig &cfg, Fn &&fn)
{
    if (cfg.system == "torus") {
        CaseStudy<TorusConsensus> cs;
        cs.system = TorusConsensus{cfg.omega[0], cfg.omega[1]};
        cs.config = reach_config(cfg);
        cs.initial.center = Torus2::exp(Vec<2>{cfg.center[0], cfg.center[1]});
        cs.initial.box = IntervalVector<2>(Vec<2>{cfg.box_lower[0], cfg.box_lower[1]},
                                           Vec<2>{cfg.box_upper[0], cfg.box_upper[1]});
        return fn(cs);
    }
    CaseStudy<So3Attitude> cs;
    cs.system.control = cfg.control;
    cs.config = reach_config(cfg);
    cs.initial.center = So3::exp(Vec<3>{cfg.center[0], cfg.center[1], cfg.center[2]});
    cs.initial.box = IntervalVector<3>(Vec<3>{cfg.box_lower[0], cfg.box_lower[1], cfg.box_lower[2]},
                                       Vec<3>{cfg.box_upper[0], cfg.box_upper[1], cfg.box_upper[2]});
    return fn(cs);
}

// ---------------------------------------------------------------------------
// Tube records
// ---------------------------------------------------------------------------

inline json center_to_json(const Torus2::Element &g)
{
    json out = json::array();
    for (const auto &r : g) out.push_back({r(0, 0), r(0, 1), r(1, 0), r(1, 1)});
    return out;
}

inline json center_to_json(const So3::Element &r)
{
    json m = json::array();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) m.push_back(r(i, k));
    return json::array({m});
}

inline Torus2::Element center_from_json(const json &j, const Torus2 &)
{
    if (!j.is_array() || j.size() != 2) throw config_error("torus center must hold two 2x2 matrices");
    Torus2::Element g;
    for (std::size_t f = 0; f < 2; ++f) {
        const auto v = detail::read_vector(j[f], "center", 4);
        g[f] << v[0], v[1], v[2], v[3];
    }
    return g;
}

inline So3::Element center_from_json(const json &j, const So3 &)
{
    if (!j.is_array() || j.size() != 1) throw config_error("so3 center must hold one 3x3 matrix");
    const auto v = detail::read_vector(j[0], "center", 9);
    So3::Element r;
    r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    return r;
}

template <GroupModel G>
json tube_record(const TubeEntry<G> &e)
{
    json j;
    j["n"] = e.n;
    j["t"] = e.t;
    j["system"] = G::name;
    j["center"] = center_to_json(e.set.center);
    j["theta_lower"] = detail::to_std(e.set.box.lower());
    j["theta_upper"] = detail::to_std(e.set.box.upper());
    j["recentered"] = e.flags.recentered;
    j["monotone_check"] = e.flags.monotone_check ? json(*e.flags.monotone_check) : json(nullptr);
    return j;
}

template <GroupModel G>
void write_tube(std::ostream &out, const ReachTube<G> &tube)
{
    for (const auto &e : tube.entries) out << tube_record(e).dump() << '\n';
    if (tube.failure) {
        json j;
        j["truncated"] = true;
        j["failed_step"] = tube.failure->step;
        j["error_kind"] = tube.failure->kind;
        j["message"] = tube.failure->message;
        out << j.dump() << '\n';
    }
}

template <GroupModel G>
ReachTube<G> read_tube(std::istream &in)
{
    ReachTube<G> tube;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error &e) {
            throw config_error("tube line " + std::to_string(lineno) + " is not valid JSON: " + e.what());
        }
        if (j.value("truncated", false)) {
            tube.failure = StepFailure{j.at("failed_step").get<int>(), j.at("error_kind").get<std::string>(),
                                       j.at("message").get<std::string>()};
            continue;
        }
        if (j.at("system").get<std::string>() != G::name) {
            throw config_error("tube line " + std::to_string(lineno) + " is for system '"
                               + j.at("system").get<std::string>() + "', expected '" + G::name + "'");
        }
        TubeEntry<G> e;
        e.n = j.at("n").get<int>();
        e.t = j.at("t").get<double>();
        e.set.center = center_from_json(j.at("center"), G{});
        const auto lo = detail::read_vector(j.at("theta_lower"), "theta_lower", G::dim);
        const auto hi = detail::read_vector(j.at("theta_upper"), "theta_upper", G::dim);
        e.set.box = IntervalVector<G::dim>(Eigen::Map<const Vec<G::dim>>(lo.data()),
                                           Eigen::Map<const Vec<G::dim>>(hi.data()));
        e.flags.recentered = j.at("recentered").get<bool>();
        const auto &mc = j.at("monotone_check");
        if (!mc.is_null()) e.flags.monotone_check = mc.get<bool>();
        tube.entries.push_back(std::move(e));
    }
    return tube;
}

inline json report_to_json(const ValidationReport &r)
{
    json j;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["slack"] = r.slack;
    j["entries_checked"] = r.entries_checked;
    j["tube_truncated"] = r.tube_truncated;
    j["checkpoints"] = r.checkpoint_times;
    j["checkpoint_indices"] = r.checkpoint_indices;
    j["containment_fraction"] = r.containment_fraction;
    j["overall_fraction"] = r.overall_fraction;
    j["max_margin"] = r.max_margin;
    j["passed"] = r.passed();
    if (r.first_violation) {
        const auto &v = *r.first_violation;
        j["first_violation"] = {{"n", v.n}, {"t", v.t}, {"sample", v.sample},
                                {"margin", std::isfinite(v.margin) ? json(v.margin) : json("inf")},
                                {"diagnostic", v.diagnostic}};
    } else {
        j["first_violation"] = nullptr;
    }
    return j;
}

} // namespace lie_reach::io
