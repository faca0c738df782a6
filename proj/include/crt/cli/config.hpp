#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crt/discrete.hpp"
#include "crt/errors.hpp"
#include "crt/field.hpp"
#include "crt/lattice.hpp"
#include "crt/phantom.hpp"
#include "crt/quadrature.hpp"
#include "crt/recon.hpp"

namespace crt::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"phantom", "project", "hemifield", "verify",
                                            "nullspace", "reconstruct", "report"};
    return c;
}

/// The full default document. Every accepted key appears here; anything else
/// in a config file is rejected.
inline json default_document() {
    return json{
        {"command", "verify"},
        {"output", "out"},
        {"seed", 42},
        {"threads", 0},
        {"phantom", "reference_ball"},
        {"grid", {{"lo", {-0.5, 1.5, -0.5}}, {"hi", {0.5, 2.5, 0.5}}, {"dims", {12, 12, 12}}}},
        {"lattice",
         {{"u", {{"lo", -6.0}, {"hi", 6.0}, {"count", 16}}},
          {"beta", {{"count", 180}, {"turn", "full"}}},
          {"s", {{"count", 257}}}}},
        {"quadrature", {{"circle_nodes", 256}, {"ray_step", 0.0}}},
        {"hemifield", {{"disk_nodes", 41}, {"input", ""}}},
        {"project", {{"input", ""}}},
        {"verify",
         {{"disk_nodes", 601},
          {"degree", 8},
          {"j_max", 25},
          {"sigma_max", 4.0},
          {"sigma_count", 9},
          {"cauchy_shift", {0.0, 0.0, -1.0}},
          {"cauchy_u", 0.5},
          {"cauchy_omega", {0.0, 0.0, -1.0}},
          {"fit_degree", 4},
          {"fit_directions", 40}}},
        {"scenario",
         {{"name", "theorem2"},
          {"angles", 9},
          {"degree", 8},
          {"grid_n", 0},
          {"vertices", 8},
          {"threshold", 1e-8},
          {"max_entries", 10000000},
          {"write_null_fields", true}}},
        {"reconstruct",
         {{"input", ""},
          {"reference", nullptr},
          {"disk_nodes", 161},
          {"iterations", 10},
          {"tol", 1e-8},
          {"lambda", 0.0},
          {"rank_check", true},
          {"min_ratio", 1e-6},
          {"keep_hemifields", false}}},
        {"report", {{"inputs", json::array()}}},
    };
}

namespace detail {

inline void reject_unknown(const json& doc, const json& schema, const std::string& where) {
    if (!doc.is_object()) throw ConfigError("config: " + (where.empty() ? std::string("document") : where) + " must be an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string path = where.empty() ? it.key() : where + "." + it.key();
        if (!schema.contains(it.key())) throw ConfigError("config: unknown key '" + path + "'");
        const json& s = schema.at(it.key());
        if (s.is_object()) reject_unknown(it.value(), s, path);
    }
}

inline void merge(json& base, const json& over, const std::string& where, std::map<std::string, std::string>& sources,
                  const std::string& tag) {
    for (auto it = over.begin(); it != over.end(); ++it) {
        const std::string path = where.empty() ? it.key() : where + "." + it.key();
        if (base[it.key()].is_object() && it.value().is_object()) {
            merge(base[it.key()], it.value(), path, sources, tag);
        } else {
            base[it.key()] = it.value();
            sources[path] = tag;
        }
    }
}

template <class T>
T get(const json& doc, const std::string& dotted) {
    const json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', pos);
        node = &node->at(dotted.substr(pos, dot - pos));
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    try {
        return node->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: '" + dotted + "' has the wrong type");
    }
}

inline Vec3 vec3(const json& doc, const std::string& key) {
    const auto v = get<std::vector<double>>(doc, key);
    if (v.size() != 3) throw ConfigError("config: '" + key + "' must have 3 entries");
    return {v[0], v[1], v[2]};
}

inline std::size_t positive(const json& doc, const std::string& key) {
    const auto v = get<std::int64_t>(doc, key);
    if (v < 1) throw ConfigError("config: '" + key + "' must be >= 1");
    return static_cast<std::size_t>(v);
}

inline double finite(const json& doc, const std::string& key) {
    const auto v = get<double>(doc, key);
    if (!std::isfinite(v)) throw ConfigError("config: '" + key + "' must be finite");
    return v;
}

inline Vec3 vec3_of(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("phantom: '" + what + "' must be a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline BasePrimitive base_primitive(const json& p) {
    static const std::vector<std::string> ball_keys{"type", "center", "radius", "amplitude"};
    static const std::vector<std::string> gauss_keys{"type", "center", "width", "amplitude"};
    const std::string type = p.at("type").get<std::string>();
    const auto& keys = type == "ball" ? ball_keys : gauss_keys;
    for (auto it = p.begin(); it != p.end(); ++it)
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
            throw ConfigError("phantom: unknown key '" + it.key() + "' in " + type);
    if (type == "ball") {
        Ball b{vec3_of(p.at("center"), "center"), p.at("radius").get<double>(), p.value("amplitude", 1.0)};
        if (!(b.radius > 0.0)) throw ConfigError("phantom: ball radius must be positive");
        return b;
    }
    if (type == "gaussian") {
        Gaussian g{vec3_of(p.at("center"), "center"), p.at("width").get<double>(), p.value("amplitude", 1.0)};
        if (!(g.width > 0.0)) throw ConfigError("phantom: gaussian width must be positive");
        return g;
    }
    throw ConfigError("phantom: unknown primitive type '" + type + "'");
}

}  // namespace detail

/// A phantom given by name or as {"primitives": [...]}.
inline AnalyticPhantom parse_phantom(const json& j) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "zero") return AnalyticPhantom{};
        if (name == "reference_ball") return phantoms::reference_ball();
        if (name == "odd_ball") return phantoms::odd_ball();
        if (name == "gaussian_blob") return phantoms::gaussian_blob();
        if (name == "two_blobs") return phantoms::two_blobs();
        if (name == "half_ball_ball") return phantoms::half_ball_ball();
        throw ConfigError("phantom: unknown name '" + name + "'");
    }
    if (!j.is_object()) throw ConfigError("phantom: expected a name or an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "primitives") throw ConfigError("phantom: unknown key '" + it.key() + "'");
    AnalyticPhantom out;
    try {
        for (const auto& p : j.at("primitives")) {
            if (p.at("type").get<std::string>() == "odd_x2") {
                for (auto it = p.begin(); it != p.end(); ++it)
                    if (it.key() != "type" && it.key() != "base")
                        throw ConfigError("phantom: unknown key '" + it.key() + "' in odd_x2");
                out.add(OddX2{detail::base_primitive(p.at("base"))});
            } else {
                const BasePrimitive b = detail::base_primitive(p);
                std::visit([&](const auto& g) { out.add(g); }, b);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("phantom: ") + e.what());
    }
    return out;
}

struct VerifySettings {
    std::size_t disk_nodes = 601;
    int degree = 8;
    std::size_t j_max = 25;
    double sigma_max = 4.0;
    std::size_t sigma_count = 9;
    Vec3 cauchy_shift{0.0, 0.0, -1.0};
    double cauchy_u = 0.5;
    Vec3 cauchy_omega{0.0, 0.0, -1.0};
    int fit_degree = 4;
    std::size_t fit_directions = 40;
};

struct ScenarioSettings {
    ScenarioKind kind = ScenarioKind::directions;
    std::size_t angles = 9;
    int degree = 8;
    std::size_t grid_n = 0;  // 0: scenario default
    std::size_t vertices = 8;
    double threshold = 1e-8;
    std::size_t max_entries = 10'000'000;
    bool write_null_fields = true;
};

struct ReconSettings {
    std::string input;
    std::optional<AnalyticPhantom> reference;
    ReconOptions options;
};

/// Validated run configuration.
struct RunConfig {
    std::string command;
    std::string output;
    std::uint64_t seed = 42;
    unsigned threads = 0;
    AnalyticPhantom phantom;
    GridSpec grid;
    LatticeSpec lattice;
    QuadratureSpec quadrature;
    std::size_t hemifield_disk_nodes = 41;
    std::string hemifield_input;
    std::string project_input;
    VerifySettings verify;
    ScenarioSettings scenario;
    ReconSettings recon;
    std::vector<std::string> report_inputs;

    json document;                               // effective document, echoed in the manifest
    std::map<std::string, std::string> sources;  // dotted key -> "config" | "flag"
};

/// Builds the effective document: defaults, then the config file, then flags.
inline json layer(const json& file_doc, const json& flag_doc, std::map<std::string, std::string>& sources) {
    const json schema = default_document();
    json doc = schema;
    if (!file_doc.is_null()) {
        detail::reject_unknown(file_doc, schema, "");
        detail::merge(doc, file_doc, "", sources, "config");
    }
    if (!flag_doc.is_null()) {
        detail::reject_unknown(flag_doc, schema, "");
        detail::merge(doc, flag_doc, "", sources, "flag");
    }
    return doc;
}

/// Validates the whole document before any compute.
inline RunConfig parse_config(const json& doc) {
    using detail::finite;
    using detail::get;
    using detail::positive;
    detail::reject_unknown(doc, default_document(), "");
    RunConfig c;
    c.document = doc;

    c.command = get<std::string>(doc, "command");
    if (std::find(commands().begin(), commands().end(), c.command) == commands().end())
        throw ConfigError("config: unknown command '" + c.command + "'");
    c.output = get<std::string>(doc, "output");
    if (c.output.empty()) throw ConfigError("config: 'output' must be non-empty");
    const auto seed = get<std::int64_t>(doc, "seed");
    if (seed < 0) throw ConfigError("config: 'seed' must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    const auto threads = get<std::int64_t>(doc, "threads");
    if (threads < 0 || threads > 4096) throw ConfigError("config: 'threads' must be in [0, 4096]");
    c.threads = static_cast<unsigned>(threads);
    c.phantom = parse_phantom(doc.at("phantom"));

    const auto dims = get<std::vector<std::int64_t>>(doc, "grid.dims");
    if (dims.size() != 3) throw ConfigError("config: 'grid.dims' must have 3 entries");
    for (auto d : dims)
        if (d < 1) throw ConfigError("config: 'grid.dims' entries must be >= 1");
    const Vec3 lo = detail::vec3(doc, "grid.lo"), hi = detail::vec3(doc, "grid.hi");
    for (int a = 0; a < 3; ++a)
        if (!(hi[a] > lo[a])) throw ConfigError("config: 'grid.hi' must exceed 'grid.lo' on every axis");
    c.grid = GridSpec::covering(lo, hi, {static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]),
                                         static_cast<std::size_t>(dims[2])});
    c.grid.validate();

    const double ulo = finite(doc, "lattice.u.lo"), uhi = finite(doc, "lattice.u.hi");
    const std::size_t nu = positive(doc, "lattice.u.count");
    if (nu > 1 && !(uhi > ulo)) throw ConfigError("config: 'lattice.u.hi' must exceed 'lattice.u.lo'");
    const std::string turn = get<std::string>(doc, "lattice.beta.turn");
    const std::size_t nb = positive(doc, "lattice.beta.count");
    if (turn != "full" && turn != "half") throw ConfigError("config: 'lattice.beta.turn' must be full or half");
    const std::size_t ns = positive(doc, "lattice.s.count");
    if (ns < 2) throw ConfigError("config: 'lattice.s.count' must be >= 2");
    c.lattice = {linspace(ulo, uhi, nu), turn == "full" ? uniform_beta(nb) : half_turn_beta(nb), uniform_s(ns)};
    c.lattice.validate();

    c.quadrature.circle_nodes = positive(doc, "quadrature.circle_nodes");
    c.quadrature.ray_step = finite(doc, "quadrature.ray_step");
    if (c.quadrature.ray_step < 0.0) throw ConfigError("config: 'quadrature.ray_step' must be >= 0");

    c.hemifield_disk_nodes = positive(doc, "hemifield.disk_nodes");
    if (c.hemifield_disk_nodes < 2) throw ConfigError("config: 'hemifield.disk_nodes' must be >= 2");
    c.hemifield_input = get<std::string>(doc, "hemifield.input");
    c.project_input = get<std::string>(doc, "project.input");

    auto& v = c.verify;
    v.disk_nodes = positive(doc, "verify.disk_nodes");
    if (v.disk_nodes < 2) throw ConfigError("config: 'verify.disk_nodes' must be >= 2");
    v.degree = static_cast<int>(positive(doc, "verify.degree"));
    v.j_max = positive(doc, "verify.j_max");
    v.sigma_max = finite(doc, "verify.sigma_max");
    v.sigma_count = positive(doc, "verify.sigma_count");
    v.cauchy_shift = detail::vec3(doc, "verify.cauchy_shift");
    v.cauchy_u = finite(doc, "verify.cauchy_u");
    v.cauchy_omega = detail::vec3(doc, "verify.cauchy_omega");
    if (!(norm(v.cauchy_omega) > 0.0)) throw ConfigError("config: 'verify.cauchy_omega' must be nonzero");
    v.fit_degree = static_cast<int>(get<std::int64_t>(doc, "verify.fit_degree"));
    if (v.fit_degree < 0 || v.fit_degree > 12) throw ConfigError("config: 'verify.fit_degree' must be in [0, 12]");
    v.fit_directions = positive(doc, "verify.fit_directions");

    auto& s = c.scenario;
    s.kind = scenario_from_string(get<std::string>(doc, "scenario.name"));
    s.angles = positive(doc, "scenario.angles");
    s.degree = static_cast<int>(get<std::int64_t>(doc, "scenario.degree"));
    if (s.degree < 0) throw ConfigError("config: 'scenario.degree' must be >= 0");
    const auto gn = get<std::int64_t>(doc, "scenario.grid_n");
    if (gn < 0) throw ConfigError("config: 'scenario.grid_n' must be >= 0");
    s.grid_n = static_cast<std::size_t>(gn);
    s.vertices = positive(doc, "scenario.vertices");
    s.threshold = finite(doc, "scenario.threshold");
    if (!(s.threshold > 0.0)) throw ConfigError("config: 'scenario.threshold' must be positive");
    s.max_entries = positive(doc, "scenario.max_entries");
    s.write_null_fields = get<bool>(doc, "scenario.write_null_fields");

    auto& r = c.recon;
    r.input = get<std::string>(doc, "reconstruct.input");
    if (!doc.at("reconstruct").at("reference").is_null()) r.reference = parse_phantom(doc.at("reconstruct").at("reference"));
    r.options.disk_nodes = positive(doc, "reconstruct.disk_nodes");
    if (r.options.disk_nodes < 2) throw ConfigError("config: 'reconstruct.disk_nodes' must be >= 2");
    r.options.solve.cgls.iterations = static_cast<int>(positive(doc, "reconstruct.iterations"));
    r.options.solve.cgls.tol = finite(doc, "reconstruct.tol");
    r.options.solve.cgls.lambda = finite(doc, "reconstruct.lambda");
    if (r.options.solve.cgls.lambda < 0.0) throw ConfigError("config: 'reconstruct.lambda' must be >= 0");
    r.options.solve.rank_check = get<bool>(doc, "reconstruct.rank_check");
    r.options.solve.min_ratio = finite(doc, "reconstruct.min_ratio");
    r.options.keep_hemifields = get<bool>(doc, "reconstruct.keep_hemifields");

    c.report_inputs = get<std::vector<std::string>>(doc, "report.inputs");

    if (c.command == "reconstruct" && r.input.empty())
        throw ConfigError("config: reconstruct needs 'reconstruct.input' (a sinogram CSV)");
    if (c.command == "report" && c.report_inputs.empty())
        throw ConfigError("config: report needs at least one entry in 'report.inputs'");
    return c;
}

}  // namespace crt::cli
