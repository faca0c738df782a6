#pragma once

#include <Eigen/Core>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "crt/cli/checks.hpp"
#include "crt/cli/config.hpp"
#include "crt/discrete.hpp"
#include "crt/io.hpp"
#include "crt/parallel.hpp"
#include "crt/recon.hpp"
#include "crt/verification.hpp"

namespace crt::cli {

/// Writes files under the output directory and remembers their names.
class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_)) throw IoError("cannot create output directory " + dir_);
    }

    std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

    void text(const std::string& name, const std::string& body) {
        io::detail::write_file(path(name), body);
        names_.push_back(name);
    }

    void field(const std::string& name, const ScalarField3& f) {
        for (double v : f.values())
            if (!std::isfinite(v)) throw NumericalError("field " + name + " has non-finite values");
        io::write_field(path(name), f);
        names_.push_back(name);
    }

    void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

    const std::vector<std::string>& names() const { return names_; }

private:
    std::string dir_;
    std::vector<std::string> names_;
};

struct RunSummary {
    json summary = json::object();
};

namespace detail {

inline std::string indexed(const std::string& stem, std::size_t i, const std::string& ext) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%03zu", i);
    return stem + buf + ext;
}

inline std::string hemifield_csv(const HemiField& h) {
    std::string out = "y1,y2,pf,phi\n";
    for (std::size_t j = 0; j < h.n(); ++j)
        for (std::size_t i = 0; i < h.n(); ++i) {
            if (!h.retained[i + h.n() * j]) continue;
            out += io::fmt17(h.pf.node(i)) + ',' + io::fmt17(h.pf.node(j)) + ',' + io::fmt17(h.pf.at(i, j)) + ',' +
                   io::fmt17(h.phi.at(i, j)) + '\n';
        }
    return out;
}

inline json vector_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
        const std::size_t end = line.find(',', pos);
        cells.push_back(line.substr(pos, end - pos));
        if (end == std::string::npos) break;
        pos = end + 1;
    }
    return cells;
}

}  // namespace detail

inline void run_phantom(const RunConfig& c, Outputs& out, RunSummary& s) {
    const ScalarField3 f = rasterize(c.phantom, c.grid);
    out.field("phantom.field", f);
    s.summary["voxels"] = f.values().size();
    s.summary["upper_half"] = f.upper_half();
}

inline void run_project(const RunConfig& c, Outputs& out, RunSummary& s) {
    ConeLattice lat;
    if (!c.project_input.empty()) {
        lat = conical_forward(io::read_field(c.project_input), c.lattice, c.quadrature);
    } else {
        lat = conical_forward(c.phantom, c.lattice, c.quadrature);
    }
    for (double v : lat.data())
        if (!std::isfinite(v)) throw NumericalError("project: non-finite sinogram value");
    out.text("sinogram.csv", io::encode_sinogram(lat));
    s.summary["samples"] = lat.data().size();
}

inline void run_hemifield(const RunConfig& c, Outputs& out, RunSummary& s) {
    const std::size_t n = c.hemifield_disk_nodes;
    if (!c.hemifield_input.empty()) {
        const ConeLattice lat = io::read_sinogram(c.hemifield_input);
        for (std::size_t iu = 0; iu < lat.u_nodes().size(); ++iu)
            out.text(detail::indexed("hemifield_u", iu, ".csv"), detail::hemifield_csv(invert_q(lat, iu, n)));
        s.summary["source"] = "sinogram";
        s.summary["u_nodes"] = detail::vector_json(lat.u_nodes());
    } else {
        for (std::size_t iu = 0; iu < c.lattice.u_nodes.size(); ++iu)
            out.text(detail::indexed("hemifield_u", iu, ".csv"),
                     detail::hemifield_csv(compute_hemifield(c.phantom, c.lattice.u_nodes[iu], n, c.quadrature)));
        s.summary["source"] = "phantom";
        s.summary["u_nodes"] = detail::vector_json(c.lattice.u_nodes);
    }
    s.summary["disk_nodes"] = n;
}

inline void run_verify(const RunConfig& c, Outputs& out, RunSummary& s) {
    const auto rows = all_checks(c);
    std::string csv = "check,params,lhs,rhs,residual,pass\n";
    std::size_t failed = 0, skipped = 0;
    for (const auto& r : rows) {
        csv += r.check + ',' + r.params + ',' + io::fmt17(r.lhs) + ',' + io::fmt17(r.rhs) + ',' + io::fmt17(r.residual) +
               ',' + to_string(r.outcome) + '\n';
        if (r.outcome == Outcome::fail) ++failed;
        if (r.outcome == Outcome::skip) ++skipped;
    }
    out.text("verify.csv", csv);
    s.summary["checks"] = rows.size();
    s.summary["failed"] = failed;
    s.summary["skipped"] = skipped;
}

inline Scenario make_scenario(const RunConfig& c) {
    const auto& sc = c.scenario;
    switch (sc.kind) {
        case ScenarioKind::directions: return direction_scenario(sc.angles, sc.grid_n ? sc.grid_n : 8);
        case ScenarioKind::vertices: return vertex_scenario(sc.vertices);
        case ScenarioKind::local: return local_scenario(sc.grid_n ? sc.grid_n : 12);
        case ScenarioKind::full: break;
    }
    Scenario full;
    full.grid = c.grid;
    full.lattice = c.lattice;
    return full;
}

inline void run_nullspace(const RunConfig& c, Outputs& out, RunSummary& s) {
    const Scenario sc = make_scenario(c);
    AssemblyOptions opt;
    opt.max_entries = c.scenario.max_entries;
    opt.seed = c.seed;
    opt.quadrature = c.quadrature;
    const RestrictedOperator op = assemble(sc, opt);
    SpectrumReport rep = svd_nullspace(op, c.scenario.threshold);

    std::string spectrum = "index,sigma\n";
    for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i)
        spectrum += std::to_string(i) + ',' + io::fmt17(rep.singular_values(i)) + '\n';
    out.text("spectrum.csv", spectrum);

    if (sc.kind == ScenarioKind::local) rep.outside_w = nullspace_support(rep, RegionW(sc.lattice.u_nodes, sc.U), op);
    if (c.scenario.write_null_fields)
        for (Eigen::Index k = 0; k < rep.null_basis.cols(); ++k)
            out.field(detail::indexed("null_", static_cast<std::size_t>(k), ".field"),
                      op.extend(rep.null_basis.col(k)));

    const auto dir = direction_set_rank(sc.lattice.beta_nodes, c.scenario.degree);
    json j{{"scenario", to_string(sc.kind)},
           {"rank", rep.rank},
           {"threshold", rep.threshold},
           {"outside_W_fractions", detail::vector_json(rep.outside_w)},
           {"columns", op.n_cols()},
           {"rows", op.n_rows()},
           {"null_dimension", rep.null_basis.cols()},
           {"sigma_ratio", rep.ratio_min()},
           {"dropped_rim", op.dropped_rim},
           {"dropped_mask", op.dropped_mask},
           {"dropped_budget", op.dropped_budget},
           {"direction_set", {{"degree", c.scenario.degree}, {"ranks", dir.ranks}, {"nondegenerate", dir.nondegenerate}}}};
    out.json_file("nullspace.json", j);
    s.summary["rank"] = rep.rank;
    s.summary["columns"] = op.n_cols();
}

inline void run_reconstruct(const RunConfig& c, Outputs& out, RunSummary& s) {
    const ConeLattice lat = io::read_sinogram(c.recon.input);
    const ReconResult res = reconstruct(lat, c.grid, c.recon.options);
    out.field("reconstruction.field", res.field);
    for (std::size_t i = 0; i < res.hemifields.size(); ++i)
        out.text(detail::indexed("hemifield_u", i, ".csv"), detail::hemifield_csv(res.hemifields[i]));
    json j{{"iterations", res.solve.cgls.iterations},
           {"residuals", detail::vector_json(res.solve.cgls.residuals)},
           {"converged", res.solve.cgls.converged},
           {"stagnated", res.solve.cgls.stagnated},
           {"rows", res.solve.rows},
           {"dropped_rows", res.solve.dropped_rows},
           {"disk_nodes", c.recon.options.disk_nodes},
           {"rank_check", {{"enabled", c.recon.options.solve.rank_check},
                           {"ratio", res.solve.rank.ratio},
                           {"passed", res.solve.rank.passed}}}};
    if (c.recon.reference) {
        const ScalarField3 ref = rasterize(*c.recon.reference, c.grid);
        j["errors"] = {{"relative_l2", relative_l2(res.field.values(), ref.values())}};
        s.summary["relative_l2"] = j["errors"]["relative_l2"];
    }
    out.json_file("reconstruction.json", j);
    s.summary["iterations"] = res.solve.cgls.iterations;
}

/// Each input CSV becomes one gnuplot index block: a commented header line,
/// whitespace-separated columns, a blank line whenever the first column
/// changes, and two blank lines between inputs.
inline void run_report(const RunConfig& c, Outputs& out, RunSummary& s) {
    std::string dat;
    for (std::size_t k = 0; k < c.report_inputs.size(); ++k) {
        const std::string& path = c.report_inputs[k];
        std::istringstream in(io::detail::read_file(path));
        std::string line;
        if (!std::getline(in, line)) throw IoError("report: empty file " + path);
        if (k > 0) dat += "\n\n";
        const auto header = detail::split_csv(line);
        dat += "# " + std::filesystem::path(path).filename().string() + "\n#";
        for (const auto& h : header) dat += ' ' + h;
        dat += '\n';
        std::string prev_first;
        bool first_row = true;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const auto cells = detail::split_csv(line);
            if (cells.size() != header.size())
                throw IoError("report: " + path + " line " + std::to_string(lineno) + ": column count mismatch");
            if (!first_row && cells[0] != prev_first) dat += '\n';
            first_row = false;
            prev_first = cells[0];
            for (std::size_t i = 0; i < cells.size(); ++i) dat += (i ? " " : "") + cells[i];
            dat += '\n';
        }
    }
    out.text("report.dat", dat);
    s.summary["inputs"] = c.report_inputs.size();
}

inline json library_versions() {
    return {{"crt", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__}};
}

/// Runs a validated config and writes its artifacts plus manifest.json. The
/// manifest is the only artifact that varies between identical runs (wall time).
inline json run(const RunConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    set_threads(c.threads);
    Outputs out(c.output);
    RunSummary s;
    if (c.command == "phantom") run_phantom(c, out, s);
    else if (c.command == "project") run_project(c, out, s);
    else if (c.command == "hemifield") run_hemifield(c, out, s);
    else if (c.command == "verify") run_verify(c, out, s);
    else if (c.command == "nullspace") run_nullspace(c, out, s);
    else if (c.command == "reconstruct") run_reconstruct(c, out, s);
    else if (c.command == "report") run_report(c, out, s);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json sources = json::object();
    for (const auto& [k, v] : c.sources) sources[k] = v;
    json manifest{{"crt_version", kVersion},
                  {"command", c.command},
                  {"config", c.document},
                  {"sources", sources},
                  {"versions", library_versions()},
                  {"threads", threads()},
                  {"artifacts", out.names()},
                  {"summary", s.summary},
                  {"wall_time_s", wall}};
    io::detail::write_file(out.path("manifest.json"), manifest.dump(2) + "\n");
    return manifest;
}

/// A config file may be a plain config document or a manifest written by a
/// previous run; for a manifest its "config" member is used.
inline json load_config_file(const std::string& path) {
    json j;
    try {
        j = json::parse(io::detail::read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path + " is not valid JSON (byte " + std::to_string(e.byte) + ")");
    }
    if (j.is_object() && j.contains("crt_version") && j.contains("config")) return j.at("config");
    return j;
}

/// Maps an exception to its exit status and prints a one-line error.
template <class Fn>
int guarded(Fn&& fn, std::ostream& err = std::cerr) {
    auto report = [&](const char* kind, const std::string& msg) {
        std::string line = msg;
        for (char& ch : line)
            if (ch == '\n' || ch == '\r') ch = ' ';
        err << "crt: error[" << kind << "]: " << line << '\n';
    };
    try {
        return fn();
    } catch (const ConfigError& e) {
        report("config", e.what());
        return 2;
    } catch (const NumericalError& e) {
        report("numerical", e.what());
        return 3;
    } catch (const IoError& e) {
        report("io", e.what());
        return 4;
    } catch (const json::exception& e) {
        report("config", e.what());
        return 2;
    } catch (const std::bad_alloc&) {
        report("numerical", "out of memory");
        return 3;
    } catch (const std::exception& e) {
        report("numerical", e.what());
        return 3;
    }
}

}  // namespace crt::cli
