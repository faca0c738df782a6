#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crt/cli/config.hpp"
#include "crt/cli/run.hpp"

using crt::cli::json;

namespace {

template <class T>
void put(json& doc, const std::string& section, const std::string& key, const std::optional<T>& v) {
    if (!v) return;
    if (section.empty()) doc[key] = *v;
    else doc[section][key] = *v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conical Radon transform: projection, verification, null-space and reconstruction runs", "crt"};
    app.require_subcommand(0, 1);

    std::optional<std::string> config_path, output, phantom;
    std::optional<std::int64_t> seed, threads, u_count, beta_count, s_count;
    std::optional<double> u_lo, u_hi;
    std::optional<std::string> beta_turn;
    std::optional<std::vector<std::int64_t>> dims;
    app.add_option("--config", config_path, "JSON config document (or a manifest from an earlier run)");
    app.add_option("-o,--output", output, "output directory");
    app.add_option("--seed", seed, "64-bit seed for all randomness");
    app.add_option("--threads", threads, "worker threads, 0 = available parallelism");
    app.add_option("--phantom", phantom, "phantom name: zero, reference_ball, odd_ball, gaussian_blob, two_blobs, half_ball_ball");
    app.add_option("--u-lo", u_lo);
    app.add_option("--u-hi", u_hi);
    app.add_option("--u-count", u_count);
    app.add_option("--beta-count", beta_count);
    app.add_option("--beta-turn", beta_turn, "full or half");
    app.add_option("--s-count", s_count);
    app.add_option("--dims", dims, "grid voxel counts n1 n2 n3")->expected(3);

    auto* phantom_cmd = app.add_subcommand("phantom", "rasterize the phantom and write a field file");
    auto* project_cmd = app.add_subcommand("project", "conical forward projection to a sinogram CSV");
    std::optional<std::string> project_input;
    project_cmd->add_option("--input", project_input, "field file to project instead of the phantom");

    auto* hemi_cmd = app.add_subcommand("hemifield", "per-u disk samples y1,y2,pf,phi");
    std::optional<std::string> hemi_input;
    std::optional<std::int64_t> hemi_disk;
    hemi_cmd->add_option("--input", hemi_input, "sinogram CSV to invert instead of sampling the phantom");
    hemi_cmd->add_option("--disk-nodes", hemi_disk);

    auto* verify_cmd = app.add_subcommand("verify", "run the verification checks and write verify.csv");
    std::optional<std::int64_t> verify_disk;
    verify_cmd->add_option("--disk-nodes", verify_disk);

    auto* null_cmd = app.add_subcommand("nullspace", "assemble a scenario and analyse its singular spectrum");
    std::optional<std::string> scenario;
    std::optional<std::int64_t> angles, degree, grid_n, vertices, max_entries;
    std::optional<double> threshold;
    bool no_null_fields = false;
    null_cmd->add_option("--scenario", scenario, "full, directions, vertices or local (aliases theorem2, theorem3, theorem4)");
    null_cmd->add_option("--angles", angles);
    null_cmd->add_option("--degree", degree);
    null_cmd->add_option("--grid-n", grid_n);
    null_cmd->add_option("--vertices", vertices);
    null_cmd->add_option("--threshold", threshold);
    null_cmd->add_option("--max-entries", max_entries);
    null_cmd->add_flag("--no-null-fields", no_null_fields);

    auto* recon_cmd = app.add_subcommand("reconstruct", "reconstruct a field from a sinogram CSV");
    std::optional<std::string> recon_input, reference;
    std::optional<std::int64_t> recon_disk, iterations;
    std::optional<double> lambda;
    bool no_rank_check = false, keep_hemifields = false;
    recon_cmd->add_option("--input", recon_input, "sinogram CSV");
    recon_cmd->add_option("--reference", reference, "phantom name to report errors against");
    recon_cmd->add_option("--disk-nodes", recon_disk);
    recon_cmd->add_option("--iterations", iterations);
    recon_cmd->add_option("--lambda", lambda);
    recon_cmd->add_flag("--no-rank-check", no_rank_check);
    recon_cmd->add_flag("--keep-hemifields", keep_hemifields);

    auto* report_cmd = app.add_subcommand("report", "merge CSV files into gnuplot data");
    std::vector<std::string> report_inputs;
    report_cmd->add_option("inputs", report_inputs, "CSV files");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "crt: error[config]: " << e.what() << '\n';
        return 2;
    }

    return crt::cli::guarded([&] {
        json flags = json::object();
        for (auto* sub : app.get_subcommands()) flags["command"] = sub->get_name();
        put(flags, "", "output", output);
        put(flags, "", "seed", seed);
        put(flags, "", "threads", threads);
        put(flags, "", "phantom", phantom);
        if (u_lo) flags["lattice"]["u"]["lo"] = *u_lo;
        if (u_hi) flags["lattice"]["u"]["hi"] = *u_hi;
        if (u_count) flags["lattice"]["u"]["count"] = *u_count;
        if (beta_count) flags["lattice"]["beta"]["count"] = *beta_count;
        if (beta_turn) flags["lattice"]["beta"]["turn"] = *beta_turn;
        if (s_count) flags["lattice"]["s"]["count"] = *s_count;
        if (dims) flags["grid"]["dims"] = *dims;
        put(flags, "project", "input", project_input);
        put(flags, "hemifield", "input", hemi_input);
        put(flags, "hemifield", "disk_nodes", hemi_disk);
        put(flags, "verify", "disk_nodes", verify_disk);
        put(flags, "scenario", "name", scenario);
        put(flags, "scenario", "angles", angles);
        put(flags, "scenario", "degree", degree);
        put(flags, "scenario", "grid_n", grid_n);
        put(flags, "scenario", "vertices", vertices);
        put(flags, "scenario", "threshold", threshold);
        put(flags, "scenario", "max_entries", max_entries);
        if (no_null_fields) flags["scenario"]["write_null_fields"] = false;
        put(flags, "reconstruct", "input", recon_input);
        put(flags, "reconstruct", "reference", reference);
        put(flags, "reconstruct", "disk_nodes", recon_disk);
        put(flags, "reconstruct", "iterations", iterations);
        put(flags, "reconstruct", "lambda", lambda);
        if (no_rank_check) flags["reconstruct"]["rank_check"] = false;
        if (keep_hemifields) flags["reconstruct"]["keep_hemifields"] = true;
        if (!report_inputs.empty()) flags["report"]["inputs"] = report_inputs;

        const json file = config_path ? crt::cli::load_config_file(*config_path) : json();
        std::map<std::string, std::string> sources;
        crt::cli::RunConfig cfg = crt::cli::parse_config(crt::cli::layer(file, flags, sources));
        cfg.sources = sources;
        const json manifest = crt::cli::run(cfg);
        std::cout << cfg.command << ": " << manifest["summary"].dump() << " -> " << cfg.output << '\n';
        return 0;
    });
}
