// asymptolab: run experiments, render plots, run the quick self-test.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "asymptolab/experiments.hpp"
#include "asymptolab/plot.hpp"

namespace al = asymptolab;

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kConfigError = 2;

void print_checks(const std::vector<al::Check>& checks) {
    for (const auto& c : checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  [" << c.detail << "]\n";
}

int run(const std::string& config_path, const std::string& out_override) {
    const auto started = al::utc_timestamp();
    auto cfg = al::load_config(config_path);
    std::filesystem::path dir = out_override.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out_override);
    std::cout << "run " << cfg.name << " (" << al::scenario_name(cfg.scenario) << ") -> " << dir.string() << "\n";
    al::ExperimentResult result;
    try {
        result = al::run_experiment(cfg);
    } catch (const al::PlateauNotReached& e) {
        result.name = cfg.name;
        result.scenario = cfg.scenario;
        result.checks.push_back({"plateau reached", false, e.what()});
    }
    const auto manifest = al::write_run(cfg, result, dir, started);
    print_checks(result.checks);
    for (const auto& n : result.notes) std::cout << "note: " << n << "\n";
    std::cout << (result.pass() ? "all checks passed" : "some checks failed") << "; manifest "
              << (dir / "manifest.json").string() << "\n";
    return result.pass() ? kPass : kCheckFailure;
}

int plot(const std::string& run_dir) {
    const auto r = al::plot_run(run_dir);
    for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
    for (const auto& f : r.files) std::cout << "wrote " << (std::filesystem::path(run_dir) / f).string() << "\n";
    return kPass;
}

int selftest() {
    const auto checks = al::selftest();
    print_checks(checks);
    const bool ok = std::all_of(checks.begin(), checks.end(), [](const al::Check& c) { return c.pass; });
    return ok ? kPass : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Long-time asymptotics of convection-diffusion equations: experiments and checks"};
    app.set_version_flag("--version", al::kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir, run_dir;
    auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a JSON configuration");
    run_cmd->add_option("config", config_path, "configuration file")->required();
    run_cmd->add_option("-o,--output", out_dir, "output directory (overrides output_dir)");
    auto* plot_cmd = app.add_subcommand("plot", "Render SVG figures for a finished run");
    plot_cmd->add_option("run_dir", run_dir, "run directory containing manifest.json")->required();
    auto* self_cmd = app.add_subcommand("selftest", "Run the quick identity checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    }

    try {
        if (*run_cmd) return run(config_path, out_dir);
        if (*plot_cmd) return plot(run_dir);
        if (*self_cmd) return selftest();
    } catch (const al::ConfigInvalid& e) {
        std::cerr << "error [" << e.module() << "] ConfigInvalid: " << e.what() << "\n";
        return kConfigError;
    } catch (const al::MissingData& e) {
        std::cerr << "error [" << e.module() << "] MissingData: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error [io] " << e.what() << "\n";
        return kConfigError;
    } catch (const al::Error& e) {
        std::cerr << "error [" << e.module() << "] " << e.what() << "\n";
        return kCheckFailure;
    }
    return kConfigError;
}
