#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "deflect/parallel.hpp"
#include "deflect/scenario.hpp"
#include "deflect/version.hpp"

namespace {

deflect::ScenarioConfig load_config(const std::string& config_path,
                                    const std::string& preset) {
    const bool have_file = !config_path.empty();
    const bool have_preset = !preset.empty();
    if (have_file == have_preset)
        throw deflect::ConfigError(
            "pass exactly one of --config FILE or --preset NAME");
    return have_file ? deflect::config_from_file(config_path)
                     : deflect::preset_config(preset);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "deflect: conditional deflection patterns of three-level atoms "
        "crossing two standing-wave cavity modes"};
    app.set_version_flag("--version", deflect::kVersion);
    app.require_subcommand(1);

    std::string config_path, preset, out_dir = "out";
    std::string normalize, format, dump;
    int grid_n = -1, nmax = -1, threads = 1;

    CLI::App* run = app.add_subcommand("run", "Simulate a scenario and write its outputs");
    run->add_option("--config", config_path, "JSON scenario config file");
    run->add_option("--preset", preset, "Built-in preset name");
    run->add_option("--out-dir", out_dir, "Output root directory (default: out)");
    run->add_option("--grid", grid_n, "Override grid to N x N points")
        ->check(CLI::PositiveNumber);
    run->add_option("--nmax", nmax, "Override the photon-number cutoff")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--normalize", normalize, "raw | unit")
        ->check(CLI::IsMember({"raw", "unit"}));
    run->add_option("--format", format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--threads", threads,
                    "Worker threads; outputs are identical for any value")
        ->check(CLI::PositiveNumber);

    CLI::App* presets_cmd =
        app.add_subcommand("presets", "List built-in presets");
    presets_cmd->add_option("--dump", dump,
                            "Print the JSON config of the named preset");

    CLI::App* validate_cmd = app.add_subcommand(
        "validate", "Check a scenario without running it");
    validate_cmd->add_option("--config", config_path, "JSON scenario config file");
    validate_cmd->add_option("--preset", preset, "Built-in preset name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (presets_cmd->parsed()) {
            if (!dump.empty()) {
                const auto config = deflect::preset_config(dump);
                std::printf("%s\n", deflect::config_to_json(config).dump(2).c_str());
                return 0;
            }
            for (const auto& info : deflect::list_presets())
                std::printf("%-8s %s\n", info.name.c_str(),
                            info.description.c_str());
            return 0;
        }

        deflect::ScenarioConfig config = load_config(config_path, preset);
        if (grid_n > 0) {
            config.grid.nx = grid_n;
            config.grid.ny = grid_n;
        }
        if (nmax >= 0) config.truncation.n_max = nmax;
        if (normalize == "raw") config.normalization = deflect::Normalization::Raw;
        if (normalize == "unit")
            config.normalization = deflect::Normalization::UnitMass;
        if (format == "csv") config.format = deflect::OutputFormat::Csv;
        if (format == "json") config.format = deflect::OutputFormat::Json;

        if (validate_cmd->parsed()) {
            deflect::validate_config(config);
            const int n_max = deflect::resolve_n_max(config);
            std::printf("OK: %d output(s), n_max = %d, grid %d x %d\n",
                        static_cast<int>(config.outputs.size()), n_max,
                        config.grid.nx, config.grid.ny);
            return 0;
        }

        deflect::set_max_threads(threads);
        const deflect::RunResult result = deflect::run_scenario(config, out_dir);
        std::printf("n_max = %d, retained Fock mass = %.12g\n", result.n_max,
                    result.retained_mass);
        for (const std::string& f : result.files)
            std::printf("wrote %s\n", f.c_str());
        return 0;
    } catch (const deflect::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const deflect::NumericalGuardError& e) {
        std::fprintf(stderr, "numerical guard: %s\n", e.what());
        return 3;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
