#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "incharacter/io.hpp"
#include "incharacter/pipeline.hpp"

namespace {

using incharacter::RunConfig;

RunConfig load_config_with_overrides(const std::string& config_path,
                                     const std::vector<std::string>& methods,
                                     const std::vector<std::string>& scales,
                                     const std::vector<std::string>& characters, int runs,
                                     const std::string& out, bool no_cache, int parallelism,
                                     double rate_limit) {
    RunConfig config = incharacter::load_run_config(config_path);
    if (!methods.empty()) {
        config.methods.clear();
        for (const auto& name : methods) {
            config.methods.push_back(incharacter::parse_method(name));
        }
    }
    if (!scales.empty()) {
        config.scales = scales;
    }
    if (!characters.empty()) {
        config.characters = characters;
    }
    if (runs > 0) {
        config.runs = runs;
    }
    if (!out.empty()) {
        config.out_dir = out;
    }
    if (no_cache) {
        config.cache = false;
    }
    if (parallelism > 0) {
        config.parallelism = parallelism;
    }
    if (rate_limit > 0) {
        config.rate_limit_rps = rate_limit;
    }
    config.validate();
    return config;
}

void print_stats(const char* stage, const incharacter::StageStats& stats) {
    std::printf("%s: wrote %d artifact(s), reused %d, backend calls %ld, cache hits %ld\n", stage,
                stats.artifacts_written, stats.artifacts_reused, stats.backend_calls,
                stats.cache_hits);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personality-fidelity evaluation harness for role-playing agents"};
    app.require_subcommand(1);

    std::string data_dir = incharacter::default_data_dir().string();
    app.add_option("--data", data_dir, "Data directory (scales, templates, sim fixtures)");

    // shared pipeline options
    std::string config_path, out;
    std::vector<std::string> methods, scales, characters;
    int runs = 0, parallelism = 0;
    double rate_limit = 0.0;
    bool no_cache = false;
    auto add_pipeline_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Run configuration file")->required();
        cmd->add_option("--method", methods, "Method override (SR, SR-CoT, SR-ICL, OC, d-OC, ER_all, ER_batch)");
        cmd->add_option("--scale", scales, "Scale override");
        cmd->add_option("--character", characters, "Character override");
        cmd->add_option("--runs", runs, "Run count override");
        cmd->add_option("--out", out, "Output directory override");
        cmd->add_flag("--no-cache", no_cache, "Disable the response cache");
        cmd->add_option("--parallelism", parallelism, "Parallel request bound");
        cmd->add_option("--rate-limit", rate_limit, "Requests per second cap");
    };

    auto* scales_cmd = app.add_subcommand("scales", "List or validate scale definition files");
    auto* scales_list = scales_cmd->add_subcommand("list", "List bundled scales");
    std::string validate_path;
    auto* scales_validate = scales_cmd->add_subcommand("validate", "Validate a scale file");
    scales_validate->add_option("path", validate_path, "Scale file")->required();
    scales_cmd->require_subcommand(1);

    auto* interview_cmd = app.add_subcommand("interview", "Run interviews and persist transcripts");
    add_pipeline_options(interview_cmd);
    auto* assess_cmd = app.add_subcommand("assess", "Convert transcripts (or run SR) into reports");
    add_pipeline_options(assess_cmd);
    auto* report_cmd = app.add_subcommand("report", "Compute metric tables and plot data");
    add_pipeline_options(report_cmd);

    auto* simulate_cmd = app.add_subcommand("simulate", "Round-trip checks with scripted backends");
    std::string suite, sim_out = "out/sim";
    simulate_cmd->add_option("--suite", suite, "Persona suite file (defaults to the bundled one)");
    simulate_cmd->add_option("--out", sim_out, "Output directory for round-trip reports");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scales_list->parsed()) {
            const auto rows = incharacter::list_bundled_scales(data_dir);
            std::printf("%-12s %-40s %-10s %6s %6s\n", "id", "name", "version", "items", "dims");
            for (const auto& row : rows) {
                std::printf("%-12s %-40s %-10s %6d %6d\n", row.id.c_str(), row.name.c_str(),
                            row.version.c_str(), row.items, row.dimensions);
            }
            return 0;
        }
        if (scales_validate->parsed()) {
            const auto scale = incharacter::load_scale(validate_path);
            std::printf("OK: %s (%zu items, %zu dimensions)\n", scale.name.c_str(),
                        scale.items.size(), scale.dimensions.size());
            return 0;
        }
        if (interview_cmd->parsed() || assess_cmd->parsed() || report_cmd->parsed()) {
            RunConfig config = load_config_with_overrides(config_path, methods, scales, characters,
                                                          runs, out, no_cache, parallelism,
                                                          rate_limit);
            if (config.data_dir.empty()) {
                config.data_dir = data_dir;
            }
            if (interview_cmd->parsed()) {
                print_stats("interview", incharacter::cmd_interview(config));
            } else if (assess_cmd->parsed()) {
                print_stats("assess", incharacter::cmd_assess(config));
            } else {
                const auto outputs = incharacter::cmd_report(config);
                std::printf("report: wrote %s and %s\n", outputs.metrics_json.string().c_str(),
                            outputs.metrics_table.string().c_str());
                std::printf("report: manifest at %s\n", outputs.manifest.string().c_str());
            }
            return 0;
        }
        if (simulate_cmd->parsed()) {
            const std::filesystem::path suite_path =
                suite.empty() ? std::filesystem::path(data_dir) / "sim" / "default_suite.json"
                              : std::filesystem::path(suite);
            const auto outcome = incharacter::cmd_simulate(suite_path, data_dir, sim_out);
            for (const auto& line : outcome.lines) {
                std::printf("%s\n", line.c_str());
            }
            return outcome.pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
