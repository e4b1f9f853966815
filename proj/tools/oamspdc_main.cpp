#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "oamspdc/runner.hpp"

namespace {

int run_subcommand(oamspdc::Experiment mode, const std::string& config_path,
                   const std::optional<std::uint64_t>& seed,
                   const std::optional<std::string>& out_dir) {
    oamspdc::RunConfig config = oamspdc::parse_config(config_path);
    config.experiment = mode;
    if (seed) config.seed = *seed;
    if (out_dir) config.out_dir = *out_dir;

    const oamspdc::RunArtifacts artifacts = oamspdc::run(config);
    for (const auto& w : artifacts.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : artifacts.files)
        std::cout << config.out_dir << '/' << f << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Type-I down-conversion simulator for an orbital-angular-momentum pump"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;

    const struct {
        const char* name;
        const char* help;
        oamspdc::Experiment mode;
    } subs[] = {
        {"scan", "scanned-detector coincidence maps", oamspdc::Experiment::Scan},
        {"triple", "triple-coincidence counting run", oamspdc::Experiment::Triple},
        {"analyze", "two-spot fit and charge inference of a map CSV",
         oamspdc::Experiment::Analyze},
        {"full", "scan, analyze and triple in sequence", oamspdc::Experiment::Full},
    };

    oamspdc::Experiment selected{};
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", config_path, "config file path")->required();
        sub->add_option("--seed", [&seed](const CLI::results_t& r) {
            seed = std::stoull(r.at(0));
            return true;
        }, "override the config seed");
        sub->add_option("--out", [&out_dir](const CLI::results_t& r) {
            out_dir = r.at(0);
            return true;
        }, "override the output directory");
        sub->callback([&selected, mode = s.mode] { selected = mode; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return run_subcommand(selected, config_path, seed, out_dir);
    } catch (const oamspdc::SpdcError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 9;
    }
}
