#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "app.hpp"

namespace {

struct OptionSpec {
    const char* name;
    const char* help;
};

const std::vector<OptionSpec> kValueOptions = {
    {"model", "h1, h2 or rabi"},
    {"omega0", "qubit frequency"},
    {"omega", "common field frequency (sets omega1 and omega2)"},
    {"omega1", "field 1 frequency"},
    {"omega2", "field 2 frequency"},
    {"g1", "coupling 1: value, list a,b,c or range start:stop:count"},
    {"g2", "coupling 2: value, list a,b,c or range start:stop:count"},
    {"nmax", "Fock cutoff per mode, or auto"},
    {"tol", "truncation convergence tolerance"},
    {"nmax-cap", "largest cutoff tried by auto truncation"},
    {"k", "number of levels per spectrum point"},
    {"tmax", "final evolution time"},
    {"steps", "number of evolution steps (steps + 1 rows)"},
    {"eps", "photon-number threshold of the critical-coupling estimate"},
    {"step", "coupling step of the critical-coupling estimate"},
    {"gmax", "largest coupling tried by the critical-coupling estimate"},
    {"direction", "coupling direction u1,u2 for the critical-coupling estimate"},
    {"format", "csv or json"},
    {"out", "output file, - for stdout"},
    {"workers", "worker threads (default: TWORABI_WORKERS or hardware concurrency)"},
};

}  // namespace

int main(int argc, char** argv) {
    namespace app = tworabi::app;
    CLI::App cli{"Exact diagonalization of two-mode quantum Rabi models"};
    cli.set_version_flag("--version", std::string(TWORABI_VERSION));
    cli.require_subcommand(0, 1);

    std::string config_path;
    cli.add_option("-c,--config", config_path, "JSON configuration file; flags override its values");

    std::map<std::string, std::string> values;
    std::set<std::string> given;
    bool labels = false;
    CLI::Option* labels_flag = nullptr;
    const std::vector<std::pair<const char*, const char*>> subcommands = {
        {"phase-scan", "ground-state order parameters on a (g1, g2) grid"},
        {"spectrum", "lowest levels along a coupling path"},
        {"evolve", "time evolution from |e,0,0>"},
        {"verify", "run the invariant checks"},
        {"critical", "crossover coupling along a direction"},
    };
    // Options are accepted at the top level (with the command taken from
    // --config) and after any subcommand; all share one storage slot.
    std::vector<CLI::App*> targets{&cli};
    for (const auto& [name, help] : subcommands) targets.push_back(cli.add_subcommand(name, help));
    for (CLI::App* target : targets) {
        for (const OptionSpec& o : kValueOptions) {
            CLI::Option* opt = target->add_option(std::string("--") + o.name, values[o.name], o.help);
            opt->each([&given, key = std::string(o.name)](const std::string&) { given.insert(key); });
        }
        CLI::Option* flag = target->add_flag("--labels", labels, "label levels by symmetry sector");
        flag->each([&labels_flag, flag](const std::string&) { labels_flag = flag; });
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << app::error_record(app::kInvalidConfig, "invalid_argument", e.what()).dump() << '\n';
        return app::kInvalidConfig;
    }

    app::ojson flags = app::ojson::object();
    for (const auto& [name, help] : subcommands)
        if (cli.got_subcommand(name)) flags["command"] = name;
    for (const std::string& key : given) flags[key] = values[key];
    if (labels_flag) flags["labels"] = labels;

    app::ojson file;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << app::error_record(app::kInvalidConfig, "invalid_argument",
                                           "cannot read configuration file '" + config_path + "'")
                             .dump()
                      << '\n';
            return app::kInvalidConfig;
        }
        try {
            file = app::ojson::parse(in);
        } catch (const std::exception& e) {
            std::cerr << app::error_record(app::kInvalidConfig, "invalid_argument", e.what()).dump() << '\n';
            return app::kInvalidConfig;
        }
    }

    try {
        return app::run_safely(app::merge_options(file, flags), std::cout, std::cerr);
    } catch (const tworabi::Error& e) {
        std::cerr << app::error_record(app::status_for(e), e.kind(), e.what()).dump() << '\n';
        return app::status_for(e);
    }
}
