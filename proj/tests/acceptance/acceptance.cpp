// Acceptance runner: one PASS/FAIL line per criterion, followed by the
// measured values behind it. Exits nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "tworabi/verification.hpp"

using namespace tworabi;

namespace {

struct Criterion {
    std::string name;
    std::function<std::vector<CheckResult>()> run;
};

std::vector<CheckResult> determinism_checks() {
    const std::vector<app::ojson> configs = {
        {{"command", "phase-scan"}, {"model", "h2"}, {"g1", "0:1.2:4"}, {"g2", "0:1.2:4"}, {"workers", 2}},
        {{"command", "evolve"}, {"model", "h1"}, {"g1", 0.15}, {"g2", 0.15}, {"tmax", 30}, {"steps", 200}},
        {{"command", "spectrum"}, {"model", "h1"}, {"g1", "0:1:6"}, {"g2", 0.2}, {"labels", true},
         {"format", "json"}},
    };
    std::vector<CheckResult> out;
    for (const app::ojson& cfg : configs) {
        const app::RunConfig c = app::resolve_config(cfg);
        std::ostringstream first, second;
        const int s1 = app::run(c, first);
        const int s2 = app::run(c, second);
        const bool same = first.str() == second.str() && s1 == s2 && !first.str().empty();
        out.push_back(make_check("identical-output-" + c.command, same ? 0.0 : 1.0, Relation::less, 0.5,
                                 std::to_string(first.str().size()) + " bytes"));
    }
    return out;
}

void report(const Criterion& c, const std::vector<CheckResult>& checks, double seconds) {
    std::printf("%s %s (%.1f s)\n", all_pass(checks) ? "PASS" : "FAIL", c.name.c_str(), seconds);
    for (const CheckResult& r : checks)
        std::printf("    %-36s %-12.6g %s %-8.3g %s%s%s\n", r.name.c_str(), r.value,
                    r.relation == Relation::less ? "<" : ">", r.threshold, r.pass ? "ok" : "NOT MET",
                    r.note.empty() ? "" : "  ", r.note.c_str());
    std::fflush(stdout);
}

}  // namespace

int main() {
    std::vector<NamedTrace> runs;
    const std::vector<Criterion> criteria = {
        {"symmetry-suite", [] { return symmetry_checks(20, 10); }},
        {"isomorphism", [] { return isomorphism_checks(0.3, 0.4, 20, 30); }},
        {"displaced-frame-identity", [] { return displacement_checks(24, 4); }},
        {"ground-state-configurations", [] { return ground_configuration_checks(); }},
        {"deep-strong-ansatz-overlap", [] { return ansatz_checks(3.0); }},
        {"spectrum-labeling", [] { return spectrum_labeling_checks(1.5, 40, 12); }},
        {"beam-splitter-dynamics",
         [&runs] {
             runs = beam_splitter_runs();
             return beam_splitter_checks(runs);
         }},
        {"conservation-during-evolution", [&runs] { return conservation_checks(runs); }},
        {"determinism", [] { return determinism_checks(); }},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::vector<CheckResult> checks;
        try {
            checks = c.run();
        } catch (const std::exception& e) {
            checks = {make_check("error", 1.0, Relation::less, 0.5, e.what())};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report(c, checks, seconds);
        failed += all_pass(checks) ? 0 : 1;
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
