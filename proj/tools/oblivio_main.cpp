#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "oblivio/harness.hpp"
#include "oblivio/netsim.hpp"
#include "oblivio/parser.hpp"
#include "oblivio/typecheck.hpp"

namespace {

using namespace oblivio;

constexpr int kExitOk = 0;
constexpr int kExitFinding = 1; // type rejection, security finding, failed bound
constexpr int kExitUsage = 2;   // usage or IO error

struct Loaded {
    std::vector<std::shared_ptr<const Program>> programs;
    Lattice lattice = Lattice::two_point();
    Lambda lambda;
};

std::optional<Lattice> load_lattice_override(const std::string& path) {
    if (path.empty())
        return std::nullopt;
    Program decl = parse_program("LATTICE_OVERRIDE\n" + read_file(path));
    if (decl.lattice_pairs.empty())
        throw std::runtime_error(path + " declares no lattice pairs");
    return Lattice::from_pairs(decl.lattice_pairs);
}

Loaded load_programs(const std::vector<std::string>& paths, const std::string& lattice_path) {
    Loaded out;
    auto override_lat = load_lattice_override(lattice_path);
    std::vector<Program> parsed;
    for (const auto& path : paths) {
        try {
            parsed.push_back(
                parse_program(read_file(path), override_lat ? &*override_lat : nullptr));
        } catch (const ParseError& e) {
            throw ParseError(e.pos(), path + ":" + std::to_string(e.pos().line) + ":" +
                                          std::to_string(e.pos().column) + ": " + e.message());
        }
    }
    out.lattice = override_lat ? *override_lat : merge_lattices(parsed);
    out.lambda = build_lambda(parsed);
    for (auto& p : parsed)
        out.programs.push_back(std::make_shared<Program>(std::move(p)));
    return out;
}

// Diagnoses every program against the shared Lambda; returns the error count.
std::size_t report_type_errors(const Loaded& loaded, std::ostream& os) {
    std::size_t count = 0;
    for (const auto& program : loaded.programs) {
        auto errors = check_program(loaded.lattice, *program, loaded.lambda);
        for (const auto& e : errors) {
            os << program->node_id << ": " << e.what() << "\n";
            ++count;
        }
    }
    return count;
}

std::vector<NodeSpec> make_specs(const Loaded& loaded,
                                 const std::vector<std::string>& strategy_paths) {
    std::vector<NodeSpec> specs;
    for (std::size_t i = 0; i < loaded.programs.size(); ++i) {
        NodeSpec spec;
        spec.program = loaded.programs[i];
        if (i < strategy_paths.size() && !strategy_paths[i].empty())
            spec.script = parse_strategy(read_file(strategy_paths[i]));
        specs.push_back(std::move(spec));
    }
    return specs;
}

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write " + out_path);
    os << text;
}

int cmd_check(const std::vector<std::string>& program_paths, const std::string& lattice_path) {
    Loaded loaded = load_programs(program_paths, lattice_path);
    for (const auto& program : loaded.programs) {
        TypeEnvs envs = make_envs(*program, loaded.lambda);
        for (const auto& h : program->handlers) {
            auto min = handler_min_potential(loaded.lattice, envs, h);
            std::cout << program->node_id << "/" << h.name << ": mode " << h.mode_level
                      << ", annotated $" << h.potential << ", minimal "
                      << (min ? "$" + std::to_string(*min) : std::string("unsat")) << "\n";
        }
    }
    std::size_t errors = report_type_errors(loaded, std::cerr);
    return errors == 0 ? kExitOk : kExitFinding;
}

struct SimFlags {
    uint64_t budget = 1'000'000;
    bool unsafe = false;
    bool monitor = false;
    bool unchecked = false;
    std::string out_path;
};

int cmd_simulate(const std::vector<std::string>& program_paths,
                 const std::vector<std::string>& strategy_paths,
                 const std::string& lattice_path, const SimFlags& flags) {
    Loaded loaded = load_programs(program_paths, lattice_path);
    if (!flags.unchecked && report_type_errors(loaded, std::cerr) != 0)
        return kExitFinding;

    SimContext ctx{loaded.lattice, loaded.lambda, flags.unsafe, flags.monitor, true};
    SimResult result = run_simulation(make_specs(loaded, strategy_paths), ctx, flags.budget);
    write_output(flags.out_path, render_log(result.log));
    std::cerr << "status: " << sim_status_name(result.status) << " after " << result.steps
              << " steps\n";
    switch (result.status) {
    case SimStatus::Quiescent:
        return kExitOk;
    case SimStatus::BudgetExhausted:
        std::cerr << "error: step budget of " << flags.budget << " exceeded\n";
        return kExitFinding;
    case SimStatus::Blocked:
        std::cerr << "error: strategy cursor blocked on a dummy message under --unsafe\n";
        return kExitFinding;
    }
    return kExitOk;
}

int cmd_ni(const std::vector<std::string>& program_paths,
           const std::vector<std::string>& strategy_paths, const std::string& lattice_path,
           const std::string& adv, uint64_t trials, uint64_t seed, const SimFlags& flags) {
    Loaded loaded = load_programs(program_paths, lattice_path);
    if (!loaded.lattice.has_level(adv))
        throw std::runtime_error("--adv level '" + adv + "' is not in the lattice");
    if (!flags.unchecked && report_type_errors(loaded, std::cerr) != 0)
        return kExitFinding;

    Scenario scenario{make_specs(loaded, strategy_paths), flags.budget, flags.unchecked};
    NiReport report =
        ni_differential_test(scenario, loaded.lattice, loaded.lambda, adv, trials, seed);

    nlohmann::json j;
    j["adv"] = adv;
    j["seed"] = seed;
    j["trials"] = report.trials_run;
    j["passes"] = report.passes;
    j["per_trial"] = nlohmann::json::array();
    for (std::size_t i = 0; i < report.trials.size(); ++i) {
        const NiTrial& t = report.trials[i];
        nlohmann::json jt;
        jt["trial"] = i;
        jt["seed"] = t.seed;
        jt["result"] = !t.valid ? "invalid" : (t.equivalent ? "pass" : "fail");
        j["per_trial"].push_back(jt);
    }
    j["failures"] = nlohmann::json::array();
    for (const auto& f : report.failures) {
        nlohmann::json jf;
        jf["seed"] = f.seed;
        jf["valid"] = f.valid;
        jf["difference"] = f.difference;
        jf["minimized"] = f.minimized;
        j["failures"].push_back(jf);
    }
    write_output(flags.out_path, j.dump(2) + "\n");
    std::cerr << "ni-test: " << report.passes << "/" << report.trials_run << " trials passed\n";
    for (const auto& f : report.failures) {
        std::cerr << "counterexample (seed " << f.seed << "): " << f.difference << "\n";
        for (const auto& m : f.minimized)
            std::cerr << "  mutation: " << m << "\n";
    }
    return report.all_passed() ? kExitOk : kExitFinding;
}

int cmd_overhead(const std::vector<std::string>& program_paths,
                 const std::vector<std::string>& strategy_paths,
                 const std::vector<std::string>& extended_paths,
                 const std::string& lattice_path, const SimFlags& flags) {
    Loaded loaded = load_programs(program_paths, lattice_path);
    if (!flags.unchecked && report_type_errors(loaded, std::cerr) != 0)
        return kExitFinding;

    Scenario unsafe_scenario{make_specs(loaded, strategy_paths), flags.budget, flags.unchecked};
    Scenario safe_scenario{make_specs(loaded, extended_paths), flags.budget, flags.unchecked};
    OverheadReport report =
        overhead_check(unsafe_scenario, safe_scenario, loaded.lattice, loaded.lambda);

    nlohmann::json j;
    j["q_max"] = report.q_max;
    j["bound_factor"] = 1 + report.q_max;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : report.nodes) {
        nlohmann::json jn;
        jn["node"] = n.node;
        jn["unsafe_len"] = n.unsafe_len;
        jn["safe_len"] = n.safe_len;
        jn["ratio"] = n.unsafe_len == 0
                          ? 0.0
                          : static_cast<double>(n.safe_len) / static_cast<double>(n.unsafe_len);
        jn["extension_ok"] = n.extension_ok;
        jn["bound_ok"] = n.bound_ok;
        jn["genuine_match"] = n.genuine_match;
        j["nodes"].push_back(jn);
        std::cerr << "overhead " << n.node << ": |unsafe|=" << n.unsafe_len
                  << " |safe|=" << n.safe_len << " extension=" << (n.extension_ok ? "ok" : "FAIL")
                  << " bound=" << (n.bound_ok ? "ok" : "FAIL")
                  << " genuine=" << (n.genuine_match ? "ok" : "FAIL") << "\n";
    }
    write_output(flags.out_path, j.dump(2) + "\n");
    return report.all_ok() ? kExitOk : kExitFinding;
}

std::map<std::string, Trace> traces_by_node(const std::vector<LogRecord>& log) {
    std::map<std::string, Trace> out;
    for (const auto& rec : log) {
        Direction dir;
        if (rec.dir == "out")
            dir = Direction::Sent;
        else if (rec.dir == "in")
            dir = Direction::Received;
        else if (rec.dir == "obs")
            dir = Direction::Observed;
        else
            continue; // local sink records are not attacker-visible
        out[rec.node].push_back({dir, rec.channel, rec.t, rec.bit, rec.value});
    }
    return out;
}

int cmd_trace_diff(const std::string& log1_path, const std::string& log2_path,
                   const std::vector<std::string>& program_paths, const std::string& adv,
                   bool phantom, const std::string& lattice_path) {
    auto t1 = traces_by_node(parse_log(read_file(log1_path)));
    auto t2 = traces_by_node(parse_log(read_file(log2_path)));
    bool related = true;
    if (phantom) {
        for (const auto& [node, trace] : t1) {
            auto other = t2.find(node);
            bool ok = other != t2.end() && phantom_extension_check(trace, other->second);
            std::cout << node << ": " << (ok ? "phantom-extends" : "UNRELATED") << "\n";
            related = related && ok;
        }
    } else {
        if (program_paths.empty())
            throw std::runtime_error("--adv comparison needs --program files for Lambda");
        Loaded loaded = load_programs(program_paths, lattice_path);
        if (!loaded.lattice.has_level(adv))
            throw std::runtime_error("--adv level '" + adv + "' is not in the lattice");
        for (const auto& [node, trace] : t1) {
            auto other = t2.find(node);
            bool ok = other != t2.end() &&
                      equiv_trace(loaded.lattice, loaded.lambda, adv, trace, other->second);
            std::cout << node << ": " << (ok ? "equivalent" : "DIFFERENT") << " at " << adv
                      << "\n";
            related = related && ok;
        }
        for (const auto& [node, trace] : t2)
            if (t1.find(node) == t1.end()) {
                std::cout << node << ": only in second log\n";
                related = false;
            }
    }
    return related ? kExitOk : kExitFinding;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"OblivIO toolchain: type checker, oblivious interpreter, network simulator"};
    app.require_subcommand(1);

    std::vector<std::string> programs;
    std::vector<std::string> strategies;
    std::vector<std::string> extended;
    std::string lattice_path;
    std::string adv = "L";
    std::string log1, log2;
    bool phantom = false;
    uint64_t trials = 100;
    uint64_t seed = 0;
    SimFlags flags;

    auto add_programs = [&](CLI::App* cmd, bool required = true) {
        auto* opt = cmd->add_option("--program,program", programs, "OblivIO program file(s)");
        if (required)
            opt->required();
        cmd->add_option("--lattice", lattice_path, "security lattice override file");
    };
    auto add_sim_flags = [&](CLI::App* cmd) {
        cmd->add_option("--budget", flags.budget, "step budget (at least 1)");
        cmd->add_flag("--monitor", flags.monitor, "enable the runtime pc-stack monitor");
        cmd->add_flag("--unchecked", flags.unchecked, "skip type checking");
        cmd->add_option("--out", flags.out_path, "output file (default stdout)");
    };

    auto* check = app.add_subcommand("check", "type-check programs, print minimal potentials");
    add_programs(check);

    auto* run = app.add_subcommand("run", "run one node against its strategy");
    add_programs(run);
    run->add_option("--strategy", strategies, "strategy script (.strategy.json)");
    run->add_flag("--unsafe", flags.unsafe, "use the dummy-suppressing semantics");
    add_sim_flags(run);

    auto* simulate = app.add_subcommand("simulate", "run a multi-node network deterministically");
    add_programs(simulate);
    simulate->add_option("--strategy", strategies,
                         "strategy scripts, positional per --program (missing = empty)");
    simulate->add_flag("--unsafe", flags.unsafe, "use the dummy-suppressing semantics");
    add_sim_flags(simulate);

    auto* ni = app.add_subcommand("ni-test", "differential noninterference testing");
    add_programs(ni);
    ni->add_option("--strategy", strategies, "strategy scripts, positional per --program");
    ni->add_option("--adv", adv, "adversary level");
    ni->add_option("--trials", trials, "number of secret-mutation trials");
    ni->add_option("--seed", seed, "root RNG seed");
    add_sim_flags(ni);

    auto* overhead = app.add_subcommand("overhead", "check the dummy-traffic overhead bound");
    add_programs(overhead);
    overhead->add_option("--strategy", strategies, "genuine-only scripts (suppressed run)");
    overhead->add_option("--extended", extended, "extended scripts with dummies (standard run)");
    add_sim_flags(overhead);

    auto* diff = app.add_subcommand("trace-diff", "compare two trace logs");
    diff->add_option("log1", log1, "first trace log")->required();
    diff->add_option("log2", log2, "second trace log")->required();
    diff->add_option("--program", programs, "program files (builds Lambda for --adv mode)");
    diff->add_option("--lattice", lattice_path, "security lattice override file");
    diff->add_option("--adv", adv, "adversary level for equivalence comparison");
    diff->add_flag("--phantom", phantom, "check phantom extension instead of equivalence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return kExitOk; // --help
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
    if (flags.budget == 0) {
        std::cerr << "--budget must be at least 1\n";
        return kExitUsage;
    }

    try {
        if (check->parsed())
            return cmd_check(programs, lattice_path);
        if (run->parsed() || simulate->parsed())
            return cmd_simulate(programs, strategies, lattice_path, flags);
        if (ni->parsed())
            return cmd_ni(programs, strategies, lattice_path, adv, trials, seed, flags);
        if (overhead->parsed())
            return cmd_overhead(programs, strategies, extended, lattice_path, flags);
        if (diff->parsed())
            return cmd_trace_diff(log1, log2, programs, adv, phantom, lattice_path);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitFinding;
    } catch (const TypeError& e) {
        std::cerr << "type error: " << e.what() << "\n";
        return kExitFinding;
    } catch (const SimError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kExitFinding;
    } catch (const StuckError& e) {
        std::cerr << "stuck configuration: " << e.what() << "\n";
        return kExitFinding;
    } catch (const MonitorError& e) {
        std::cerr << "monitor assertion failed: " << e.what() << "\n";
        return kExitFinding;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
