#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <pthread.h>

#include "quakedrill/agents.hpp"
#include "quakedrill/assessment.hpp"
#include "quakedrill/cohort.hpp"
#include "quakedrill/dsl.hpp"
#include "quakedrill/event_log.hpp"
#include "quakedrill/http_server.hpp"
#include "quakedrill/serialization.hpp"
#include "quakedrill/service.hpp"
#include "quakedrill/simulate.hpp"

namespace fs = std::filesystem;
using namespace quakedrill;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kEnvError = 2;

// Unreadable inputs and unwritable outputs.
struct EnvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EnvError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw EnvError("cannot write " + path.string());
}

std::string render_validation(const std::string& path, const Scenario& scenario, const ValidationReport& report) {
    std::ostringstream out;
    for (const auto& e : report.errors) out << "error   " << e.code << " at " << e.location << ": " << e.message << "\n";
    for (const auto& w : report.warnings)
        out << "warning " << w.code << " at " << w.location << ": " << w.message << "\n";
    std::size_t covered = 0;
    for (const auto& [_, nodes] : report.coverage) covered += !nodes.empty();
    out << path << ": " << (report.ok() ? "ok" : "invalid") << " (" << scenario.nodes.size() << " nodes, "
        << covered << "/" << scenario.behaviors.size() << " behaviors covered, " << report.errors.size()
        << " errors, " << report.warnings.size() << " warnings)\n";
    return out.str();
}

std::string render_report(const AssessmentReport& report) {
    std::ostringstream out;
    for (const auto& o : report.outcomes) out << to_string(o.status) << "\t" << o.behavior_tag << "\n";
    const auto& s = report.score_summary;
    out << "performed " << s.performed << ", declined " << s.declined << ", timed out " << s.timed_out
        << ", not encountered " << s.not_encountered << "\n";
    return out.str();
}

struct Globals {
    std::string data_dir = "data";
    std::uint64_t seed = 0;
};

int cmd_validate(const std::string& path, bool json) {
    const auto source = read_file(path);
    Scenario scenario;
    try {
        scenario = parse_scenario(source);
    } catch (const ParseError& e) {
        std::cerr << path << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
        return kDomainError;
    }
    const auto report = validate_scenario(scenario);
    std::cout << (json ? to_json(report).dump(2) + "\n" : render_validation(path, scenario, report));
    return report.ok() ? kOk : kDomainError;
}

struct RunArgs {
    std::string path;
    std::string agent = "optimal";
    double stall = 0.0;
    std::string participant = "agent";
    std::string log_out;
    std::string report_out;
};

int cmd_run(const Globals& g, const RunArgs& a) {
    const auto source = read_file(a.path);
    Scenario scenario;
    try {
        scenario = parse_scenario(source);
    } catch (const ParseError& e) {
        std::cerr << a.path << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
        return kDomainError;
    }
    AgentPolicy policy;
    std::string agent_name = a.agent;
    if (a.agent == "optimal") policy = OptimalAgent{};
    else if (a.agent == "worst") policy = WorstAgent{};
    else if (a.agent == "random") policy = RandomAgent{g.seed, a.stall};
    else if (a.agent.rfind("script:", 0) == 0) {
        policy = parse_script(read_file(a.agent.substr(7)));
        agent_name = "script";
    } else {
        std::cerr << "unknown agent '" << a.agent << "' (optimal, worst, random or script:FILE)\n";
        return kDomainError;
    }

    SessionState final_state;
    try {
        final_state = run_agent(scenario, a.participant, policy);
    } catch (const ScriptError& e) {
        std::cerr << "script " << e.what() << "\n";
        return kDomainError;
    } catch (const SessionError& e) {
        std::cerr << e.what() << "\n";
        return kDomainError;
    }
    const auto session_id = scenario.id + "-" + agent_name;
    const auto report = build_report(final_state.log, scenario, session_id);

    const fs::path dir = g.data_dir;
    const fs::path log_path = a.log_out.empty() ? dir / (session_id + ".log") : fs::path(a.log_out);
    const fs::path report_path = a.report_out.empty() ? dir / (session_id + ".report.json") : fs::path(a.report_out);
    write_file(log_path, format_log(final_state.log));
    write_file(report_path, dump_report(report));
    std::cout << render_report(report) << "log: " << log_path.string() << "\nreport: " << report_path.string() << "\n";
    return kOk;
}

struct SimulateArgs {
    std::string out;
    int n = 87;
    int staff = -1;
    std::string profile = "default";
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
    CohortSpec spec;
    try {
        spec.profile = parse_profile(a.profile);
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid profile: " << e.what() << "\n";
        return kDomainError;
    }
    if (a.n < 1) {
        std::cerr << "cohort size must be at least 1\n";
        return kDomainError;
    }
    spec.participants = a.n;
    spec.staff = a.staff < 0 ? default_staff_count(a.n) : a.staff;
    spec.seed = g.seed;
    std::vector<stats::CohortRecord> records;
    try {
        records = simulate_cohort(spec);
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kDomainError;
    }
    write_file(a.out, stats::format_cohort_csv(records));
    std::cout << "wrote " << spec.participants << " participants (" << spec.staff << " staff, "
              << spec.participants - spec.staff << " visitors) to " << a.out << "\n";
    return kOk;
}

int cmd_analyze(const Globals& g, const std::string& path, const std::string& scenario_dir, bool json,
                bool continuity) {
    std::vector<stats::CohortRecord> records;
    std::vector<std::string> notes;
    try {
        if (!path.empty()) {
            records = stats::parse_cohort_csv(read_file(path));
        } else {
            service::Service store({scenario_dir, g.data_dir});
            records = store.cohort_records(&notes);
        }
    } catch (const service::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kEnvError;
    }
    stats::CohortOptions options;
    options.wilcoxon.continuity_correction = continuity;
    auto table = stats::cohort_analysis(records, options);
    table.notes.insert(table.notes.begin(), notes.begin(), notes.end());
    std::cout << (json ? stats::to_json(table).dump(2) + "\n" : stats::render_cohort_text(table));
    return kOk;
}

int cmd_serve(const Globals& g, const std::string& host, int port, const std::string& scenario_dir) {
    // Signals are collected by a dedicated thread so shutdown runs outside a handler.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::unique_ptr<service::Service> svc;
    try {
        svc = std::make_unique<service::Service>(service::ServiceConfig{scenario_dir, g.data_dir});
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kEnvError;
    }
    service::HttpServer server(*svc);
    if (!server.bind(host, port)) {
        std::cerr << "cannot listen on " << host << ":" << port << "\n";
        return kEnvError;
    }
    svc->start_sweeper();
    std::cout << "listening on http://" << host << ":" << server.port() << std::endl;

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.listen();
    // listen() can also return on its own; wake the waiter so it can be joined.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    svc->stop_sweeper();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Earthquake drill scenarios, playthroughs and pre/post analysis"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--data-dir", g.data_dir, "Directory for logs, reports and the service store")
        ->capture_default_str();
    app.add_option("--seed", g.seed, "Seed for the random agent and the cohort simulator")->capture_default_str();

    auto* validate = app.add_subcommand("validate", "Check a .drill scenario");
    std::string validate_path;
    bool validate_json = false;
    validate->add_option("path", validate_path)->required();
    validate->add_flag("--json", validate_json, "Print the report as JSON");

    auto* run = app.add_subcommand("run", "Play a scenario with a scripted agent");
    RunArgs run_args;
    run->add_option("path", run_args.path)->required();
    run->add_option("--agent", run_args.agent, "optimal | worst | random | script:FILE")->capture_default_str();
    run->add_option("--stall", run_args.stall, "Random agent: chance of letting a timeout fire")
        ->check(CLI::Range(0.0, 1.0));
    run->add_option("--participant", run_args.participant)->capture_default_str();
    run->add_option("--log", run_args.log_out, "Event log output (default DATA_DIR/<scenario>-<agent>.log)");
    run->add_option("--report", run_args.report_out, "Report output (default DATA_DIR/<scenario>-<agent>.report.json)");

    auto* simulate = app.add_subcommand("simulate-cohort", "Generate a synthetic pre/post cohort file");
    SimulateArgs sim_args;
    simulate->add_option("path", sim_args.out, "Output CSV")->required();
    simulate->add_option("-n,--participants", sim_args.n)->capture_default_str();
    simulate->add_option("--staff", sim_args.staff, "Staff count (default keeps the 25/87 split)");
    simulate->add_option("--profile", sim_args.profile, "default | none | key=value,...")->capture_default_str();

    auto* analyze = app.add_subcommand("analyze", "Pre/post comparison tables");
    std::string analyze_path;
    std::string analyze_scenarios = "scenarios";
    bool analyze_json = false;
    bool no_continuity = false;
    analyze->add_option("path", analyze_path, "Cohort CSV (default: the service store in --data-dir)");
    analyze->add_option("--scenario-dir", analyze_scenarios)->capture_default_str();
    analyze->add_flag("--json", analyze_json);
    analyze->add_flag("--no-continuity-correction", no_continuity,
                      "Normal approximation for Wilcoxon without the 0.5 correction");

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string serve_scenarios = "scenarios";
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--scenario-dir", serve_scenarios)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kEnvError;
    }

    try {
        if (*validate) return cmd_validate(validate_path, validate_json);
        if (*run) return cmd_run(g, run_args);
        if (*simulate) return cmd_simulate(g, sim_args);
        if (*analyze) return cmd_analyze(g, analyze_path, analyze_scenarios, analyze_json, !no_continuity);
        if (*serve) return cmd_serve(g, host, port, serve_scenarios);
    } catch (const EnvError& e) {
        std::cerr << e.what() << "\n";
        return kEnvError;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kDomainError;
    }
    return kEnvError;
}
