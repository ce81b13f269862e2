// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/harness.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace detdeploy;
using nlohmann::json;

namespace
{
std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
}

conformance::EventLog load_log(const std::string& path)
{
    return conformance::import_log(read_file(path), conformance::format_for_path(path));
}

std::string join_codes(const std::vector<ledger::ErrorCode>& codes)
{
    std::string out;
    for (const auto c : codes)
        out += (out.empty() ? "" : ",") + std::string(ledger::to_string(c));
    return out.empty() ? "-" : out;
}

int run_scenarios(const std::string& which, const std::string& out_dir)
{
    std::vector<const harness::ScenarioSpec*> specs;
    if (which == "all")
        for (const auto& s : harness::builtin_scenarios())
            specs.push_back(&s);
    else if (const auto* s = harness::find_scenario(which))
        specs.push_back(s);
    else
    {
        std::cerr << "unknown scenario: " << which << '\n';
        return 2;
    }
    if (!out_dir.empty())
        fs::create_directories(out_dir);

    int failed = 0;
    std::vector<harness::ScenarioResult> conforming;
    for (const auto* spec : specs)
    {
        auto result = harness::run_scenario(*spec);
        std::cout << std::left << std::setw(3) << result.id << ' ' << (result.passed() ? "PASS" : "FAIL")
                  << "  fitness=" << std::fixed << std::setprecision(4) << result.replay.fitness
                  << "  state=" << to_string(result.final_state)
                  << "  reverts=" << join_codes(result.revert_codes()) << '\n';
        for (const auto& f : result.failures)
            std::cout << "    " << f << '\n';
        failed += result.passed() ? 0 : 1;

        if (!out_dir.empty())
        {
            const fs::path base = fs::path(out_dir) / result.id;
            write_file(base.string() + ".json", json(result).dump(2) + "\n");
            write_file(base.string() + ".csv", export_log(result.log, conformance::LogFormat::Csv));
            write_file(base.string() + ".xes", export_log(result.log, conformance::LogFormat::Xes));
        }
        if (result.id.starts_with('C'))
            conforming.push_back(std::move(result));
    }

    if (!out_dir.empty() && conforming.size() > 1)
    {
        const auto log = harness::combined_log(conforming);
        const fs::path base = fs::path(out_dir) / "combined";
        write_file(base.string() + ".csv", export_log(log, conformance::LogFormat::Csv));
        write_file(base.string() + ".xes", export_log(log, conformance::LogFormat::Xes));
        write_file(base.string() + ".dot", to_dot(conformance::mine_dfg(log)));
    }
    return failed == 0 ? 0 : 1;
}

int replay(const std::string& path)
{
    const auto log = load_log(path);
    const auto net = conformance::reference_net();
    const auto result = conformance::token_replay(log, net);
    std::cout << "case_id,produced,consumed,missing,remaining,fitness\n";
    for (std::size_t i = 0; i < log.traces.size(); ++i)
    {
        const auto& f = result.traces[i];
        std::cout << log.traces[i].case_id << ',' << f.produced << ',' << f.consumed << ',' << f.missing
                  << ',' << f.remaining << ',' << std::setprecision(6) << f.fitness << '\n';
    }
    std::cout << "aggregate fitness: " << std::setprecision(6) << result.fitness << '\n';
    return 0;
}

int dfg(const std::string& path, bool dot)
{
    const auto graph = conformance::mine_dfg(load_log(path));
    if (dot)
    {
        std::cout << to_dot(graph);
        return 0;
    }
    std::cout << "from,to,frequency,mean_duration_s\n";
    for (const auto& e : graph.edges)
        std::cout << e.from << ',' << e.to << ',' << e.frequency << ',' << std::setprecision(10)
                  << e.mean_duration << '\n';
    return 0;
}

int gas(bool as_json)
{
    const auto report = harness::gas_report(harness::run_scenario(*harness::find_scenario("C1")));
    if (as_json)
    {
        std::cout << json(report).dump(2) << '\n';
        return 0;
    }
    std::cout << std::left << std::setw(18) << "step" << std::right << std::setw(10) << "gas"
              << std::setw(7) << "cold" << std::setw(7) << "warm" << std::setw(8) << "events" << '\n';
    for (const auto& r : report.rows)
        std::cout << std::left << std::setw(18) << r.step << std::right << std::setw(10) << r.gas.gas_used
                  << std::setw(7) << r.gas.cold_slot_touches << std::setw(7) << r.gas.warm_slot_touches
                  << std::setw(8) << r.gas.event_gas << '\n';
    std::cout << std::left << std::setw(18) << "total" << std::right << std::setw(10) << report.total << '\n'
              << "first vote > subsequent vote: " << (report.first_vote_exceeds_subsequent ? "yes" : "no")
              << " (difference " << report.vote_difference << ", cold-warm surcharge "
              << report.expected_surcharge << ")\n"
              << "queue is the most expensive step: " << (report.queue_is_max ? "yes" : "no") << '\n';
    return 0;
}

Address registry_or_default(const std::string& hex)
{
    return hex.empty() ? harness::Accounts::make().registry : Address::from_hex(hex);
}

int derive(const std::string& path, const std::string& registry_hex)
{
    const auto manifest = json::parse(read_file(path)).get<registry::VersionManifest>();
    const auto registry = registry_or_default(registry_hex);
    const auto derived = registry::derive_version_address(manifest, registry);
    json addresses = json::object();
    for (const auto& [name, addr] : derived.addresses)
        addresses[name] = addr.hex();
    std::cout << json{{"version_id", manifest.version_id}, {"registry", registry.hex()},
                     {"controller", derived.controller.hex()}, {"addresses", addresses}}
                     .dump(2)
              << '\n';
    return 0;
}

int package_build(const std::string& dir, std::uint64_t version, const std::string& registry_hex,
    const std::string& store_dir)
{
    const auto [sources, config] = packages::load_package_dir(dir);
    const auto registry = registry_or_default(registry_hex);
    const auto built = packages::build_package(sources, version, config, registry);
    if (!store_dir.empty())
    {
        packages::DirectoryStore store(store_dir);
        store.store(built.package);
    }
    json addresses = json::object();
    for (const auto& [name, addr] : built.derived.addresses)
        addresses[name] = addr.hex();
    std::cout << json{{"version_id", version}, {"cid", built.cid.hex()},
                     {"expected_address", built.derived.controller.hex()}, {"addresses", addresses},
                     {"manifest", built.manifest.manifest}}
                     .dump(2)
              << '\n';
    return 0;
}

int serve(const std::string& host, int port, bool time_control)
{
    harness::EngineConfig config;
    config.time_control = time_control;
    harness::Engine engine(config);
    harness::ApiService api(engine);
    std::cout << "serving on http://" << host << ':' << port << std::endl;
    return api.listen(host, port) ? 0 : 1;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"detdeploy: governed deterministic deployment engine"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out_dir;
    auto* run = app.add_subcommand("run-scenario", "Run a built-in scenario (C1-C3, N1-N7) or all");
    run->add_option("id", scenario, "Scenario id or 'all'")->required();
    run->add_option("--out", out_dir, "Directory for logs and results");

    std::string log_path;
    auto* rep = app.add_subcommand("replay", "Token-based replay of a CSV or XES log");
    rep->add_option("--log", log_path, "Event log (.csv or .xes)")->required()->check(CLI::ExistingFile);

    std::string dfg_path;
    bool dot = false;
    auto* dfg_cmd = app.add_subcommand("dfg", "Mine a performance directly-follows graph");
    dfg_cmd->add_option("--log", dfg_path, "Event log (.csv or .xes)")->required()->check(CLI::ExistingFile);
    dfg_cmd->add_flag("--dot", dot, "Emit Graphviz DOT");

    bool gas_json = false;
    auto* gas_cmd = app.add_subcommand("gas-report", "Per-step gas of the C1 scenario");
    gas_cmd->add_flag("--json", gas_json, "Emit JSON");

    std::string manifest_path;
    std::string registry_hex;
    auto* der = app.add_subcommand("derive", "Derive the addresses of a version manifest");
    der->add_option("manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);
    der->add_option("--registry", registry_hex, "Registry address (default: the simulation registry)");

    std::string package_dir;
    std::uint64_t version = 0;
    std::string store_dir;
    std::string pkg_registry;
    auto* pkg = app.add_subcommand("package", "Package operations");
    pkg->require_subcommand(1);
    auto* pkg_build = pkg->add_subcommand("build", "Build a deterministic upgrade package");
    pkg_build->add_option("dir", package_dir, "Directory with package.json and sources/")
        ->required()
        ->check(CLI::ExistingDirectory);
    pkg_build->add_option("--version", version, "Version id")->required()->check(CLI::PositiveNumber);
    pkg_build->add_option("--registry", pkg_registry, "Registry address");
    pkg_build->add_option("--store", store_dir, "Content store directory to add the package to");

    std::string host = "127.0.0.1";
    int port = 8080;
    bool no_time = false;
    auto* srv = app.add_subcommand("serve", "Serve the REST API over a simulated C1 setup");
    srv->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
    srv->add_option("--host", host, "Bind address");
    srv->add_flag("--no-time-control", no_time, "Disable POST /time/advance");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
            return run_scenarios(scenario, out_dir);
        if (*rep)
            return replay(log_path);
        if (*dfg_cmd)
            return dfg(dfg_path, dot);
        if (*gas_cmd)
            return gas(gas_json);
        if (*der)
            return derive(manifest_path, registry_hex);
        if (*pkg_build)
            return package_build(package_dir, version, pkg_registry, store_dir);
        if (*srv)
            return serve(host, port, !no_time);
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
