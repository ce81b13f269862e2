// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Benchmark fixture, scripted scenarios, gas reporting and the REST service.

#include <detdeploy/chain.hpp>
#include <detdeploy/conformance.hpp>
#include <detdeploy/packages.hpp>
#include <detdeploy/pipeline.hpp>

#include <json.hpp>

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detdeploy::harness
{
/// Deterministic simulation identity: the last 20 bytes of keccak256(label).
Address account_for(std::string_view label);

struct Accounts
{
    Address deployer;
    Address registry;
    std::array<Address, 3> stakeholders;
    Address proposer;
    Address propagator;

    static Accounts make();
};

/// Sources and build configuration of the benchmark's three-contract
/// version: token, hub(token) and a controller(token, hub).
std::pair<packages::SourceTree, packages::BuildConfig> c1_sources();

/// A receipt labelled with the step that produced it.
struct StepReceipt
{
    std::string step;
    ledger::TxReceipt receipt;
};

/// Chain with the benchmark's participants: three stakeholders holding the
/// Stakeholder and Voter roles, a package proposer and a propagator. The
/// bootstrap phase is closed before the constructor returns.
class Fixture
{
public:
    explicit Fixture(governance::GovernanceParams params = {}, ledger::LedgerConfig ledger = {});

    Accounts accounts;
    governance::Chain chain;
    packages::MemoryStore store;
    packages::BuildResult build;  ///< the C1 package for the next version
    std::vector<StepReceipt> bootstrap;

    /// Stores the package and submits the Upgrade proposal from the proposer.
    std::pair<Hash256, ledger::TxReceipt> propose_upgrade();
    governance::UpgradePayload upgrade_payload() const;
};

enum class Anchor
{
    Creation,  ///< the proposal's creation block
    Deadline,  ///< the first block after the voting deadline
    Eta,       ///< the first block at or after the timelock eta
};

enum class ActionKind
{
    Vote,
    Queue,
    Execute,
    ExecuteTampered,  ///< one byte of a leaf init code flipped
    Advance,          ///< only moves the clock
};

struct When
{
    Anchor anchor = Anchor::Creation;
    std::int64_t offset_seconds = 0;
};

struct Action
{
    When at;
    ActionKind kind = ActionKind::Vote;
    std::size_t stakeholder = 0;  ///< index into Accounts::stakeholders (votes)
    governance::Support support = governance::Support::For;
    std::optional<ledger::ErrorCode> expect;  ///< revert expected, if any
};

struct ScenarioSpec
{
    std::string id;
    std::string description;
    governance::GovernanceParams params;
    std::vector<Action> script;
    governance::ProposalState expected_state = governance::ProposalState::Executed;
    std::optional<ledger::ErrorCode> expected_revert;
};

struct GasRow
{
    std::string step;
    ledger::GasReceipt gas;
};

struct GasReport
{
    std::vector<GasRow> rows;  ///< grant role, propose, first vote, subsequent vote, queue, execute
    std::uint64_t total = 0;
    bool first_vote_exceeds_subsequent = false;
    std::uint64_t vote_difference = 0;
    std::uint64_t expected_surcharge = 0;  ///< extra cold slots x (cold - warm)
    bool queue_is_max = false;

    const GasRow* row(std::string_view step) const noexcept;
};

struct ScenarioResult
{
    std::string id;
    Hash256 proposal_id;
    std::vector<ledger::LedgerEvent> events;  ///< committed only
    std::vector<StepReceipt> receipts;        ///< bootstrap and script, in order
    conformance::EventLog log;
    conformance::ReplayResult replay;
    std::optional<conformance::Dfg> dfg;
    governance::ProposalState final_state = governance::ProposalState::Pending;
    std::optional<std::uint64_t> deployed_version;
    std::vector<std::string> failures;  ///< empty iff the verdict is pass

    bool passed() const noexcept { return failures.empty(); }
    std::vector<ledger::ErrorCode> revert_codes() const;
};

/// C1-C3 and N1-N7 with the benchmark's default parameters.
const std::vector<ScenarioSpec>& builtin_scenarios();
const ScenarioSpec* find_scenario(std::string_view id);

ScenarioResult run_scenario(const ScenarioSpec& spec);

/// Gas table of a successful upgrade run (C1).
GasReport gas_report(const ScenarioResult& result);

/// Concatenation of several scenario logs, case ids kept.
conformance::EventLog combined_log(const std::vector<ScenarioResult>& results);

void to_json(nlohmann::json& j, const GasReport& r);
void to_json(nlohmann::json& j, const ScenarioResult& r);

struct EngineConfig
{
    bool time_control = true;  ///< POST /time/advance enabled
    bool setup_c1 = true;      ///< propose C1 and open its vote at start
    governance::GovernanceParams params;
};

/// Simulation engine behind the REST service.
class Engine
{
public:
    explicit Engine(EngineConfig config = {});

    Fixture& fixture() noexcept { return *fixture_; }
    pipeline::ReportStore& reports() noexcept { return reports_; }
    bool time_control() const noexcept { return config_.time_control; }
    std::optional<Hash256> c1_proposal() const noexcept { return c1_; }

    /// Runs every stakeholder's verification pipeline on an Upgrade proposal
    /// and stores the reports. Votes are left to the caller.
    void verify_all(const Hash256& proposal_id);

private:
    EngineConfig config_;
    std::unique_ptr<Fixture> fixture_;
    pipeline::ReportStore reports_;
    std::optional<Hash256> c1_;
};

struct HttpResponse
{
    int status = 200;
    nlohmann::json body;
};

/// Transport-independent request handling; the HTTP server delegates here.
class ApiService
{
public:
    explicit ApiService(Engine& engine);

    HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

    /// Blocks serving HTTP until stop() is called.
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and serves on a background thread.
    int start_background(const std::string& host);
    void stop();

    ~ApiService();

private:
    struct Server;

    Engine& engine_;
    std::unique_ptr<Server> server_;
};

}  // namespace detdeploy::harness
