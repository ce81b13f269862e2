// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// A stakeholder's local verification pipeline: fetch the proposed package,
// rebuild it, check the derived v_i against the proposal, run the standard
// and private tests, and vote accordingly.

#include <detdeploy/chain.hpp>
#include <detdeploy/packages.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace detdeploy::pipeline
{
using TestPredicate =
    std::function<bool(const packages::PackageManifest&, const registry::DerivedVersion&)>;

/// A check that stays inside the stakeholder's environment.
struct PrivateTest
{
    std::string name;
    TestPredicate check;
};

enum class VotePolicy
{
    AllPass,  ///< For iff integrity and every test pass
};

struct StakeholderConfig
{
    Address account;
    std::vector<PrivateTest> private_tests;
    VotePolicy policy = VotePolicy::AllPass;
    std::uint64_t poll_interval = 1;  ///< blocks
    /// Opaque testnet/mainnet rigor flag; carried into reports only.
    bool mainnet_rigor = false;
    /// Optional hook to run a named test externally (e.g. a container);
    /// unset by default, in which case tests run in-process.
    std::function<bool(const std::string& test_name)> external_runner;
};

struct VerificationReport
{
    Hash256 proposal_id;
    Address account;
    bool integrity = false;
    std::map<std::string, bool> standard_results;
    std::map<std::string, bool> private_results;
    governance::Support decision = governance::Support::Against;
    std::uint64_t produced_at = 0;
    std::optional<Address> derived_address;
    bool mainnet_rigor = false;
    std::string note;  ///< empty unless verification could not run

    bool operator==(const VerificationReport&) const = default;
};

void to_json(nlohmann::json& j, const VerificationReport& r);
void from_json(const nlohmann::json& j, VerificationReport& r);

/// Built-in standard checks that packages name in their test suite.
const std::map<std::string, TestPredicate>& standard_checks();

/// Runs the full local verification of an Upgrade proposal. A package that
/// cannot be fetched or rebuilt yields integrity=false and Against.
VerificationReport verify_proposal(const StakeholderConfig& config,
    const governance::Proposal& proposal, const packages::ContentStore& store,
    const Address& registry, std::uint64_t height);

/// Persists reports as `<root>/<proposal_id>/<account>.json`, or in memory
/// when constructed without a root.
class ReportStore
{
public:
    ReportStore() = default;
    explicit ReportStore(std::filesystem::path root);

    void save(const VerificationReport& report);
    std::vector<VerificationReport> for_proposal(const Hash256& proposal_id) const;

private:
    std::optional<std::filesystem::path> root_;
    mutable std::mutex mutex_;
    std::map<Hash256, std::map<Address, VerificationReport>> memory_;
};

struct JournalEntry
{
    std::uint64_t block = 0;
    Hash256 proposal_id;
    std::string action;  ///< "verified", "vote", "skip"
    std::optional<ledger::TxReceipt> receipt;
};

/// One stakeholder node. Discovers new Upgrade proposals when polled,
/// verifies them and casts the decided vote once `vote_at` seconds have
/// passed since the proposal's creation (as soon as voting opens if unset).
class StakeholderNode
{
public:
    StakeholderNode(StakeholderConfig config, const packages::ContentStore& store,
        ReportStore* reports = nullptr, std::optional<std::int64_t> vote_at = std::nullopt);

    /// One polling round against the chain. Returns receipts of votes cast.
    std::vector<ledger::TxReceipt> poll(governance::Chain& chain);

    const StakeholderConfig& config() const noexcept { return config_; }
    const std::vector<JournalEntry>& journal() const noexcept { return journal_; }
    std::optional<VerificationReport> report(const Hash256& proposal_id) const;

private:
    struct Pending
    {
        VerificationReport report;
        std::int64_t due = 0;
        bool done = false;
    };

    StakeholderConfig config_;
    const packages::ContentStore& store_;
    ReportStore* reports_;
    std::optional<std::int64_t> vote_at_;
    std::map<Hash256, Pending> seen_;
    std::vector<JournalEntry> journal_;
};

/// Drives nodes until `until_height`, advancing the chain by the smallest
/// poll interval between rounds.
std::vector<ledger::TxReceipt> run_nodes(governance::Chain& chain,
    std::vector<StakeholderNode*> nodes, std::uint64_t until_height);

}  // namespace detdeploy::pipeline
