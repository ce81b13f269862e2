// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Proposal lifecycle with roles, voting delay/period, quorum tallying and a
// timelock queue. Every mutating operation runs inside a ledger transaction.

#include <detdeploy/bytes.hpp>
#include <detdeploy/ledger.hpp>

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace detdeploy::governance
{
enum class Role : std::uint8_t
{
    Stakeholder,
    PackageProposer,
    Propagator,
    Voter,
};

enum class ProposalKind : std::uint8_t
{
    Upgrade,
    StakeholderChange,
    RoleAssignment,
    ParameterChange,
};

enum class Support : std::uint8_t
{
    For,
    Against,
};

enum class ProposalState : std::uint8_t
{
    Pending,
    Active,
    Succeeded,
    Defeated,
    Queued,
    Executed,
};

std::string_view to_string(Role role) noexcept;
std::string_view to_string(ProposalKind kind) noexcept;
std::string_view to_string(Support support) noexcept;
std::string_view to_string(ProposalState state) noexcept;
std::optional<Role> parse_role(std::string_view name) noexcept;
std::optional<Support> parse_support(std::string_view name) noexcept;

struct GovernanceParams
{
    std::uint64_t voting_delay = 1;      ///< blocks between creation and the snapshot
    std::uint64_t voting_period = 2160;  ///< blocks the vote stays open
    std::int64_t timelock_delay = 7200;  ///< seconds between queueing and execution
    std::uint32_t quorum = 2;            ///< approvals required

    bool operator==(const GovernanceParams&) const = default;
};

struct UpgradePayload
{
    std::uint64_t version_id = 0;
    Address expected_address;  ///< v_i
    Hash256 package_cid;

    bool operator==(const UpgradePayload&) const = default;
};

struct StakeholderChangePayload
{
    Address account;
    bool add = true;

    bool operator==(const StakeholderChangePayload&) const = default;
};

struct RoleAssignmentPayload
{
    Address account;
    Role role = Role::Voter;
    bool grant = true;

    bool operator==(const RoleAssignmentPayload&) const = default;
};

/// Unset fields keep their current value.
struct ParameterChangePayload
{
    std::optional<std::uint64_t> voting_delay;
    std::optional<std::uint64_t> voting_period;
    std::optional<std::int64_t> timelock_delay;
    std::optional<std::uint32_t> quorum;

    bool operator==(const ParameterChangePayload&) const = default;
};

/// Alternative index matches ProposalKind.
using ProposalPayload = std::variant<UpgradePayload, StakeholderChangePayload,
    RoleAssignmentPayload, ParameterChangePayload>;

inline ProposalKind kind_of(const ProposalPayload& payload) noexcept
{
    return static_cast<ProposalKind>(payload.index());
}

/// Keccak-256 over the canonical encoding of (kind, payload, version id).
Hash256 proposal_id(const ProposalPayload& payload);

struct Proposal
{
    Hash256 id;
    ProposalPayload payload;
    Address proposer;
    std::uint64_t creation_block = 0;
    std::uint64_t snapshot_block = 0;  ///< first block votes are accepted
    std::uint64_t deadline_block = 0;  ///< last block votes are accepted
    GovernanceParams params;           ///< frozen at creation
    std::uint32_t electorate = 0;      ///< eligible voters at creation
    std::uint32_t for_votes = 0;
    std::uint32_t against_votes = 0;
    std::map<Address, Support> votes;
    std::optional<std::int64_t> eta;
    bool executed = false;

    ProposalKind kind() const noexcept { return kind_of(payload); }
    const UpgradePayload* upgrade() const noexcept { return std::get_if<UpgradePayload>(&payload); }

    bool operator==(const Proposal&) const = default;
};

/// for >= quorum and for > against.
constexpr bool tally_passes(std::uint32_t for_votes, std::uint32_t against_votes,
    std::uint32_t quorum) noexcept
{
    return for_votes >= quorum && for_votes > against_votes;
}

/// Derived state at `height`. Succeeded is reached early once every member
/// of the electorate has voted and the tally passes.
ProposalState evaluate_state(const Proposal& p, std::uint64_t height) noexcept;

struct GovernanceState
{
    GovernanceParams params;
    std::map<Address, std::set<Role>> roles;
    std::map<Hash256, Proposal> proposals;
    std::vector<Hash256> proposal_order;
    Address deployer;
    bool bootstrap_open = true;

    bool has_role(const Address& account, Role role) const;
    bool can_vote(const Address& account) const;
    std::uint32_t electorate_size() const;
    std::uint32_t members(Role role) const;
};

/// Rejects voting_period == 0 or quorum == 0 with InvalidParams.
void check_params(const ledger::TxContext& ctx, const GovernanceParams& params);

// Transaction bodies. Each reverts through ctx on a violated guard.

void grant_role(GovernanceState& s, ledger::TxContext& ctx, const Address& account, Role role);
void revoke_role(GovernanceState& s, ledger::TxContext& ctx, const Address& account, Role role);
/// Ends the bootstrap phase; afterwards roles change only through proposals.
void close_bootstrap(GovernanceState& s, ledger::TxContext& ctx);

Hash256 propose(GovernanceState& s, ledger::TxContext& ctx, const ProposalPayload& payload,
    std::uint64_t next_version);
void cast_vote(GovernanceState& s, ledger::TxContext& ctx, const Hash256& id, Support support);
std::int64_t queue(GovernanceState& s, ledger::TxContext& ctx, const Hash256& id);

/// Guards of execute (role, Queued, eta elapsed) and the bookkeeping writes.
/// Returns the proposal; the caller applies its effect and then calls
/// finish_execute.
Proposal& begin_execute(GovernanceState& s, ledger::TxContext& ctx, const Hash256& id);
void finish_execute(Proposal& p, ledger::TxContext& ctx);

/// Effects of non-upgrade proposals.
void apply_governance_effect(GovernanceState& s, ledger::TxContext& ctx, const Proposal& p);

void to_json(nlohmann::json& j, const GovernanceParams& p);
void to_json(nlohmann::json& j, const Proposal& p);
void to_json(nlohmann::json& j, const GovernanceState& s);

}  // namespace detdeploy::governance
