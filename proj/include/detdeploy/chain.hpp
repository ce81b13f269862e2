// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <detdeploy/governance.hpp>
#include <detdeploy/ledger.hpp>
#include <detdeploy/registry.hpp>

#include <stdexcept>
#include <variant>
#include <vector>

namespace detdeploy::governance
{
/// World state of the simulated chain: the governance and registry contracts.
struct ChainState
{
    GovernanceState governance;
    registry::RegistryState registry;
};

void to_json(nlohmann::json& j, const ChainState& s);

namespace call
{
struct NoOp
{};
struct GrantRole
{
    Address account;
    Role role;
};
struct RevokeRole
{
    Address account;
    Role role;
};
struct CloseBootstrap
{};
struct Propose
{
    ProposalPayload payload;
};
struct CastVote
{
    Hash256 proposal_id;
    Support support;
};
struct Queue
{
    Hash256 proposal_id;
};
/// init_codes is required for Upgrade proposals (controller last) and
/// ignored otherwise.
struct Execute
{
    Hash256 proposal_id;
    std::vector<Bytes> init_codes;
};
}  // namespace call

using Call = std::variant<call::NoOp, call::GrantRole, call::RevokeRole, call::CloseBootstrap,
    call::Propose, call::CastVote, call::Queue, call::Execute>;

/// Dispatches one call against the chain state inside a transaction.
void apply_call(ChainState& state, ledger::TxContext& ctx, const Call& c);

/// Off-chain query failure (e.g. UnknownProposal).
class QueryError : public std::runtime_error
{
public:
    explicit QueryError(ledger::ErrorCode code)
      : std::runtime_error(std::string(ledger::to_string(code))), code_(code)
    {}
    ledger::ErrorCode code() const noexcept { return code_; }

private:
    ledger::ErrorCode code_;
};

struct ChainConfig
{
    Address deployer;
    Address registry_address;
    GovernanceParams params;
    ledger::LedgerConfig ledger;
};

/// The governance and registry contracts deployed on one simulated ledger.
class Chain
{
public:
    explicit Chain(const ChainConfig& config);

    void register_account(const Address& account) { ledger_.register_account(account); }

    ledger::TxReceipt submit(const Address& sender, const Call& c);
    std::uint64_t advance_blocks(std::uint64_t blocks) { return ledger_.advance_blocks(blocks); }

    std::uint64_t height() const { return ledger_.height(); }
    std::int64_t timestamp() const { return ledger_.timestamp(); }
    std::int64_t timestamp_at(std::uint64_t height) const { return ledger_.timestamp_at(height); }
    std::int64_t seconds_per_block() const { return ledger_.seconds_per_block(); }

    ledger::Snapshot<ChainState> snapshot() const { return ledger_.snapshot(); }

    ProposalState state(const Hash256& id) const;
    Proposal proposal(const Hash256& id) const;
    std::vector<Proposal> proposals() const;

    std::vector<ledger::LedgerEvent> events() const { return ledger_.events(); }
    std::vector<ledger::TxReceipt> receipts() const { return ledger_.receipts(); }
    Hash256 state_root() const { return ledger_.state_root(); }

    const Address& registry_address() const noexcept { return registry_address_; }
    const Address& deployer() const noexcept { return deployer_; }

private:
    Address deployer_;
    Address registry_address_;
    ledger::Ledger<ChainState> ledger_;
};

}  // namespace detdeploy::governance
