// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/chain.hpp>

namespace detdeploy::governance
{
using ledger::ErrorCode;

namespace
{
ChainState genesis(const ChainConfig& config)
{
    ChainState s;
    s.governance.params = config.params;
    s.governance.deployer = config.deployer;
    s.registry.registry_address = config.registry_address;
    return s;
}

void execute(ChainState& s, ledger::TxContext& ctx, const call::Execute& c)
{
    auto& p = begin_execute(s.governance, ctx, c.proposal_id);
    if (const auto* up = p.upgrade())
    {
        // The registry only accepts deployments backed by this proposal,
        // which begin_execute has just shown to be queued and past its eta.
        registry::deploy_version(
            s.registry, ctx, up->version_id, c.init_codes, std::optional{up->expected_address});
    }
    else
    {
        apply_governance_effect(s.governance, ctx, p);
    }
    finish_execute(p, ctx);
}
}  // namespace

void to_json(nlohmann::json& j, const ChainState& s)
{
    j = {{"governance", s.governance}, {"registry", s.registry}};
}

void apply_call(ChainState& s, ledger::TxContext& ctx, const Call& c)
{
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, call::NoOp>)
                return;
            else if constexpr (std::is_same_v<T, call::GrantRole>)
                grant_role(s.governance, ctx, v.account, v.role);
            else if constexpr (std::is_same_v<T, call::RevokeRole>)
                revoke_role(s.governance, ctx, v.account, v.role);
            else if constexpr (std::is_same_v<T, call::CloseBootstrap>)
                close_bootstrap(s.governance, ctx);
            else if constexpr (std::is_same_v<T, call::Propose>)
                propose(s.governance, ctx, v.payload, s.registry.next_version());
            else if constexpr (std::is_same_v<T, call::CastVote>)
                cast_vote(s.governance, ctx, v.proposal_id, v.support);
            else if constexpr (std::is_same_v<T, call::Queue>)
                queue(s.governance, ctx, v.proposal_id);
            else
                execute(s, ctx, v);
        },
        c);
}

Chain::Chain(const ChainConfig& config)
  : deployer_(config.deployer),
    registry_address_(config.registry_address),
    ledger_(genesis(config), config.ledger)
{
    if (config.params.voting_period == 0 || config.params.quorum == 0)
        throw std::invalid_argument("voting_period and quorum must be positive");
    ledger_.register_account(config.deployer);
}

ledger::TxReceipt Chain::submit(const Address& sender, const Call& c)
{
    return ledger_.submit_tx(
        sender, [&c](ChainState& s, ledger::TxContext& ctx) { apply_call(s, ctx, c); });
}

ProposalState Chain::state(const Hash256& id) const
{
    const auto snap = ledger_.snapshot();
    const auto& proposals = snap.state->governance.proposals;
    const auto it = proposals.find(id);
    if (it == proposals.end())
        throw QueryError(ErrorCode::UnknownProposal);
    return evaluate_state(it->second, snap.height);
}

Proposal Chain::proposal(const Hash256& id) const
{
    const auto snap = ledger_.snapshot();
    const auto& proposals = snap.state->governance.proposals;
    const auto it = proposals.find(id);
    if (it == proposals.end())
        throw QueryError(ErrorCode::UnknownProposal);
    return it->second;
}

std::vector<Proposal> Chain::proposals() const
{
    const auto snap = ledger_.snapshot();
    std::vector<Proposal> out;
    for (const auto& id : snap.state->governance.proposal_order)
        out.push_back(snap.state->governance.proposals.at(id));
    return out;
}

}  // namespace detdeploy::governance
