// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/governance.hpp>
#include <detdeploy/keccak.hpp>

#include <array>

namespace detdeploy::governance
{
using ledger::ErrorCode;
using ledger::TxContext;

namespace
{
constexpr std::array role_names = {"Stakeholder", "PackageProposer", "Propagator", "Voter"};
constexpr std::array kind_names = {"Upgrade", "StakeholderChange", "RoleAssignment", "ParameterChange"};
constexpr std::array support_names = {"For", "Against"};
constexpr std::array state_names = {"Pending", "Active", "Succeeded", "Defeated", "Queued", "Executed"};

std::string proposal_slot(const Hash256& id, std::string_view field)
{
    return "gov/proposal/" + id.hex() + "/" + std::string(field);
}

std::string role_slot(const Address& account, Role role)
{
    return "gov/role/" + std::string(to_string(role)) + "/" + account.hex();
}

void encode_optional(Bytes& out, const auto& value)
{
    out.push_back(value ? 1 : 0);
    append_be(out, value ? static_cast<std::uint64_t>(*value) : 0, 32);
}

bool would_remove_last_stakeholder(const GovernanceState& s, const Address& account, Role role)
{
    return role == Role::Stakeholder && s.has_role(account, Role::Stakeholder) &&
           s.members(Role::Stakeholder) == 1;
}

void apply_grant(GovernanceState& s, TxContext& ctx, const Address& account, Role role)
{
    ctx.write_slot(role_slot(account, role));
    s.roles[account].insert(role);
    ctx.emit("RoleGranted", {{"account", account.hex()}, {"role", std::string(to_string(role))}});
}

void apply_revoke(GovernanceState& s, TxContext& ctx, const Address& account, Role role)
{
    ctx.require(!would_remove_last_stakeholder(s, account, role), ErrorCode::LastStakeholder);
    ctx.write_slot(role_slot(account, role));
    if (auto it = s.roles.find(account); it != s.roles.end())
    {
        it->second.erase(role);
        if (it->second.empty())
            s.roles.erase(it);
    }
    if (!s.bootstrap_open)
        ctx.require(s.electorate_size() >= s.params.quorum, ErrorCode::InvalidParams);
    ctx.emit("RoleRevoked", {{"account", account.hex()}, {"role", std::string(to_string(role))}});
}

Proposal& find_proposal(GovernanceState& s, const TxContext& ctx, const Hash256& id)
{
    const auto it = s.proposals.find(id);
    if (it == s.proposals.end())
        ctx.revert(ErrorCode::UnknownProposal);
    return it->second;
}
}  // namespace

std::string_view to_string(Role role) noexcept
{
    return role_names[static_cast<std::size_t>(role)];
}
std::string_view to_string(ProposalKind kind) noexcept
{
    return kind_names[static_cast<std::size_t>(kind)];
}
std::string_view to_string(Support support) noexcept
{
    return support_names[static_cast<std::size_t>(support)];
}
std::string_view to_string(ProposalState state) noexcept
{
    return state_names[static_cast<std::size_t>(state)];
}

std::optional<Role> parse_role(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < role_names.size(); ++i)
        if (role_names[i] == name)
            return static_cast<Role>(i);
    return std::nullopt;
}

std::optional<Support> parse_support(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < support_names.size(); ++i)
        if (support_names[i] == name)
            return static_cast<Support>(i);
    return std::nullopt;
}

Hash256 proposal_id(const ProposalPayload& payload)
{
    Bytes enc;
    enc.push_back(static_cast<std::uint8_t>(payload.index()));
    std::uint64_t version_id = 0;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, UpgradePayload>)
            {
                version_id = p.version_id;
                enc.insert(enc.end(), p.expected_address.bytes.begin(), p.expected_address.bytes.end());
                enc.insert(enc.end(), p.package_cid.bytes.begin(), p.package_cid.bytes.end());
            }
            else if constexpr (std::is_same_v<T, StakeholderChangePayload>)
            {
                enc.insert(enc.end(), p.account.bytes.begin(), p.account.bytes.end());
                enc.push_back(p.add ? 1 : 0);
            }
            else if constexpr (std::is_same_v<T, RoleAssignmentPayload>)
            {
                enc.insert(enc.end(), p.account.bytes.begin(), p.account.bytes.end());
                enc.push_back(static_cast<std::uint8_t>(p.role));
                enc.push_back(p.grant ? 1 : 0);
            }
            else
            {
                encode_optional(enc, p.voting_delay);
                encode_optional(enc, p.voting_period);
                encode_optional(enc, p.timelock_delay);
                encode_optional(enc, p.quorum);
            }
        },
        payload);
    append_be(enc, version_id, 32);
    return keccak256(enc);
}

ProposalState evaluate_state(const Proposal& p, std::uint64_t height) noexcept
{
    if (p.executed)
        return ProposalState::Executed;
    if (p.eta)
        return ProposalState::Queued;
    if (height < p.snapshot_block)
        return ProposalState::Pending;
    const bool passes = tally_passes(p.for_votes, p.against_votes, p.params.quorum);
    if (height <= p.deadline_block)
    {
        const bool everyone_voted = p.votes.size() >= p.electorate;
        return everyone_voted && passes ? ProposalState::Succeeded : ProposalState::Active;
    }
    return passes ? ProposalState::Succeeded : ProposalState::Defeated;
}

bool GovernanceState::has_role(const Address& account, Role role) const
{
    const auto it = roles.find(account);
    return it != roles.end() && it->second.contains(role);
}

bool GovernanceState::can_vote(const Address& account) const
{
    return has_role(account, Role::Voter) || has_role(account, Role::Stakeholder);
}

std::uint32_t GovernanceState::electorate_size() const
{
    std::uint32_t n = 0;
    for (const auto& [account, set] : roles)
        n += set.contains(Role::Voter) || set.contains(Role::Stakeholder);
    return n;
}

std::uint32_t GovernanceState::members(Role role) const
{
    std::uint32_t n = 0;
    for (const auto& [account, set] : roles)
        n += set.contains(role);
    return n;
}

void check_params(const TxContext& ctx, const GovernanceParams& params)
{
    ctx.require(params.voting_period > 0, ErrorCode::InvalidParams);
    ctx.require(params.quorum >= 1, ErrorCode::InvalidParams);
    ctx.require(params.timelock_delay >= 0, ErrorCode::InvalidParams);
}

void grant_role(GovernanceState& s, TxContext& ctx, const Address& account, Role role)
{
    ctx.require(s.bootstrap_open && ctx.sender() == s.deployer, ErrorCode::Unauthorized);
    apply_grant(s, ctx, account, role);
}

void revoke_role(GovernanceState& s, TxContext& ctx, const Address& account, Role role)
{
    ctx.require(s.bootstrap_open && ctx.sender() == s.deployer, ErrorCode::Unauthorized);
    apply_revoke(s, ctx, account, role);
}

void close_bootstrap(GovernanceState& s, TxContext& ctx)
{
    ctx.require(s.bootstrap_open && ctx.sender() == s.deployer, ErrorCode::Unauthorized);
    ctx.require(s.params.quorum <= s.electorate_size(), ErrorCode::InvalidParams);
    ctx.require(s.members(Role::Stakeholder) >= 1, ErrorCode::LastStakeholder);
    ctx.write_slot("gov/bootstrap");
    s.bootstrap_open = false;
}

Hash256 propose(GovernanceState& s, TxContext& ctx, const ProposalPayload& payload,
    std::uint64_t next_version)
{
    const auto& sender = ctx.sender();
    ctx.require(s.has_role(sender, Role::PackageProposer) || s.has_role(sender, Role::Stakeholder),
        ErrorCode::Unauthorized);

    if (const auto* up = std::get_if<UpgradePayload>(&payload))
        ctx.require(up->version_id == next_version, ErrorCode::BadVersion);
    if (const auto* pc = std::get_if<ParameterChangePayload>(&payload))
    {
        GovernanceParams next = s.params;
        next.voting_delay = pc->voting_delay.value_or(next.voting_delay);
        next.voting_period = pc->voting_period.value_or(next.voting_period);
        next.timelock_delay = pc->timelock_delay.value_or(next.timelock_delay);
        next.quorum = pc->quorum.value_or(next.quorum);
        check_params(ctx, next);
    }

    const auto id = proposal_id(payload);
    ctx.require(!s.proposals.contains(id), ErrorCode::DuplicateProposal);

    Proposal p;
    p.id = id;
    p.payload = payload;
    p.proposer = sender;
    p.creation_block = ctx.block();
    p.snapshot_block = ctx.block() + s.params.voting_delay;
    p.deadline_block = p.snapshot_block + s.params.voting_period;
    p.params = s.params;
    p.electorate = s.electorate_size();

    ctx.write_slot(proposal_slot(id, "core"));
    ctx.emit("ProposalCreated", {{"proposal_id", id.hex()},
                                    {"kind", std::string(to_string(p.kind()))},
                                    {"proposer", sender.hex()}});
    if (const auto* up = p.upgrade())
    {
        ctx.write_slot(proposal_slot(id, "package"));
        ctx.emit("ProposalPackageCreated", {{"version_id", std::to_string(up->version_id)},
                                               {"expected_address", up->expected_address.hex()},
                                               {"package_cid", up->package_cid.hex()}});
    }

    s.proposals.emplace(id, std::move(p));
    s.proposal_order.push_back(id);
    return id;
}

void cast_vote(GovernanceState& s, TxContext& ctx, const Hash256& id, Support support)
{
    auto& p = find_proposal(s, ctx, id);
    const auto& voter = ctx.sender();
    ctx.require(s.can_vote(voter), ErrorCode::Unauthorized);

    const auto state = evaluate_state(p, ctx.block());
    ctx.require(state != ProposalState::Pending, ErrorCode::VotingNotStarted);
    ctx.require(ctx.block() <= p.deadline_block, ErrorCode::VotingClosed);
    ctx.require(!p.votes.contains(voter), ErrorCode::AlreadyVoted);
    ctx.require(state == ProposalState::Active, ErrorCode::VotingClosed);

    ctx.write_slot(proposal_slot(id, "voter/" + voter.hex()));
    ctx.write_slot(proposal_slot(id, "tally"));
    p.votes.emplace(voter, support);
    (support == Support::For ? p.for_votes : p.against_votes) += 1;
    ctx.emit("VoteCast", {{"proposal_id", id.hex()}, {"voter", voter.hex()},
                             {"support", std::string(to_string(support))}});
}

std::int64_t queue(GovernanceState& s, TxContext& ctx, const Hash256& id)
{
    ctx.require(s.has_role(ctx.sender(), Role::Propagator), ErrorCode::Unauthorized);
    auto& p = find_proposal(s, ctx, id);
    ctx.require(evaluate_state(p, ctx.block()) == ProposalState::Succeeded, ErrorCode::QuorumNotReached);

    const auto eta = ctx.timestamp() + p.params.timelock_delay;
    // The timelock stores the whole scheduled operation, one slot per field.
    const std::string base = "timelock/" + id.hex() + "/";
    for (const auto* field : {"target", "calldata_hash", "predecessor", "salt", "eta", "proposal"})
        ctx.write_slot(base + field);
    ctx.write_slot(proposal_slot(id, "core"));
    p.eta = eta;
    ctx.emit("ProposalQueued", {{"proposal_id", id.hex()}, {"eta", std::to_string(eta)}});
    return eta;
}

Proposal& begin_execute(GovernanceState& s, TxContext& ctx, const Hash256& id)
{
    ctx.require(s.has_role(ctx.sender(), Role::Propagator), ErrorCode::Unauthorized);
    auto& p = find_proposal(s, ctx, id);
    ctx.require(evaluate_state(p, ctx.block()) == ProposalState::Queued, ErrorCode::NotQueued);
    ctx.require(ctx.timestamp() >= *p.eta, ErrorCode::TimelockNotElapsed);
    ctx.write_slot(proposal_slot(id, "core"));
    ctx.write_slot("timelock/" + id.hex() + "/eta");
    return p;
}

void finish_execute(Proposal& p, TxContext& ctx)
{
    p.executed = true;
    ctx.emit("ProposalExecuted", {{"proposal_id", p.id.hex()}});
}

void apply_governance_effect(GovernanceState& s, TxContext& ctx, const Proposal& p)
{
    std::visit(
        [&](const auto& payload) {
            using T = std::decay_t<decltype(payload)>;
            if constexpr (std::is_same_v<T, RoleAssignmentPayload>)
            {
                if (payload.grant)
                    apply_grant(s, ctx, payload.account, payload.role);
                else
                    apply_revoke(s, ctx, payload.account, payload.role);
            }
            else if constexpr (std::is_same_v<T, StakeholderChangePayload>)
            {
                if (payload.add)
                    apply_grant(s, ctx, payload.account, Role::Stakeholder);
                else
                    apply_revoke(s, ctx, payload.account, Role::Stakeholder);
            }
            else if constexpr (std::is_same_v<T, ParameterChangePayload>)
            {
                GovernanceParams next = s.params;
                next.voting_delay = payload.voting_delay.value_or(next.voting_delay);
                next.voting_period = payload.voting_period.value_or(next.voting_period);
                next.timelock_delay = payload.timelock_delay.value_or(next.timelock_delay);
                next.quorum = payload.quorum.value_or(next.quorum);
                check_params(ctx, next);
                ctx.require(next.quorum <= s.electorate_size(), ErrorCode::InvalidParams);
                ctx.write_slot("gov/params");
                s.params = next;
            }
            else
            {
                ctx.revert(ErrorCode::InvalidCall);
            }
        },
        p.payload);
}

void to_json(nlohmann::json& j, const GovernanceParams& p)
{
    j = {{"voting_delay", p.voting_delay}, {"voting_period", p.voting_period},
        {"timelock_delay", p.timelock_delay}, {"quorum", p.quorum}};
}

void to_json(nlohmann::json& j, const Proposal& p)
{
    j = {{"proposal_id", p.id.hex()}, {"kind", to_string(p.kind())}, {"proposer", p.proposer.hex()},
        {"creation_block", p.creation_block}, {"snapshot_block", p.snapshot_block},
        {"deadline_block", p.deadline_block}, {"params", p.params}, {"electorate", p.electorate},
        {"for_votes", p.for_votes}, {"against_votes", p.against_votes}, {"executed", p.executed}};
    auto votes = nlohmann::json::object();
    for (const auto& [voter, support] : p.votes)
        votes[voter.hex()] = to_string(support);
    j["votes"] = std::move(votes);
    j["eta"] = p.eta ? nlohmann::json(*p.eta) : nlohmann::json(nullptr);

    std::visit(
        [&](const auto& payload) {
            using T = std::decay_t<decltype(payload)>;
            auto& out = j["payload"];
            if constexpr (std::is_same_v<T, UpgradePayload>)
            {
                out = {{"version_id", payload.version_id},
                    {"expected_address", payload.expected_address.hex()},
                    {"package_cid", payload.package_cid.hex()}};
                j["version_id"] = payload.version_id;
                j["expected_address"] = payload.expected_address.hex();
                j["package_cid"] = payload.package_cid.hex();
            }
            else if constexpr (std::is_same_v<T, StakeholderChangePayload>)
                out = {{"account", payload.account.hex()}, {"add", payload.add}};
            else if constexpr (std::is_same_v<T, RoleAssignmentPayload>)
                out = {{"account", payload.account.hex()}, {"role", to_string(payload.role)},
                    {"grant", payload.grant}};
            else
            {
                out = nlohmann::json::object();
                if (payload.voting_delay)
                    out["voting_delay"] = *payload.voting_delay;
                if (payload.voting_period)
                    out["voting_period"] = *payload.voting_period;
                if (payload.timelock_delay)
                    out["timelock_delay"] = *payload.timelock_delay;
                if (payload.quorum)
                    out["quorum"] = *payload.quorum;
            }
        },
        p.payload);
}

void to_json(nlohmann::json& j, const GovernanceState& s)
{
    auto roles = nlohmann::json::object();
    for (const auto& [account, set] : s.roles)
    {
        auto& list = roles[account.hex()] = nlohmann::json::array();
        for (const auto role : set)
            list.push_back(to_string(role));
    }
    auto proposals = nlohmann::json::array();
    for (const auto& id : s.proposal_order)
        proposals.push_back(s.proposals.at(id));
    j = {{"params", s.params}, {"roles", std::move(roles)}, {"proposals", std::move(proposals)},
        {"deployer", s.deployer.hex()}, {"bootstrap_open", s.bootstrap_open}};
}

}  // namespace detdeploy::governance
