// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/harness.hpp>

#include <algorithm>

namespace detdeploy::harness
{
using governance::ProposalState;
using governance::Support;
using ledger::ErrorCode;
namespace call = governance::call;

namespace
{
constexpr std::int64_t hour = 3600;

Action vote(std::int64_t at, std::size_t who, Support support = Support::For,
    std::optional<ErrorCode> expect = std::nullopt)
{
    return {{Anchor::Creation, at}, ActionKind::Vote, who, support, expect};
}

Action step(Anchor anchor, std::int64_t offset, ActionKind kind,
    std::optional<ErrorCode> expect = std::nullopt)
{
    return {{anchor, offset}, kind, 0, Support::For, expect};
}

std::vector<Action> success_tail()
{
    return {step(Anchor::Deadline, 0, ActionKind::Queue), step(Anchor::Eta, 0, ActionKind::Execute)};
}

std::vector<Action> concat(std::vector<Action> head, const std::vector<Action>& tail)
{
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

std::vector<ScenarioSpec> make_builtins()
{
    const std::vector<Action> two_votes = {vote(1 * hour, 0), vote(2 * hour, 1)};
    std::vector<ScenarioSpec> s;

    s.push_back({"C1", "Valid upgrade proposal with successful quorum", {},
        concat(two_votes, success_tail()), ProposalState::Executed, std::nullopt});
    s.push_back({"C2", "Upgrade proposal rejected by an Against majority", {},
        {vote(2 * hour, 0, Support::Against), vote(3 * hour, 1, Support::Against),
            step(Anchor::Deadline, 0, ActionKind::Advance)},
        ProposalState::Defeated, std::nullopt});
    s.push_back({"C3", "Upgrade proposal below quorum when the voting period expires", {},
        {vote(3 * hour, 0), step(Anchor::Deadline, 0, ActionKind::Advance)},
        ProposalState::Defeated, std::nullopt});

    s.push_back({"N1", "Execution without queueing", {},
        concat(concat(two_votes,
                   {step(Anchor::Deadline, 0, ActionKind::Execute, ErrorCode::NotQueued)}),
            success_tail()),
        ProposalState::Executed, ErrorCode::NotQueued});
    s.push_back({"N2", "Execution before the timelock elapsed", {},
        concat(two_votes,
            {step(Anchor::Deadline, 0, ActionKind::Queue),
                step(Anchor::Eta, -10, ActionKind::Execute, ErrorCode::TimelockNotElapsed),
                step(Anchor::Eta, 0, ActionKind::Execute)}),
        ProposalState::Executed, ErrorCode::TimelockNotElapsed});
    s.push_back({"N3", "Vote after the voting period", {},
        concat(concat(two_votes,
                   {Action{{Anchor::Deadline, 0}, ActionKind::Vote, 2, Support::For,
                       ErrorCode::VotingClosed}}),
            success_tail()),
        ProposalState::Executed, ErrorCode::VotingClosed});
    s.push_back({"N4", "Vote before the voting delay", {},
        concat(concat({vote(0, 0, Support::For, ErrorCode::VotingNotStarted)}, two_votes),
            success_tail()),
        ProposalState::Executed, ErrorCode::VotingNotStarted});
    s.push_back({"N5", "Double vote", {},
        concat({vote(1 * hour, 0), vote(1 * hour + 1800, 0, Support::For, ErrorCode::AlreadyVoted),
                   vote(2 * hour, 1)},
            success_tail()),
        ProposalState::Executed, ErrorCode::AlreadyVoted});
    s.push_back({"N6", "Queueing without quorum", {},
        concat({vote(1 * hour, 0),
                   step(Anchor::Creation, 1 * hour, ActionKind::Queue, ErrorCode::QuorumNotReached),
                   vote(2 * hour, 1)},
            success_tail()),
        ProposalState::Executed, ErrorCode::QuorumNotReached});
    s.push_back({"N7", "Execution with tampered init code", {},
        concat(two_votes,
            {step(Anchor::Deadline, 0, ActionKind::Queue),
                step(Anchor::Eta, 0, ActionKind::ExecuteTampered, ErrorCode::AddressMismatch),
                step(Anchor::Eta, 0, ActionKind::Execute)}),
        ProposalState::Executed, ErrorCode::AddressMismatch});
    return s;
}

/// First block whose timestamp is at or after `t`.
std::uint64_t block_at_or_after(const governance::Chain& chain, std::int64_t t)
{
    const auto spb = chain.seconds_per_block();
    if (t <= 0)
        return 0;
    return static_cast<std::uint64_t>((t + spb - 1) / spb);
}

std::string_view step_name(ActionKind kind)
{
    switch (kind)
    {
    case ActionKind::Vote: return "vote";
    case ActionKind::Queue: return "queue";
    case ActionKind::Execute: return "execute";
    case ActionKind::ExecuteTampered: return "execute_tampered";
    case ActionKind::Advance: return "advance";
    }
    return "unknown";
}

std::string describe(const std::optional<ErrorCode>& code)
{
    return code ? std::string(ledger::to_string(*code)) : std::string("committed");
}
}  // namespace

const std::vector<ScenarioSpec>& builtin_scenarios()
{
    static const auto scenarios = make_builtins();
    return scenarios;
}

const ScenarioSpec* find_scenario(std::string_view id)
{
    const auto& all = builtin_scenarios();
    const auto it = std::find_if(all.begin(), all.end(), [&](const auto& s) { return s.id == id; });
    return it == all.end() ? nullptr : &*it;
}

std::vector<ErrorCode> ScenarioResult::revert_codes() const
{
    std::vector<ErrorCode> out;
    for (const auto& r : receipts)
        if (r.receipt.error)
            out.push_back(*r.receipt.error);
    return out;
}

ScenarioResult run_scenario(const ScenarioSpec& spec)
{
    ScenarioResult result;
    result.id = spec.id;

    Fixture fx(spec.params);
    auto& chain = fx.chain;
    result.receipts = fx.bootstrap;

    chain.advance_blocks(1);
    auto [id, proposed] = fx.propose_upgrade();
    result.proposal_id = id;
    const bool proposal_ok = proposed.committed();
    result.receipts.push_back({"propose", std::move(proposed)});
    if (!proposal_ok)
    {
        result.failures.push_back("proposal reverted");
        return result;
    }

    const auto& stakeholders = fx.accounts.stakeholders;
    for (std::size_t i = 0; i < spec.script.size(); ++i)
    {
        const auto& a = spec.script[i];
        const auto where = "step " + std::to_string(i + 1) + " (" + std::string(step_name(a.kind)) + ")";
        const auto p = chain.proposal(id);

        std::int64_t base = 0;
        switch (a.at.anchor)
        {
        case Anchor::Creation:
            base = chain.timestamp_at(p.creation_block);
            break;
        case Anchor::Deadline:
            base = chain.timestamp_at(p.deadline_block + 1);
            break;
        case Anchor::Eta:
            if (!p.eta)
            {
                result.failures.push_back(where + ": proposal has no eta");
                continue;
            }
            base = *p.eta;
            break;
        }
        const auto target = block_at_or_after(chain, base + a.at.offset_seconds);
        if (target < chain.height())
        {
            result.failures.push_back(where + ": scheduled in the past");
            continue;
        }
        chain.advance_blocks(target - chain.height());

        std::optional<ledger::TxReceipt> receipt;
        switch (a.kind)
        {
        case ActionKind::Vote:
            receipt = chain.submit(stakeholders.at(a.stakeholder), call::CastVote{id, a.support});
            break;
        case ActionKind::Queue:
            receipt = chain.submit(fx.accounts.propagator, call::Queue{id});
            break;
        case ActionKind::Execute:
            receipt = chain.submit(fx.accounts.propagator, call::Execute{id, fx.build.derived.init_codes});
            break;
        case ActionKind::ExecuteTampered:
        {
            auto codes = fx.build.derived.init_codes;
            auto& leaf = codes.front();
            leaf[leaf.size() / 2] ^= 0x01;
            receipt = chain.submit(fx.accounts.propagator, call::Execute{id, std::move(codes)});
            break;
        }
        case ActionKind::Advance:
            break;
        }
        if (!receipt)
            continue;
        if (receipt->error != a.expect)
            result.failures.push_back(where + ": expected " + describe(a.expect) + ", got " +
                                      describe(receipt->error));
        result.receipts.push_back({std::string(step_name(a.kind)), std::move(*receipt)});
    }

    result.final_state = chain.state(id);
    const auto snap = chain.snapshot();
    result.deployed_version = snap.state->registry.current;
    result.events = chain.events();
    result.log = conformance::log_from_ledger(result.events);
    result.replay = conformance::token_replay(result.log, conformance::reference_net());
    result.dfg = conformance::mine_dfg(result.log);

    if (result.final_state != spec.expected_state)
        result.failures.push_back("final state " + std::string(to_string(result.final_state)) +
                                  ", expected " + std::string(to_string(spec.expected_state)));
    const bool deployed_expected = spec.expected_state == ProposalState::Executed;
    if (result.deployed_version.has_value() != deployed_expected)
        result.failures.push_back(deployed_expected ? "no version deployed" : "unexpected deployment");
    for (std::size_t t = 0; t < result.replay.traces.size(); ++t)
        if (result.replay.traces[t].fitness != 1.0)
            result.failures.push_back("trace " + result.log.traces[t].case_id + " fitness " +
                                      std::to_string(result.replay.traces[t].fitness));
    if (spec.expected_revert)
    {
        const auto codes = result.revert_codes();
        if (std::find(codes.begin(), codes.end(), *spec.expected_revert) == codes.end())
            result.failures.push_back("no " + describe(spec.expected_revert) + " revert observed");
    }
    return result;
}

conformance::EventLog combined_log(const std::vector<ScenarioResult>& results)
{
    conformance::EventLog out;
    for (const auto& r : results)
        for (auto trace : r.log.traces)
        {
            trace.case_id = r.id + ":" + trace.case_id;
            out.traces.push_back(std::move(trace));
        }
    return out;
}

void to_json(nlohmann::json& j, const ScenarioResult& r)
{
    auto receipts = nlohmann::json::array();
    for (const auto& s : r.receipts)
    {
        nlohmann::json rj = s.receipt;
        rj["step"] = s.step;
        receipts.push_back(std::move(rj));
    }
    auto traces = nlohmann::json::array();
    for (std::size_t i = 0; i < r.replay.traces.size(); ++i)
    {
        const auto& f = r.replay.traces[i];
        traces.push_back({{"case_id", r.log.traces[i].case_id}, {"produced", f.produced},
            {"consumed", f.consumed}, {"missing", f.missing}, {"remaining", f.remaining},
            {"fitness", f.fitness}});
    }
    j = {{"id", r.id}, {"proposal_id", r.proposal_id.hex()},
        {"final_state", to_string(r.final_state)},
        {"deployed_version", r.deployed_version ? nlohmann::json(*r.deployed_version) : nlohmann::json()},
        {"fitness", r.replay.fitness}, {"traces", std::move(traces)}, {"receipts", std::move(receipts)},
        {"events", r.events}, {"passed", r.passed()}, {"failures", r.failures}};
}

}  // namespace detdeploy::harness
