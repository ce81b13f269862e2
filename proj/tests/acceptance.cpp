// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

// Exit gate: one PASS/FAIL line per primary criterion.

#include <detdeploy/harness.hpp>

#include "oracle/reference_keccak.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace detdeploy;
using namespace detdeploy::harness;
using governance::ProposalState;
using governance::Support;
using ledger::ErrorCode;

namespace
{
struct Outcome
{
    bool ok = true;
    std::string detail;

    void check(bool cond, const std::string& what)
    {
        if (!cond && ok)
        {
            ok = false;
            detail = what;
        }
    }
};

int failures = 0;

void criterion(const char* name, double limit_seconds, const std::function<Outcome()>& body)
{
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try
    {
        out = body();
    }
    catch (const std::exception& e)
    {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_seconds > 0 && secs >= limit_seconds)
        out.check(false, "took " + std::to_string(secs) + " s");
    std::printf("%s  %-28s %.3fs%s%s\n", out.ok ? "PASS" : "FAIL", name, secs,
        out.detail.empty() ? "" : "  ", out.detail.c_str());
    failures += !out.ok;
}

Outcome conforming()
{
    Outcome o;
    for (const char* id : {"C1", "C2", "C3"})
    {
        const auto r = run_scenario(*find_scenario(id));
        const auto replay = conformance::token_replay(r.log, conformance::reference_net());
        o.check(replay.fitness == 1.0, std::string(id) + " fitness " + std::to_string(replay.fitness));
        for (const auto& t : replay.traces)
            o.check(t.fitness == 1.0, std::string(id) + " trace below 1.0");
    }
    return o;
}

Outcome non_conforming()
{
    Outcome o;
    const std::vector<std::pair<const char*, ErrorCode>> expected = {
        {"N1", ErrorCode::NotQueued},
        {"N2", ErrorCode::TimelockNotElapsed},
        {"N3", ErrorCode::VotingClosed},
        {"N4", ErrorCode::VotingNotStarted},
        {"N5", ErrorCode::AlreadyVoted},
        {"N6", ErrorCode::QuorumNotReached},
        {"N7", ErrorCode::AddressMismatch},
    };
    for (const auto& [id, code] : expected)
    {
        const auto r = run_scenario(*find_scenario(id));
        const auto codes = r.revert_codes();
        o.check(std::find(codes.begin(), codes.end(), code) != codes.end(),
            std::string(id) + " lacks " + std::string(ledger::to_string(code)));
        const auto replay = conformance::token_replay(r.log, conformance::reference_net());
        o.check(replay.fitness == 1.0, std::string(id) + " committed log fitness " + std::to_string(replay.fitness));
    }
    return o;
}

Outcome authenticity()
{
    Outcome o;
    Fixture fx;
    const auto& acc = fx.accounts;
    fx.chain.advance_blocks(1);
    const auto [id, proposed] = fx.propose_upgrade();
    o.check(proposed.committed(), "proposal reverted");
    const auto p = fx.chain.proposal(id);
    fx.chain.advance_blocks(p.snapshot_block - fx.chain.height());
    for (std::size_t i = 0; i < 2; ++i)
        o.check(fx.chain.submit(acc.stakeholders[i], governance::call::CastVote{id, Support::For}).committed(),
            "vote reverted");
    fx.chain.advance_blocks(p.deadline_block + 1 - fx.chain.height());
    o.check(fx.chain.submit(acc.propagator, governance::call::Queue{id}).committed(), "queue reverted");
    const auto eta = *fx.chain.proposal(id).eta;
    while (fx.chain.timestamp() < eta)
        fx.chain.advance_blocks(1);

    const auto& codes = fx.build.derived.init_codes;
    std::size_t total = 0;
    for (const auto& c : codes)
        total += c.size();
    std::mt19937_64 rng(20260101);
    std::size_t rejected = 0;
    const auto root = fx.chain.state_root();
    for (int i = 0; i < 100; ++i)
    {
        auto mutated = codes;
        std::size_t pos = rng() % total;
        std::size_t which = 0;
        while (pos >= mutated[which].size())
            pos -= mutated[which++].size();
        mutated[which][pos] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        const auto r = fx.chain.submit(acc.propagator, governance::call::Execute{id, mutated});
        rejected += r.error == ErrorCode::AddressMismatch;
    }
    o.check(rejected == 100, std::to_string(rejected) + "/100 rejected");
    o.check(fx.chain.state_root() == root, "a reverted mutation changed state");
    const auto ok = fx.chain.submit(acc.propagator, governance::call::Execute{id, codes});
    o.check(ok.committed(), "unmutated deployment reverted");
    o.check(fx.chain.state(id) == ProposalState::Executed, "proposal not executed");
    if (o.ok)
        o.detail = "100/100 AddressMismatch, unmutated committed";
    return o;
}

Outcome dfg_timing()
{
    Outcome o;
    std::vector<ScenarioResult> results;
    for (const char* id : {"C1", "C2", "C3"})
        results.push_back(run_scenario(*find_scenario(id)));
    const auto dfg = conformance::mine_dfg(combined_log(results));
    const auto near = [&](const char* a, const char* b, double want) {
        const auto* e = dfg.edge(a, b);
        o.check(e != nullptr, std::string("missing edge ") + a + "->" + b);
        if (e)
            o.check(std::fabs(e->mean_duration - want) <= 10.0,
                std::string(a) + "->" + b + " mean " + std::to_string(e->mean_duration));
    };
    near("ProposalCreated", "ProposalPackageCreated", 0);
    near("ProposalPackageCreated", "VoteCast", 7200);
    near("VoteCast", "VoteCast", 3600);
    const auto* to_exec = dfg.edge("ProposalQueued", "ProposalExecuted");
    const auto* to_upgrade = dfg.edge("ProposalQueued", "DeterministicUpgradeExecuted");
    o.check(to_exec || to_upgrade, "no edge out of ProposalQueued");
    for (const auto* e : {to_exec, to_upgrade})
        if (e)
            o.check(std::fabs(e->mean_duration - 7200) <= 10.0, "queue->execution mean " + std::to_string(e->mean_duration));
    return o;
}

Outcome gas_ordering()
{
    Outcome o;
    const auto report = gas_report(run_scenario(*find_scenario("C1")));
    const auto* first = report.row("first_vote");
    const auto* second = report.row("subsequent_vote");
    const auto* queue = report.row("queue");
    o.check(first && second && queue, "missing rows");
    if (!o.ok)
        return o;
    o.check(first->gas.gas_used > second->gas.gas_used, "first vote not dearer");
    const ledger::GasSchedule g;
    const auto extra_cold = first->gas.cold_slot_touches - second->gas.cold_slot_touches;
    o.check(first->gas.gas_used - second->gas.gas_used == extra_cold * (g.cold_write_cost - g.warm_write_cost),
        "difference is not the cold-warm surcharge");
    o.check(extra_cold > 0, "no extra cold slot on first vote");
    for (const auto& row : report.rows)
        if (&row != queue)
            o.check(row.gas.gas_used < queue->gas.gas_used, row.step + " >= queue");
    if (o.ok)
        o.detail = "diff=" + std::to_string(first->gas.gas_used - second->gas.gas_used);
    return o;
}

std::vector<std::uint8_t> raw(const char* hex)
{
    const auto b = from_hex(hex);
    return {b.begin(), b.end()};
}

Outcome derivation()
{
    Outcome o;
    // deployer, salt, init code, address (published EIP-1014 examples)
    const std::array<std::array<const char*, 4>, 7> vectors = {{
        {"0000000000000000000000000000000000000000", "0000000000000000000000000000000000000000000000000000000000000000",
            "00", "4d1a2e2bb4f88f0250f26ffff098b0b30b26bf38"},
        {"deadbeef00000000000000000000000000000000", "0000000000000000000000000000000000000000000000000000000000000000",
            "00", "b928f69bb1d91cd65274e3c79d8986362984fda3"},
        {"deadbeef00000000000000000000000000000000", "000000000000000000000000feed000000000000000000000000000000000000",
            "00", "d04116cdd17bebe565eb2422f2497e06cc1c9833"},
        {"0000000000000000000000000000000000000000", "0000000000000000000000000000000000000000000000000000000000000000",
            "deadbeef", "70f2b2914a2a4b783faefb75f459a580616fcb5e"},
        {"00000000000000000000000000000000deadbeef", "00000000000000000000000000000000000000000000000000000000cafebabe",
            "deadbeef", "60f3f640a8508fc6a86d45df051962668e1e8ac7"},
        {"00000000000000000000000000000000deadbeef", "00000000000000000000000000000000000000000000000000000000cafebabe",
            "deadbeefdeadbeefdeadbeefdeadbeefdeadbeefdeadbeefdeadbeefdeadbeefdeadbeefdeadbeefdeadbeef",
            "1d8bfdc5d46dc4f61d6b6115972536ebe6a8854c"},
        {"0000000000000000000000000000000000000000", "0000000000000000000000000000000000000000000000000000000000000000",
            "", "e33c0c7f7df4809055c3eba6c09cfe4baf1bd9e0"},
    }};
    for (const auto& [d, s, c, a] : vectors)
    {
        const auto got = registry::derive_address(Address::from_hex(d), Hash256::from_hex(s), from_hex(c));
        o.check(got.hex() == std::string("0x") + a, std::string("vector ") + a);
        o.check(oracle::hex(oracle::create2(raw(d), raw(s), raw(c))) == a, std::string("oracle disagrees on ") + a);
    }

    const auto registry_addr = account_for("registry");
    const auto [sources, config] = c1_sources();
    const auto base = packages::build_package(sources, 1, config, registry_addr);
    // every address of the version recomputed with the oracle
    const auto salt = registry::version_salt(1);
    const std::vector<std::uint8_t> reg(registry_addr.bytes.begin(), registry_addr.bytes.end());
    const std::vector<std::uint8_t> salt_raw(salt.bytes.begin(), salt.bytes.end());
    for (std::size_t i = 0; i < base.derived.init_codes.size(); ++i)
    {
        const auto& code = base.derived.init_codes[i];
        o.check(base.derived.addresses[i].second.hex() ==
                "0x" + oracle::hex(oracle::create2(reg, salt_raw, {code.begin(), code.end()})),
            "oracle disagrees on " + base.derived.addresses[i].first);
    }
    std::mt19937 rng(7);
    for (int i = 0; i < 10; ++i)
    {
        auto s = sources;
        auto c = config;
        std::shuffle(s.begin(), s.end(), rng);
        std::shuffle(c.contracts.begin(), c.contracts.end(), rng);
        const auto b = packages::build_package(s, 1, c, registry_addr);
        o.check(b.derived.controller == base.derived.controller, "v_i differs after shuffle " + std::to_string(i));
        o.check(b.cid == base.cid, "cid differs after shuffle " + std::to_string(i));
    }
    if (o.ok)
        o.detail = "v_1=" + base.derived.controller.hex();
    return o;
}

Outcome governance_brute_force()
{
    Outcome o;
    std::size_t cases = 0;
    for (std::uint32_t n = 1; n <= 5 && o.ok; ++n)
        for (std::uint32_t q = 1; q <= 5 && o.ok; ++q)
        {
            std::size_t vectors = 1;
            for (std::uint32_t i = 0; i < n; ++i)
                vectors *= 3;  // For, Against, abstain
            for (std::size_t code = 0; code < vectors && o.ok; ++code)
            {
                const Address deployer = account_for("deployer");
                const Address proposer = account_for("package-proposer");
                governance::Chain chain({deployer, account_for("registry"), {1, 10, 0, q}, {}});
                chain.register_account(proposer);
                chain.submit(deployer, governance::call::GrantRole{proposer, governance::Role::PackageProposer});
                std::vector<Address> voters;
                for (std::uint32_t i = 0; i < n; ++i)
                {
                    voters.push_back(account_for("voter-" + std::to_string(i)));
                    chain.register_account(voters.back());
                    chain.submit(deployer, governance::call::GrantRole{voters.back(), governance::Role::Stakeholder});
                }
                chain.submit(deployer, governance::call::CloseBootstrap{});
                const governance::ProposalPayload payload = governance::UpgradePayload{1, account_for("v1"), {}};
                o.check(chain.submit(proposer, governance::call::Propose{payload}).committed(), "propose reverted");
                const auto id = governance::proposal_id(payload);
                chain.advance_blocks(chain.proposal(id).snapshot_block - chain.height());
                std::uint32_t f = 0, a = 0;
                auto c = code;
                for (std::uint32_t i = 0; i < n; ++i, c /= 3)
                {
                    if (c % 3 == 2)
                        continue;
                    const auto s = c % 3 == 0 ? Support::For : Support::Against;
                    o.check(chain.submit(voters[i], governance::call::CastVote{id, s}).committed(), "vote reverted");
                    ++(s == Support::For ? f : a);
                }
                chain.advance_blocks(chain.proposal(id).deadline_block + 1 - chain.height());
                const bool oracle = f >= q && f > a;
                const auto state = chain.state(id);
                o.check(state == (oracle ? ProposalState::Succeeded : ProposalState::Defeated),
                    "n=" + std::to_string(n) + " q=" + std::to_string(q) + " code=" + std::to_string(code));
                ++cases;
            }
        }
    if (o.ok)
        o.detail = std::to_string(cases) + " vote vectors";
    return o;
}

Outcome fitness_formula()
{
    Outcome o;
    struct Pinned
    {
        std::vector<std::string> trace;
        std::uint64_t p, c, m, r;
        double fitness;
    };
    // replayed by hand on the reference net
    const std::vector<Pinned> pinned = {
        {{"ProposalCreated", "ProposalQueued", "ProposalExecuted", "DeterministicUpgradeExecuted"}, 7, 7, 1, 1,
            6.0 / 7.0},
        {{"ProposalCreated", "ProposalPackageCreated", "VoteCast", "ProposalExecuted", "ProposalQueued",
             "DeterministicUpgradeExecuted"},
            9, 9, 1, 1, 8.0 / 9.0},
        {{"ProposalCreated", "ProposalPackageCreated", "VoteCast", "Foo"}, 6, 6, 1, 1, 5.0 / 6.0},
    };
    conformance::EventLog log;
    for (std::size_t i = 0; i < pinned.size(); ++i)
        log.traces.push_back(conformance::make_trace("t" + std::to_string(i), pinned[i].trace));
    const auto replay = conformance::token_replay(log, conformance::reference_net());
    for (std::size_t i = 0; i < pinned.size(); ++i)
    {
        const auto& got = replay.traces[i];
        const auto& want = pinned[i];
        o.check(got.produced == want.p && got.consumed == want.c && got.missing == want.m &&
                    got.remaining == want.r && std::fabs(got.fitness - want.fitness) < 1e-12,
            "trace " + std::to_string(i));
    }
    return o;
}
}  // namespace

int main()
{
    criterion("conforming-scenarios", 5, conforming);
    criterion("non-conforming-scenarios", 5, non_conforming);
    criterion("version-authenticity", 10, authenticity);
    criterion("dfg-timing", 5, dfg_timing);
    criterion("gas-ordering", 2, gas_ordering);
    criterion("deterministic-derivation", 0, derivation);
    criterion("governance-brute-force", 10, governance_brute_force);
    criterion("fitness-formula", 0, fitness_formula);
    return failures == 0 ? 0 : 1;
}
