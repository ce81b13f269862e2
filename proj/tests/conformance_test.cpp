// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/conformance.hpp>

#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <set>

using namespace detdeploy;
using namespace detdeploy::conformance;

namespace
{
const std::string C = "ProposalCreated";
const std::string P = "ProposalPackageCreated";
const std::string V = "VoteCast";
const std::string Q = "ProposalQueued";
const std::string E = "ProposalExecuted";
const std::string U = "DeterministicUpgradeExecuted";
const std::vector<std::string> alphabet = {C, P, V, Q, E, U};

FitnessResult replay(const std::vector<std::string>& activities)
{
    return replay_trace(make_trace("t", activities), reference_net());
}

// Language membership by exhaustive exploration of the reachability graph:
// the set of markings reachable after each prefix, closed under silent moves.
bool accepts(const PetriNet& net, const std::vector<std::string>& trace)
{
    const auto closure = [&](std::set<Marking> frontier) {
        std::deque<Marking> work(frontier.begin(), frontier.end());
        while (!work.empty())
        {
            const auto m = work.front();
            work.pop_front();
            for (std::size_t t = 0; t < net.transitions.size(); ++t)
            {
                if (net.transitions[t].label || !net.enabled(m, t))
                    continue;
                auto next = m;
                net.fire(next, t);
                if (frontier.insert(next).second)
                    work.push_back(next);
            }
        }
        return frontier;
    };

    auto current = closure({net.initial_marking});
    for (const auto& a : trace)
    {
        std::set<Marking> next;
        for (const auto& m : current)
            for (std::size_t t = 0; t < net.transitions.size(); ++t)
                if (net.transitions[t].label == a && net.enabled(m, t))
                {
                    auto n = m;
                    net.fire(n, t);
                    next.insert(n);
                }
        if (next.empty())
            return false;
        current = closure(std::move(next));
    }
    return current.contains(net.final_marking);
}

EventLog random_log(std::mt19937_64& rng, std::size_t traces, std::size_t max_len)
{
    EventLog log;
    for (std::size_t i = 0; i < traces; ++i)
    {
        Trace t{"case-" + std::to_string(i), {}};
        std::int64_t ts = 1000;
        const auto len = rng() % (max_len + 1);
        for (std::size_t k = 0; k < len; ++k)
        {
            ts += static_cast<std::int64_t>(rng() % 5000);
            t.events.push_back({alphabet[rng() % alphabet.size()], ts, k + 1, {}});
        }
        log.traces.push_back(std::move(t));
    }
    return log;
}
}  // namespace

TEST(ReferenceNet, Structure)
{
    const auto net = reference_net();
    EXPECT_EQ(net.places.size(), 9u);
    for (const auto& a : alphabet)
        EXPECT_TRUE(net.transition_for(a).has_value()) << a;
    EXPECT_FALSE(net.transition_for("Foo").has_value());
    std::size_t silent = 0;
    for (const auto& t : net.transitions)
    {
        silent += !t.label.has_value();
        EXPECT_FALSE(t.inputs.empty());
        EXPECT_FALSE(t.outputs.empty());
    }
    EXPECT_EQ(silent, 3u);
}

TEST(TokenReplay, ValidVariantsFitPerfectly)
{
    const std::vector<std::vector<std::string>> valid = {
        {C, P, V, V, Q, E, U},
        {C, P, V, V, Q, U, E},
        {C, P, V, Q, E, U},
        {C, P, V, V},
        {C, P, V},
        {C, P, V, V, V, V, V},
    };
    for (const auto& t : valid)
    {
        const auto r = replay(t);
        EXPECT_EQ(r.fitness, 1.0);
        EXPECT_EQ(r.missing, 0u);
        EXPECT_EQ(r.remaining, 0u);
        EXPECT_EQ(r.produced, r.consumed);
    }
}

// Deviant traces replayed by hand on the reference net.
TEST(TokenReplay, PinnedDeviantTraces)
{
    struct Pinned
    {
        std::vector<std::string> trace;
        FitnessResult expect;
    };
    const std::vector<Pinned> pinned = {
        {{C, Q, E, U}, {7, 7, 1, 1, 6.0 / 7.0}},
        {{C, P, V, E, Q, U}, {9, 9, 1, 1, 8.0 / 9.0}},
        {{C, P, V, "Foo"}, {6, 6, 1, 1, 5.0 / 6.0}},
        {{}, {1, 1, 1, 1, 0.0}},
    };
    for (const auto& p : pinned)
    {
        const auto r = replay(p.trace);
        EXPECT_EQ(r.produced, p.expect.produced);
        EXPECT_EQ(r.consumed, p.expect.consumed);
        EXPECT_EQ(r.missing, p.expect.missing);
        EXPECT_EQ(r.remaining, p.expect.remaining);
        EXPECT_DOUBLE_EQ(r.fitness, p.expect.fitness);
    }
}

TEST(TokenReplay, FitnessFormula)
{
    EXPECT_DOUBLE_EQ(fitness_of(7, 7, 1, 1), 6.0 / 7.0);
    EXPECT_DOUBLE_EQ(fitness_of(10, 8, 2, 5), 0.5 * (1 - 2.0 / 8) + 0.5 * (1 - 5.0 / 10));
    EXPECT_DOUBLE_EQ(fitness_of(0, 0, 0, 0), 1.0);
}

TEST(TokenReplay, FitnessBoundsOnRandomTraces)
{
    std::mt19937_64 rng(5);
    const auto net = reference_net();
    for (int i = 0; i < 3000; ++i)
    {
        std::vector<std::string> t;
        const auto len = rng() % 12;
        for (std::size_t k = 0; k < len; ++k)
            t.push_back(rng() % 10 == 0 ? std::string("Unknown") : alphabet[rng() % alphabet.size()]);
        const auto r = replay_trace(make_trace("x", t), net);
        ASSERT_GE(r.fitness, 0.0);
        ASSERT_LE(r.fitness, 1.0);
        ASSERT_LE(r.missing, r.consumed);
        ASSERT_LE(r.remaining, r.produced);
        ASSERT_DOUBLE_EQ(r.fitness, fitness_of(r.produced, r.consumed, r.missing, r.remaining));
    }
}

TEST(TokenReplay, PerfectFitIffTraceIsInTheLanguage)
{
    const auto net = reference_net();
    std::size_t accepted = 0;
    std::vector<std::string> trace;
    const std::function<void(std::size_t)> walk = [&](std::size_t depth) {
        const bool in_language = accepts(net, trace);
        const bool perfect = replay_trace(make_trace("x", trace), net).fitness == 1.0;
        ASSERT_EQ(in_language, perfect) << "length " << trace.size();
        accepted += in_language;
        if (depth == 0)
            return;
        for (const auto& a : alphabet)
        {
            trace.push_back(a);
            walk(depth - 1);
            trace.pop_back();
        }
    };
    walk(6);
    // CPV, CPVV, CPVVV, CPVVVV, CPVQEU, CPVQUE
    EXPECT_EQ(accepted, 6u);
}

TEST(TokenReplay, UnknownActivitiesCountAsDeviation)
{
    const auto r = replay({C, P, "Foo", V});
    EXPECT_LT(r.fitness, 1.0);
    EXPECT_GE(r.missing, 1u);
    EXPECT_GE(r.remaining, 1u);
}

TEST(TokenReplay, AggregateIsMeanAndParallelEqualsSerial)
{
    std::mt19937_64 rng(17);
    const auto log = random_log(rng, 500, 10);
    const auto net = reference_net();
    const auto par = token_replay(log, net);
    const auto ser = token_replay_serial(log, net);
    EXPECT_EQ(par, ser);
    double sum = 0;
    for (const auto& t : ser.traces)
        sum += t.fitness;
    EXPECT_NEAR(ser.fitness, sum / static_cast<double>(ser.traces.size()), 1e-12);
    EXPECT_THROW(token_replay(EventLog{}, net), ConformanceError);
    EXPECT_THROW(token_replay_serial(EventLog{}, net), ConformanceError);
}

TEST(TokenReplay, FiringCountersCoverTheSuccessPath)
{
    EventLog log;
    log.traces.push_back(make_trace("a", {C, P, V, V, Q, E, U}));
    log.traces.push_back(make_trace("b", {C, P, V}));
    const auto net = reference_net();
    const auto r = token_replay(log, net);
    ASSERT_EQ(r.transition_firings.size(), net.transitions.size());
    for (std::size_t t = 0; t < net.transitions.size(); ++t)
        EXPECT_GT(r.transition_firings[t], 0u) << net.transitions[t].name;
}

TEST(Dfg, FrequenciesSumToTraceSteps)
{
    std::mt19937_64 rng(23);
    for (int round = 0; round < 20; ++round)
    {
        const auto log = random_log(rng, 1 + rng() % 100, 12);
        if (std::all_of(log.traces.begin(), log.traces.end(), [](const auto& t) { return t.events.empty(); }))
            continue;
        const auto dfg = mine_dfg(log);
        std::uint64_t edges = 0, steps = 0, starts = 0, nonempty = 0;
        for (const auto& e : dfg.edges)
            edges += e.frequency;
        for (const auto& t : log.traces)
        {
            steps += t.events.empty() ? 0 : t.events.size() - 1;
            nonempty += !t.events.empty();
        }
        for (const auto& [a, n] : dfg.start_activities)
            starts += n;
        ASSERT_EQ(edges, steps);
        ASSERT_EQ(starts, nonempty);
        ASSERT_TRUE(std::is_sorted(dfg.edges.begin(), dfg.edges.end(),
            [](const auto& a, const auto& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); }));
        ASSERT_EQ(dfg, mine_dfg_serial(log));
    }
}

TEST(Dfg, ConstantGapsGiveExactMeans)
{
    std::mt19937_64 rng(29);
    for (const std::int64_t gap : {0, 1, 10, 3600, 7200, 86401})
    {
        EventLog log;
        for (int i = 0; i < 50; ++i)
        {
            Trace t{std::to_string(i), {}};
            std::int64_t ts = static_cast<std::int64_t>(rng() % 100000);
            const auto len = 2 + rng() % 8;
            for (std::size_t k = 0; k < len; ++k, ts += gap)
                t.events.push_back({alphabet[rng() % alphabet.size()], ts, 0, {}});
            log.traces.push_back(std::move(t));
        }
        for (const auto& e : mine_dfg(log).edges)
            ASSERT_EQ(e.mean_duration, static_cast<double>(gap)) << e.from << "->" << e.to;
    }
}

TEST(Dfg, MeanOverAllOccurrences)
{
    EventLog log;
    log.traces.push_back(make_trace("a", {C, P, V}, {0, 0, 3600}));
    log.traces.push_back(make_trace("b", {C, P, V}, {0, 0, 7200}));
    log.traces.push_back(make_trace("c", {C, P, V, V}, {0, 0, 10800, 14400}));
    const auto dfg = mine_dfg(log);
    EXPECT_EQ(dfg.edge(C, P)->mean_duration, 0.0);
    EXPECT_EQ(dfg.edge(P, V)->mean_duration, 7200.0);
    EXPECT_EQ(dfg.edge(P, V)->frequency, 3u);
    EXPECT_EQ(dfg.edge(V, V)->mean_duration, 3600.0);
    EXPECT_EQ(dfg.edge(V, C), nullptr);
    EXPECT_EQ(dfg.start_activities.at(C), 3u);
    EXPECT_EQ(dfg.end_activities.at(V), 3u);
    EXPECT_THROW(mine_dfg(EventLog{}), ConformanceError);

    const auto dot = to_dot(dfg);
    EXPECT_NE(dot.find("digraph"), std::string::npos);
    EXPECT_NE(dot.find("\"ProposalPackageCreated\" -> \"VoteCast\""), std::string::npos);
    EXPECT_NE(dot.find("2h"), std::string::npos);
}

TEST(Dfg, DurationFormatting)
{
    EXPECT_EQ(format_duration(0), "0s");
    EXPECT_EQ(format_duration(7200), "2h");
    EXPECT_EQ(format_duration(14420), "4h 20s");
    EXPECT_EQ(format_duration(90), "1m 30s");
}

namespace
{
EventLog tricky_log()
{
    EventLog log;
    Trace t{"case,with \"quotes\"", {}};
    t.events.push_back({C, 1700000000, 7, {{"proposal_id", "0xabc"}, {"note", "a,b\n\"c\" <d> & 'e'"}}});
    t.events.push_back({V, 1700003600, 8, {{"voter", "0x01"}, {"utf8", "caf\xc3\xa9"}}});
    log.traces.push_back(std::move(t));
    log.traces.push_back(Trace{"second", {{P, 0, 1, {}}}});
    return log;
}
}  // namespace

TEST(EventLogIo, CsvRoundTrip)
{
    const auto log = tricky_log();
    const auto csv = export_log(log, LogFormat::Csv);
    EXPECT_TRUE(csv.starts_with("case_id,activity,timestamp,tx_id,payload_json\n"));
    EXPECT_NE(csv.find("2023-11-14T22:13:20Z"), std::string::npos);
    EXPECT_EQ(import_log(csv, LogFormat::Csv), log);
}

TEST(EventLogIo, XesRoundTrip)
{
    const auto log = tricky_log();
    const auto xes = export_log(log, LogFormat::Xes);
    EXPECT_NE(xes.find("<log xes.version=\"1.0\""), std::string::npos);
    EXPECT_NE(xes.find("key=\"concept:name\""), std::string::npos);
    EXPECT_NE(xes.find("<date key=\"time:timestamp\" value=\"2023-11-14T22:13:20Z\"/>"), std::string::npos);
    EXPECT_EQ(import_log(xes, LogFormat::Xes), log);
}

TEST(EventLogIo, EmptyLogIsAValidDocument)
{
    const EventLog empty;
    const auto xes = export_log(empty, LogFormat::Xes);
    EXPECT_NE(xes.find("</log>"), std::string::npos);
    EXPECT_EQ(import_log(xes, LogFormat::Xes), empty);
    const auto csv = export_log(empty, LogFormat::Csv);
    EXPECT_EQ(csv, "case_id,activity,timestamp,tx_id,payload_json\n");
    EXPECT_EQ(import_log(csv, LogFormat::Csv), empty);
}

TEST(EventLogIo, MalformedInputIsRejected)
{
    EXPECT_THROW(import_log("wrong,header\n", LogFormat::Csv), ConformanceError);
    EXPECT_THROW(import_log("case_id,activity,timestamp,tx_id,payload_json\na,b,notatime,1,{}\n", LogFormat::Csv),
        ConformanceError);
    EXPECT_THROW(import_log("case_id,activity,timestamp,tx_id,payload_json\n\"a,b\n", LogFormat::Csv),
        ConformanceError);
    EXPECT_THROW(import_log("<log><trace><event>", LogFormat::Xes), ConformanceError);
    EXPECT_EQ(format_for_path("x/combined.xes"), LogFormat::Xes);
    EXPECT_EQ(format_for_path("x/combined.csv"), LogFormat::Csv);
}

TEST(LogFromLedger, GroupsByProposalAndCoTransaction)
{
    using ledger::LedgerEvent;
    const std::vector<LedgerEvent> events = {
        {"RoleGranted", 1, 0, 0, 0, {{"account", "0x1"}, {"role", "Voter"}}},
        {"ProposalCreated", 2, 0, 1, 10, {{"proposal_id", "0xaa"}}},
        {"ProposalPackageCreated", 2, 1, 1, 10, {{"version_id", "1"}}},
        {"ProposalCreated", 3, 0, 2, 20, {{"proposal_id", "0xbb"}}},
        {"VoteCast", 4, 0, 3, 30, {{"proposal_id", "0xaa"}}},
        {"DeterministicUpgradeExecuted", 5, 0, 4, 40, {{"version_id", "1"}}},
        {"ProposalExecuted", 5, 1, 4, 40, {{"proposal_id", "0xaa"}}},
    };
    const auto log = log_from_ledger(events);
    ASSERT_EQ(log.traces.size(), 2u);
    EXPECT_EQ(log.traces[0].case_id, "0xaa");
    std::vector<std::string> names;
    for (const auto& e : log.traces[0].events)
        names.push_back(e.activity);
    EXPECT_EQ(names, (std::vector<std::string>{C, P, V, U, E}));
    EXPECT_EQ(log.traces[1].events.size(), 1u);
}
