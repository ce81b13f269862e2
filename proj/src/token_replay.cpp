// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/conformance.hpp>

#include <deque>
#include <functional>
#include <numeric>
#include <set>

namespace detdeploy::conformance
{
namespace
{
constexpr std::size_t max_silent_depth = 16;

std::uint64_t token_count(const Marking& m)
{
    return static_cast<std::uint64_t>(std::accumulate(m.begin(), m.end(), std::int64_t{0}));
}

/// Shortest sequence of silent transitions from `start` to a marking that
/// satisfies `goal`; transitions are tried in index order so the result is
/// deterministic.
std::optional<std::vector<std::size_t>> silent_path(const PetriNet& net, const Marking& start,
    const std::function<bool(const Marking&)>& goal)
{
    struct Node
    {
        Marking marking;
        std::vector<std::size_t> path;
    };
    std::deque<Node> frontier{{start, {}}};
    std::set<Marking> visited{start};
    while (!frontier.empty())
    {
        auto node = std::move(frontier.front());
        frontier.pop_front();
        if (goal(node.marking))
            return node.path;
        if (node.path.size() >= max_silent_depth)
            continue;
        for (std::size_t t = 0; t < net.transitions.size(); ++t)
        {
            if (net.transitions[t].label || !net.enabled(node.marking, t))
                continue;
            auto next = node.marking;
            net.fire(next, t);
            if (!visited.insert(next).second)
                continue;
            auto path = node.path;
            path.push_back(t);
            frontier.push_back({std::move(next), std::move(path)});
        }
    }
    return std::nullopt;
}

class Replayer
{
public:
    Replayer(const PetriNet& net, std::vector<std::uint64_t>* firings)
      : net_(net), firings_(firings), marking_(net.initial_marking)
    {
        produced_ = token_count(marking_);
    }

    void step(const std::string& activity)
    {
        const auto t = net_.transition_for(activity);
        if (!t)
        {
            // No model counterpart: one missing token consumed, one
            // remaining token produced.
            ++missing_;
            ++consumed_;
            ++produced_;
            ++orphans_;
            return;
        }
        if (!net_.enabled(marking_, *t))
        {
            if (const auto path = silent_path(net_, marking_,
                    [&](const Marking& m) { return net_.enabled(m, *t); }))
                for (const auto s : *path)
                    fire(s);
        }
        if (!net_.enabled(marking_, *t))
        {
            Marking need(net_.places.size(), 0);
            for (const auto p : net_.transitions[*t].inputs)
                ++need[p];
            for (std::size_t p = 0; p < need.size(); ++p)
            {
                if (marking_[p] < need[p])
                {
                    missing_ += static_cast<std::uint64_t>(need[p] - marking_[p]);
                    marking_[p] = need[p];
                }
            }
        }
        fire(*t);
    }

    FitnessResult finish()
    {
        const auto covers_final = [&](const Marking& m) {
            for (std::size_t p = 0; p < m.size(); ++p)
                if (m[p] < net_.final_marking[p])
                    return false;
            return true;
        };
        if (!covers_final(marking_))
            if (const auto path = silent_path(net_, marking_, covers_final))
                for (const auto s : *path)
                    fire(s);

        for (std::size_t p = 0; p < marking_.size(); ++p)
        {
            const auto want = net_.final_marking[p];
            consumed_ += static_cast<std::uint64_t>(want);
            if (marking_[p] < want)
            {
                missing_ += static_cast<std::uint64_t>(want - marking_[p]);
                marking_[p] = 0;
            }
            else
            {
                marking_[p] -= want;
            }
        }
        const auto remaining = token_count(marking_) + orphans_;
        return {produced_, consumed_, missing_, remaining,
            fitness_of(produced_, consumed_, missing_, remaining)};
    }

private:
    void fire(std::size_t t)
    {
        net_.fire(marking_, t);
        consumed_ += net_.transitions[t].inputs.size();
        produced_ += net_.transitions[t].outputs.size();
        if (firings_)
            ++(*firings_)[t];
    }

    const PetriNet& net_;
    std::vector<std::uint64_t>* firings_;
    Marking marking_;
    std::uint64_t produced_ = 0;
    std::uint64_t consumed_ = 0;
    std::uint64_t missing_ = 0;
    std::uint64_t orphans_ = 0;
};

double mean_fitness(const std::vector<FitnessResult>& results)
{
    double sum = 0.0;
    for (const auto& r : results)
        sum += r.fitness;
    return sum / static_cast<double>(results.size());
}
}  // namespace

double fitness_of(std::uint64_t produced, std::uint64_t consumed, std::uint64_t missing,
    std::uint64_t remaining) noexcept
{
    const double missing_ratio = consumed == 0 ? 0.0 : double(missing) / double(consumed);
    const double remaining_ratio = produced == 0 ? 0.0 : double(remaining) / double(produced);
    return 0.5 * (1.0 - missing_ratio) + 0.5 * (1.0 - remaining_ratio);
}

FitnessResult replay_trace(const Trace& trace, const PetriNet& net, std::vector<std::uint64_t>* firings)
{
    Replayer r(net, firings);
    for (const auto& e : trace.events)
        r.step(e.activity);
    return r.finish();
}

ReplayResult token_replay_serial(const EventLog& log, const PetriNet& net)
{
    if (log.traces.empty())
        throw ConformanceError("EmptyLog");
    ReplayResult out;
    out.transition_firings.assign(net.transitions.size(), 0);
    out.traces.reserve(log.traces.size());
    for (const auto& trace : log.traces)
        out.traces.push_back(replay_trace(trace, net, &out.transition_firings));
    out.fitness = mean_fitness(out.traces);
    return out;
}

ReplayResult token_replay(const EventLog& log, const PetriNet& net)
{
    if (log.traces.empty())
        throw ConformanceError("EmptyLog");
    ReplayResult out;
    out.transition_firings.assign(net.transitions.size(), 0);
    out.traces.resize(log.traces.size());
    const auto n = static_cast<std::ptrdiff_t>(log.traces.size());

#pragma omp parallel
    {
        std::vector<std::uint64_t> local(net.transitions.size(), 0);
#pragma omp for schedule(dynamic, 64) nowait
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out.traces[i] = replay_trace(log.traces[i], net, &local);
#pragma omp critical(detdeploy_replay_merge)
        for (std::size_t t = 0; t < local.size(); ++t)
            out.transition_firings[t] += local[t];
    }
    out.fitness = mean_fitness(out.traces);
    return out;
}

}  // namespace detdeploy::conformance
