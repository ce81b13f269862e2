// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/conformance.hpp>

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace detdeploy::conformance
{
namespace
{
struct EdgeStats
{
    std::uint64_t frequency = 0;
    std::int64_t total_seconds = 0;
};

struct Counts
{
    std::map<std::pair<std::string, std::string>, EdgeStats> edges;
    std::map<std::string, std::uint64_t> starts;
    std::map<std::string, std::uint64_t> ends;

    void add(const Trace& trace)
    {
        if (trace.events.empty())
            return;
        ++starts[trace.events.front().activity];
        ++ends[trace.events.back().activity];
        for (std::size_t i = 1; i < trace.events.size(); ++i)
        {
            const auto& a = trace.events[i - 1];
            const auto& b = trace.events[i];
            auto& s = edges[{a.activity, b.activity}];
            ++s.frequency;
            s.total_seconds += b.timestamp - a.timestamp;
        }
    }

    void merge(const Counts& other)
    {
        for (const auto& [key, s] : other.edges)
        {
            auto& mine = edges[key];
            mine.frequency += s.frequency;
            mine.total_seconds += s.total_seconds;
        }
        for (const auto& [a, n] : other.starts)
            starts[a] += n;
        for (const auto& [a, n] : other.ends)
            ends[a] += n;
    }

    Dfg finish() const
    {
        Dfg out;
        for (const auto& [key, s] : edges)
            out.edges.push_back({key.first, key.second, s.frequency,
                static_cast<double>(s.total_seconds) / static_cast<double>(s.frequency)});
        out.start_activities = starts;
        out.end_activities = ends;
        return out;
    }
};
}  // namespace

const DfgEdge* Dfg::edge(std::string_view from, std::string_view to) const
{
    for (const auto& e : edges)
        if (e.from == from && e.to == to)
            return &e;
    return nullptr;
}

Dfg mine_dfg_serial(const EventLog& log)
{
    if (log.traces.empty())
        throw ConformanceError("EmptyLog");
    Counts counts;
    for (const auto& trace : log.traces)
        counts.add(trace);
    return counts.finish();
}

Dfg mine_dfg(const EventLog& log)
{
    if (log.traces.empty())
        throw ConformanceError("EmptyLog");
    Counts total;
    const auto n = static_cast<std::ptrdiff_t>(log.traces.size());
#pragma omp parallel
    {
        Counts local;
#pragma omp for schedule(static) nowait
        for (std::ptrdiff_t i = 0; i < n; ++i)
            local.add(log.traces[i]);
#pragma omp critical(detdeploy_dfg_merge)
        total.merge(local);
    }
    return total.finish();
}

std::string format_duration(double seconds)
{
    if (seconds == 0.0)
        return "0s";
    const bool negative = seconds < 0;
    double rest = std::abs(seconds);
    const auto hours = static_cast<long long>(rest / 3600);
    rest -= static_cast<double>(hours) * 3600;
    const auto minutes = static_cast<long long>(rest / 60);
    rest -= static_cast<double>(minutes) * 60;

    std::ostringstream out;
    if (negative)
        out << '-';
    const char* sep = "";
    if (hours)
    {
        out << hours << 'h';
        sep = " ";
    }
    if (minutes)
    {
        out << sep << minutes << 'm';
        sep = " ";
    }
    if (rest > 0 || (!hours && !minutes))
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", rest);
        out << sep << buf << 's';
    }
    return out.str();
}

std::string to_dot(const Dfg& dfg)
{
    std::set<std::string> nodes;
    for (const auto& e : dfg.edges)
    {
        nodes.insert(e.from);
        nodes.insert(e.to);
    }
    for (const auto& [a, n] : dfg.start_activities)
        nodes.insert(a);

    std::ostringstream out;
    out << "digraph dfg {\n  rankdir=TB;\n  node [shape=box];\n";
    out << "  \"__start\" [shape=circle,label=\"start\"];\n";
    out << "  \"__end\" [shape=doublecircle,label=\"end\"];\n";
    for (const auto& n : nodes)
        out << "  \"" << n << "\";\n";
    for (const auto& [a, n] : dfg.start_activities)
        out << "  \"__start\" -> \"" << a << "\" [label=\"" << n << "\"];\n";
    for (const auto& e : dfg.edges)
        out << "  \"" << e.from << "\" -> \"" << e.to << "\" [label=\"" << e.frequency << " / "
            << format_duration(e.mean_duration) << "\"];\n";
    for (const auto& [a, n] : dfg.end_activities)
        out << "  \"" << a << "\" -> \"__end\" [label=\"" << n << "\"];\n";
    out << "}\n";
    return out.str();
}

}  // namespace detdeploy::conformance
