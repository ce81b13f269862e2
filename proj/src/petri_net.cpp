// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/conformance.hpp>

#include <algorithm>

namespace detdeploy::conformance
{
std::size_t PetriNet::place(std::string_view name) const
{
    const auto it = std::find(places.begin(), places.end(), name);
    if (it == places.end())
        throw ConformanceError("unknown place '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - places.begin());
}

std::optional<std::size_t> PetriNet::transition_for(std::string_view label) const
{
    for (std::size_t t = 0; t < transitions.size(); ++t)
        if (transitions[t].label && *transitions[t].label == label)
            return t;
    return std::nullopt;
}

bool PetriNet::enabled(const Marking& m, std::size_t t) const
{
    Marking need(places.size(), 0);
    for (const auto p : transitions[t].inputs)
        ++need[p];
    for (std::size_t p = 0; p < need.size(); ++p)
        if (m[p] < need[p])
            return false;
    return true;
}

void PetriNet::fire(Marking& m, std::size_t t) const
{
    for (const auto p : transitions[t].inputs)
        --m[p];
    for (const auto p : transitions[t].outputs)
        ++m[p];
}

PetriNet reference_net()
{
    PetriNet net;
    net.places = {"source", "created", "packaged", "voted", "queued_for_execution",
        "queued_for_upgrade", "executed", "upgraded", "sink"};
    const auto p = [&](std::string_view name) { return net.place(name); };

    const auto visible = [&](std::string_view label, std::vector<std::size_t> in,
                             std::vector<std::size_t> out) {
        net.transitions.push_back({std::string(label), std::string(label), std::move(in), std::move(out)});
    };
    const auto silent = [&](std::string name, std::vector<std::size_t> in, std::vector<std::size_t> out) {
        net.transitions.push_back({std::move(name), std::nullopt, std::move(in), std::move(out)});
    };

    visible(activity::proposal_created, {p("source")}, {p("created")});
    visible(activity::package_created, {p("created")}, {p("packaged")});
    visible(activity::vote_cast, {p("packaged")}, {p("voted")});
    silent("tau_next_vote", {p("voted")}, {p("packaged")});
    visible(activity::proposal_queued, {p("voted")},
        {p("queued_for_execution"), p("queued_for_upgrade")});
    visible(activity::proposal_executed, {p("queued_for_execution")}, {p("executed")});
    visible(activity::upgrade_executed, {p("queued_for_upgrade")}, {p("upgraded")});
    silent("tau_deployed", {p("executed"), p("upgraded")}, {p("sink")});
    silent("tau_rejected_or_timeout", {p("voted")}, {p("sink")});

    net.initial_marking.assign(net.places.size(), 0);
    net.final_marking.assign(net.places.size(), 0);
    net.initial_marking[p("source")] = 1;
    net.final_marking[p("sink")] = 1;
    return net;
}

}  // namespace detdeploy::conformance
