// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Conformance checking of ledger event logs: the reference Petri net of the
// deployment workflow, token-based replay fitness, and a performance-
// annotated directly-follows graph.
//
// token_replay and mine_dfg parallelise over traces with OpenMP; the
// *_serial variants are the reference implementations they are tested
// against.

#include <detdeploy/ledger.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace detdeploy::conformance
{
namespace activity
{
inline constexpr std::string_view proposal_created = "ProposalCreated";
inline constexpr std::string_view package_created = "ProposalPackageCreated";
inline constexpr std::string_view vote_cast = "VoteCast";
inline constexpr std::string_view proposal_queued = "ProposalQueued";
inline constexpr std::string_view proposal_executed = "ProposalExecuted";
inline constexpr std::string_view upgrade_executed = "DeterministicUpgradeExecuted";
}  // namespace activity

struct Event
{
    std::string activity;
    std::int64_t timestamp = 0;  ///< seconds since the epoch
    std::uint64_t tx_id = 0;
    ledger::Payload payload;

    bool operator==(const Event&) const = default;
};

struct Trace
{
    std::string case_id;
    std::vector<Event> events;  ///< timestamp ordered

    bool operator==(const Trace&) const = default;
};

struct EventLog
{
    std::vector<Trace> traces;

    bool operator==(const EventLog&) const = default;
};

class ConformanceError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Groups committed ledger events into one trace per proposal. An event is
/// assigned to the proposal named by its `proposal_id` payload key, or else
/// to the proposal of another event in the same transaction; events with
/// neither (role grants) are not part of any case.
EventLog log_from_ledger(std::span<const ledger::LedgerEvent> events);

/// Trace built from activity names with the given timestamps (or 0).
Trace make_trace(std::string case_id, const std::vector<std::string>& activities,
    const std::vector<std::int64_t>& timestamps = {});

struct Transition
{
    std::string name;
    std::optional<std::string> label;  ///< nullopt for silent transitions
    std::vector<std::size_t> inputs;   ///< place indices (multiset)
    std::vector<std::size_t> outputs;
};

using Marking = std::vector<std::int64_t>;

struct PetriNet
{
    std::vector<std::string> places;
    std::vector<Transition> transitions;
    Marking initial_marking;
    Marking final_marking;

    std::size_t place(std::string_view name) const;
    /// Visible transition carrying `label`, if any.
    std::optional<std::size_t> transition_for(std::string_view label) const;
    bool enabled(const Marking& m, std::size_t t) const;
    void fire(Marking& m, std::size_t t) const;
};

/// The reference workflow: ProposalCreated, ProposalPackageCreated, one or
/// more VoteCast, then either ProposalQueued followed by ProposalExecuted
/// and DeterministicUpgradeExecuted in any order (success), or a silent end
/// (rejection and timeout, which are structurally identical).
PetriNet reference_net();

struct FitnessResult
{
    std::uint64_t produced = 0;
    std::uint64_t consumed = 0;
    std::uint64_t missing = 0;
    std::uint64_t remaining = 0;
    double fitness = 0.0;

    bool operator==(const FitnessResult&) const = default;
};

/// 1/2 (1 - m/c) + 1/2 (1 - r/p), with empty ratios taken as zero.
double fitness_of(std::uint64_t produced, std::uint64_t consumed, std::uint64_t missing,
    std::uint64_t remaining) noexcept;

struct ReplayResult
{
    std::vector<FitnessResult> traces;
    double fitness = 0.0;  ///< mean over traces
    std::vector<std::uint64_t> transition_firings;  ///< indexed like net.transitions

    bool operator==(const ReplayResult&) const = default;
};

/// Replays one trace. Silent transitions are fired when a shortest silent
/// path enables the next visible transition (or reaches the final marking at
/// the end); otherwise missing tokens are inserted. Activities without a
/// transition count as one missing and one remaining token.
FitnessResult replay_trace(const Trace& trace, const PetriNet& net,
    std::vector<std::uint64_t>* firings = nullptr);

/// Throws ConformanceError on an empty log.
ReplayResult token_replay(const EventLog& log, const PetriNet& net);
ReplayResult token_replay_serial(const EventLog& log, const PetriNet& net);

struct DfgEdge
{
    std::string from;
    std::string to;
    std::uint64_t frequency = 0;
    double mean_duration = 0.0;  ///< seconds

    bool operator==(const DfgEdge&) const = default;
};

struct Dfg
{
    std::vector<DfgEdge> edges;  ///< sorted by (from, to)
    std::map<std::string, std::uint64_t> start_activities;
    std::map<std::string, std::uint64_t> end_activities;

    const DfgEdge* edge(std::string_view from, std::string_view to) const;
    bool operator==(const Dfg&) const = default;
};

/// Throws ConformanceError on an empty log.
Dfg mine_dfg(const EventLog& log);
Dfg mine_dfg_serial(const EventLog& log);

/// Graphviz rendering with frequency and mean-duration labels.
std::string to_dot(const Dfg& dfg);
std::string format_duration(double seconds);

enum class LogFormat
{
    Csv,
    Xes,
};

/// CSV columns: case_id,activity,timestamp,tx_id,payload_json (RFC 4180
/// quoting, ISO-8601 UTC timestamps). XES: concept:name and time:timestamp
/// per the IEEE XES standard, plus tx_id and payload_json attributes.
std::string export_log(const EventLog& log, LogFormat format);
/// Inverse of export_log. Throws ConformanceError on malformed input.
EventLog import_log(std::string_view text, LogFormat format);
/// Picks the format from the file extension (.xes, otherwise CSV).
LogFormat format_for_path(std::string_view path) noexcept;

}  // namespace detdeploy::conformance
