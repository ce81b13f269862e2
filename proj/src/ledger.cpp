// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/ledger.hpp>

#include <array>
#include <chrono>
#include <cstdio>

namespace detdeploy::ledger
{
namespace
{
constexpr std::array error_names = {
    std::pair{ErrorCode::UnknownAccount, std::string_view{"UnknownAccount"}},
    std::pair{ErrorCode::Unauthorized, std::string_view{"Unauthorized"}},
    std::pair{ErrorCode::DuplicateProposal, std::string_view{"DuplicateProposal"}},
    std::pair{ErrorCode::BadVersion, std::string_view{"BadVersion"}},
    std::pair{ErrorCode::UnknownProposal, std::string_view{"UnknownProposal"}},
    std::pair{ErrorCode::VotingNotStarted, std::string_view{"VotingNotStarted"}},
    std::pair{ErrorCode::VotingClosed, std::string_view{"VotingClosed"}},
    std::pair{ErrorCode::AlreadyVoted, std::string_view{"AlreadyVoted"}},
    std::pair{ErrorCode::QuorumNotReached, std::string_view{"QuorumNotReached"}},
    std::pair{ErrorCode::NotQueued, std::string_view{"NotQueued"}},
    std::pair{ErrorCode::TimelockNotElapsed, std::string_view{"TimelockNotElapsed"}},
    std::pair{ErrorCode::LastStakeholder, std::string_view{"LastStakeholder"}},
    std::pair{ErrorCode::InvalidParams, std::string_view{"InvalidParams"}},
    std::pair{ErrorCode::AddressMismatch, std::string_view{"AddressMismatch"}},
    std::pair{ErrorCode::NoApprovedProposal, std::string_view{"NoApprovedProposal"}},
    std::pair{ErrorCode::VersionExists, std::string_view{"VersionExists"}},
    std::pair{ErrorCode::MalformedManifest, std::string_view{"MalformedManifest"}},
    std::pair{ErrorCode::InvalidCall, std::string_view{"InvalidCall"}},
};
}  // namespace

std::string_view to_string(ErrorCode code) noexcept
{
    for (const auto& [c, name] : error_names)
        if (c == code)
            return name;
    return "Unknown";
}

std::optional<ErrorCode> parse_error_code(std::string_view name) noexcept
{
    for (const auto& [c, n] : error_names)
        if (n == name)
            return c;
    return std::nullopt;
}

std::uint64_t payload_size(const Payload& payload) noexcept
{
    std::uint64_t n = 0;
    for (const auto& [k, v] : payload)
        n += k.size() + v.size();
    return n;
}

void to_json(nlohmann::json& j, const LedgerEvent& e)
{
    j = {{"name", e.name}, {"tx_id", e.tx_id}, {"index", e.index}, {"block", e.block},
        {"timestamp", e.timestamp}, {"payload", e.payload}};
}

void from_json(const nlohmann::json& j, LedgerEvent& e)
{
    j.at("name").get_to(e.name);
    j.at("tx_id").get_to(e.tx_id);
    j.at("index").get_to(e.index);
    j.at("block").get_to(e.block);
    j.at("timestamp").get_to(e.timestamp);
    j.at("payload").get_to(e.payload);
}

void to_json(nlohmann::json& j, const TxReceipt& r)
{
    j = {{"tx_id", r.tx_id}, {"sender", r.sender.hex()}, {"block", r.block},
        {"status", r.committed() ? "Committed" : "Reverted"},
        {"gas",
            {{"gas_used", r.gas.gas_used}, {"cold_slot_touches", r.gas.cold_slot_touches},
                {"warm_slot_touches", r.gas.warm_slot_touches}, {"event_gas", r.gas.event_gas}}},
        {"events", r.events}};
    if (r.error)
        j["error"] = std::string(to_string(*r.error));
}

BlockClock::BlockClock(std::int64_t seconds_per_block) : seconds_per_block_(seconds_per_block)
{
    if (seconds_per_block <= 0)
        throw std::invalid_argument("seconds_per_block must be positive");
}

std::string format_iso8601(std::int64_t epoch_seconds)
{
    using namespace std::chrono;
    const sys_seconds tp{seconds{epoch_seconds}};
    const auto day = floor<days>(tp);
    const year_month_day ymd{day};
    const hh_mm_ss hms{tp - day};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", int(ymd.year()),
        unsigned(ymd.month()), unsigned(ymd.day()), long(hms.hours().count()),
        long(hms.minutes().count()), long(hms.seconds().count()));
    return buf;
}

std::int64_t parse_iso8601(std::string_view text)
{
    using namespace std::chrono;
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char z = 0;
    const std::string copy(text);
    if (std::sscanf(copy.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 ||
        z != 'Z' || copy.size() != 20)
        throw std::invalid_argument("malformed ISO-8601 timestamp: " + copy);
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59)
        throw std::invalid_argument("out-of-range ISO-8601 timestamp: " + copy);
    const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
    return tp.time_since_epoch().count();
}

TxContext::TxContext(const GasSchedule& gas, const std::set<std::string>& touched, Address sender,
    std::uint64_t tx_id, std::uint64_t block, std::int64_t timestamp)
  : schedule_(gas),
    touched_(touched),
    sender_(sender),
    tx_id_(tx_id),
    block_(block),
    timestamp_(timestamp)
{
    gas_.gas_used = schedule_.base_tx_cost;
}

std::uint64_t TxContext::write_slot(const std::string& slot)
{
    const bool cold = !touched_.contains(slot) && !new_slots_.contains(slot);
    std::uint64_t charge = 0;
    if (cold)
    {
        new_slots_.insert(slot);
        charge = schedule_.cold_write_cost;
        ++gas_.cold_slot_touches;
    }
    else
    {
        charge = schedule_.warm_write_cost;
        ++gas_.warm_slot_touches;
    }
    gas_.gas_used += charge;
    return charge;
}

void TxContext::emit(std::string name, Payload payload)
{
    const auto cost = schedule_.event_base_cost + schedule_.event_byte_cost * payload_size(payload);
    gas_.gas_used += cost;
    gas_.event_gas += cost;
    LedgerEvent e;
    e.name = std::move(name);
    e.tx_id = tx_id_;
    e.index = static_cast<std::uint32_t>(events_.size());
    e.block = block_;
    e.timestamp = timestamp_;
    e.payload = std::move(payload);
    events_.push_back(std::move(e));
}

}  // namespace detdeploy::ledger
