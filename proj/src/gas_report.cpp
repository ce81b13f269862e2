// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/harness.hpp>

#include <algorithm>
#include <stdexcept>

namespace detdeploy::harness
{
namespace
{
const ledger::TxReceipt* nth_committed(
    const std::vector<StepReceipt>& receipts, std::string_view step, std::size_t n)
{
    for (const auto& r : receipts)
        if (r.step == step && r.receipt.committed() && n-- == 0)
            return &r.receipt;
    return nullptr;
}
}  // namespace

const GasRow* GasReport::row(std::string_view step) const noexcept
{
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.step == step; });
    return it == rows.end() ? nullptr : &*it;
}

GasReport gas_report(const ScenarioResult& result)
{
    const std::pair<std::string_view, const ledger::TxReceipt*> picks[] = {
        {"grant_role", nth_committed(result.receipts, "grant_role", 0)},
        {"propose", nth_committed(result.receipts, "propose", 0)},
        {"first_vote", nth_committed(result.receipts, "vote", 0)},
        {"subsequent_vote", nth_committed(result.receipts, "vote", 1)},
        {"queue", nth_committed(result.receipts, "queue", 0)},
        {"execute", nth_committed(result.receipts, "execute", 0)},
    };

    GasReport report;
    for (const auto& [step, receipt] : picks)
    {
        if (receipt == nullptr)
            throw std::invalid_argument(
                "gas report needs a successful upgrade run; missing " + std::string(step));
        report.rows.push_back({std::string(step), receipt->gas});
        report.total += receipt->gas.gas_used;
    }

    const ledger::GasSchedule schedule;
    const auto& first = report.row("first_vote")->gas;
    const auto& later = report.row("subsequent_vote")->gas;
    report.first_vote_exceeds_subsequent = first.gas_used > later.gas_used;
    report.vote_difference = report.first_vote_exceeds_subsequent ? first.gas_used - later.gas_used : 0;
    if (first.cold_slot_touches > later.cold_slot_touches)
        report.expected_surcharge = (first.cold_slot_touches - later.cold_slot_touches) *
                                    (schedule.cold_write_cost - schedule.warm_write_cost);

    const auto queue_gas = report.row("queue")->gas.gas_used;
    report.queue_is_max = std::all_of(report.rows.begin(), report.rows.end(),
        [&](const GasRow& r) { return r.step == "queue" || r.gas.gas_used < queue_gas; });
    return report;
}

void to_json(nlohmann::json& j, const GasReport& r)
{
    auto rows = nlohmann::json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"step", row.step}, {"gas_used", row.gas.gas_used},
            {"cold_slot_touches", row.gas.cold_slot_touches},
            {"warm_slot_touches", row.gas.warm_slot_touches}, {"event_gas", row.gas.event_gas}});
    j = {{"rows", std::move(rows)}, {"total", r.total},
        {"first_vote_exceeds_subsequent", r.first_vote_exceeds_subsequent},
        {"vote_difference", r.vote_difference}, {"expected_surcharge", r.expected_surcharge},
        {"queue_is_max", r.queue_is_max}};
}

}  // namespace detdeploy::harness
