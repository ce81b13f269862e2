// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Single-node simulated ledger: accounts, atomic transactions with revert
// semantics, a block clock, event emission and cold/warm gas metering.

#include <detdeploy/bytes.hpp>
#include <detdeploy/keccak.hpp>

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace detdeploy::ledger
{
/// Closed set of revert reasons. Names are part of the external contract.
enum class ErrorCode : std::uint8_t
{
    UnknownAccount,
    Unauthorized,
    DuplicateProposal,
    BadVersion,
    UnknownProposal,
    VotingNotStarted,
    VotingClosed,
    AlreadyVoted,
    QuorumNotReached,
    NotQueued,
    TimelockNotElapsed,
    LastStakeholder,
    InvalidParams,
    AddressMismatch,
    NoApprovedProposal,
    VersionExists,
    MalformedManifest,
    InvalidCall,
};

std::string_view to_string(ErrorCode code) noexcept;
std::optional<ErrorCode> parse_error_code(std::string_view name) noexcept;

/// Gas constants. EVM-inspired round numbers; only their ordering matters.
struct GasSchedule
{
    std::uint64_t base_tx_cost = 21'000;
    std::uint64_t cold_write_cost = 22'100;
    std::uint64_t warm_write_cost = 5'000;
    std::uint64_t event_base_cost = 375;
    std::uint64_t event_byte_cost = 8;
};

struct GasReceipt
{
    std::uint64_t gas_used = 0;
    std::uint32_t cold_slot_touches = 0;
    std::uint32_t warm_slot_touches = 0;
    std::uint64_t event_gas = 0;

    bool operator==(const GasReceipt&) const = default;
};

using Payload = std::map<std::string, std::string>;

struct LedgerEvent
{
    std::string name;
    std::uint64_t tx_id = 0;
    std::uint32_t index = 0;  ///< position within the emitting transaction
    std::uint64_t block = 0;
    std::int64_t timestamp = 0;
    Payload payload;

    bool operator==(const LedgerEvent&) const = default;
};

/// Bytes of an event payload for gas purposes: sum of key and value lengths.
std::uint64_t payload_size(const Payload& payload) noexcept;

struct TxReceipt
{
    std::uint64_t tx_id = 0;
    Address sender;
    std::uint64_t block = 0;
    std::optional<ErrorCode> error;  ///< set iff the transaction reverted
    GasReceipt gas;
    std::vector<LedgerEvent> events;

    bool committed() const noexcept { return !error.has_value(); }
    bool operator==(const TxReceipt&) const = default;
};

void to_json(nlohmann::json& j, const LedgerEvent& e);
void from_json(const nlohmann::json& j, LedgerEvent& e);
void to_json(nlohmann::json& j, const TxReceipt& r);

class BlockClock
{
public:
    explicit BlockClock(std::int64_t seconds_per_block = 10);

    std::uint64_t height() const noexcept { return height_; }
    std::int64_t seconds_per_block() const noexcept { return seconds_per_block_; }
    std::int64_t timestamp() const noexcept { return timestamp_at(height_); }
    std::int64_t timestamp_at(std::uint64_t height) const noexcept
    {
        return static_cast<std::int64_t>(height) * seconds_per_block_;
    }
    std::uint64_t advance(std::uint64_t blocks) noexcept { return height_ += blocks; }

private:
    std::uint64_t height_ = 0;
    std::int64_t seconds_per_block_;
};

/// ISO-8601 UTC rendering of seconds since 1970-01-01T00:00:00Z.
std::string format_iso8601(std::int64_t seconds);
/// Inverse of format_iso8601; throws std::invalid_argument on malformed input.
std::int64_t parse_iso8601(std::string_view text);

/// Thrown inside a transaction body to abort it.
class Revert : public std::runtime_error
{
public:
    explicit Revert(ErrorCode code)
      : std::runtime_error(std::string(to_string(code))), code_(code)
    {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Execution context of one transaction: gas meter, pending events and the
/// storage slots first touched by this transaction.
class TxContext
{
public:
    TxContext(const GasSchedule& gas, const std::set<std::string>& touched, Address sender,
        std::uint64_t tx_id, std::uint64_t block, std::int64_t timestamp);

    const Address& sender() const noexcept { return sender_; }
    std::uint64_t tx_id() const noexcept { return tx_id_; }
    std::uint64_t block() const noexcept { return block_; }
    std::int64_t timestamp() const noexcept { return timestamp_; }
    const GasSchedule& schedule() const noexcept { return schedule_; }

    /// Charges a storage write: cold on the first touch of `slot` in the
    /// ledger's lifetime, warm afterwards. Returns the charge.
    std::uint64_t write_slot(const std::string& slot);

    void emit(std::string name, Payload payload);

    [[noreturn]] void revert(ErrorCode code) const { throw Revert(code); }
    void require(bool condition, ErrorCode code) const
    {
        if (!condition)
            revert(code);
    }

    const GasReceipt& gas() const noexcept { return gas_; }
    const std::vector<LedgerEvent>& events() const noexcept { return events_; }
    const std::set<std::string>& new_slots() const noexcept { return new_slots_; }

private:
    const GasSchedule& schedule_;
    const std::set<std::string>& touched_;
    std::set<std::string> new_slots_;
    Address sender_;
    std::uint64_t tx_id_;
    std::uint64_t block_;
    std::int64_t timestamp_;
    GasReceipt gas_;
    std::vector<LedgerEvent> events_;
};

struct LedgerConfig
{
    std::int64_t seconds_per_block = 10;
    GasSchedule gas;
};

/// Immutable view of the ledger at one point in time.
template <class State>
struct Snapshot
{
    std::shared_ptr<const State> state;
    std::uint64_t height = 0;
    std::int64_t timestamp = 0;
};

/// Single-writer ledger over an application state value. Transactions run
/// on a copy of the state and are published only on success; readers work
/// on immutable snapshots and never wait for a running transaction.
///
/// State must be copyable and provide an nlohmann `to_json` overload (used
/// for the state root).
template <class State>
class Ledger
{
public:
    explicit Ledger(State genesis, LedgerConfig config = {})
      : config_(config),
        clock_(config.seconds_per_block),
        state_(std::make_shared<const State>(std::move(genesis))),
        touched_(std::make_shared<const std::set<std::string>>())
    {}

    Ledger(const Ledger&) = delete;
    Ledger& operator=(const Ledger&) = delete;

    void register_account(const Address& account)
    {
        std::scoped_lock write(write_mutex_);
        std::scoped_lock read(read_mutex_);
        accounts_.insert(account);
    }

    bool is_registered(const Address& account) const
    {
        std::scoped_lock read(read_mutex_);
        return accounts_.contains(account);
    }

    /// Applies `body(State&, TxContext&)` atomically. A Revert thrown by the
    /// body discards every state change and event; gas is metered either way.
    template <class Body>
    TxReceipt submit_tx(const Address& sender, Body&& body)
    {
        std::scoped_lock write(write_mutex_);

        const auto tx_id = next_tx_id_++;
        TxReceipt receipt;
        receipt.tx_id = tx_id;
        receipt.sender = sender;
        receipt.block = clock_.height();

        TxContext ctx(config_.gas, *touched_, sender, tx_id, clock_.height(), clock_.timestamp());
        std::shared_ptr<State> next;
        if (!accounts_.contains(sender))
        {
            receipt.error = ErrorCode::UnknownAccount;
        }
        else
        {
            try
            {
                next = std::make_shared<State>(*state_);
                body(*next, ctx);
            }
            catch (const Revert& r)
            {
                receipt.error = r.code();
            }
        }
        receipt.gas = ctx.gas();

        if (receipt.committed())
        {
            receipt.events = ctx.events();
            auto touched = std::make_shared<std::set<std::string>>(*touched_);
            touched->insert(ctx.new_slots().begin(), ctx.new_slots().end());

            std::scoped_lock read(read_mutex_);
            state_ = std::move(next);
            touched_ = std::move(touched);
            events_.insert(events_.end(), receipt.events.begin(), receipt.events.end());
            receipts_.push_back(receipt);
        }
        else
        {
            std::scoped_lock read(read_mutex_);
            receipts_.push_back(receipt);
        }
        return receipt;
    }

    std::uint64_t advance_blocks(std::uint64_t blocks)
    {
        std::scoped_lock write(write_mutex_);
        std::scoped_lock read(read_mutex_);
        return clock_.advance(blocks);
    }

    Snapshot<State> snapshot() const
    {
        std::scoped_lock read(read_mutex_);
        return {state_, clock_.height(), clock_.timestamp()};
    }

    std::uint64_t height() const
    {
        std::scoped_lock read(read_mutex_);
        return clock_.height();
    }

    std::int64_t timestamp() const
    {
        std::scoped_lock read(read_mutex_);
        return clock_.timestamp();
    }

    std::int64_t timestamp_at(std::uint64_t height) const noexcept
    {
        return static_cast<std::int64_t>(height) * config_.seconds_per_block;
    }

    std::int64_t seconds_per_block() const noexcept { return config_.seconds_per_block; }
    const GasSchedule& gas_schedule() const noexcept { return config_.gas; }

    /// Committed events in (block, tx, index) order.
    std::vector<LedgerEvent> events() const
    {
        std::scoped_lock read(read_mutex_);
        return events_;
    }

    std::vector<TxReceipt> receipts() const
    {
        std::scoped_lock read(read_mutex_);
        return receipts_;
    }

    /// Keccak-256 over the canonical JSON of the world state: application
    /// state, touched storage slots and registered accounts.
    Hash256 state_root() const
    {
        std::shared_ptr<const State> state;
        std::shared_ptr<const std::set<std::string>> touched;
        std::set<Address> accounts;
        {
            std::scoped_lock read(read_mutex_);
            state = state_;
            touched = touched_;
            accounts = accounts_;
        }
        nlohmann::json doc;
        doc["state"] = *state;
        doc["touched"] = *touched;
        auto& acc = doc["accounts"] = nlohmann::json::array();
        for (const auto& a : accounts)
            acc.push_back(a.hex());
        return keccak256(doc.dump());
    }

private:
    LedgerConfig config_;
    mutable std::mutex write_mutex_;
    mutable std::mutex read_mutex_;
    BlockClock clock_;
    std::shared_ptr<const State> state_;
    std::shared_ptr<const std::set<std::string>> touched_;
    std::set<Address> accounts_;
    std::vector<LedgerEvent> events_;
    std::vector<TxReceipt> receipts_;
    std::uint64_t next_tx_id_ = 1;
};

}  // namespace detdeploy::ledger
