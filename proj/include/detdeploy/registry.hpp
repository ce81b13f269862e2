// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic registry: CREATE2-style address derivation, version
// manifests whose controller address commits to every contract of the
// version, and authenticity-checked deployment with beacon pointers.

#include <detdeploy/bytes.hpp>
#include <detdeploy/ledger.hpp>

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace detdeploy::registry
{
/// Reference to the derived address of an earlier contract in a manifest.
struct ContractRef
{
    std::string name;
    bool operator==(const ContractRef&) const = default;
};

/// Literal constructor argument as it appears in an init code.
using InitArg = std::variant<Bytes, std::uint64_t, Address>;

/// Constructor argument in a manifest: a literal or a reference.
using ManifestArg = std::variant<Bytes, std::uint64_t, Address, ContractRef>;

/// Canonical init code of one contract.
///
/// Wire format (all integers big-endian):
///   u32 len(name) | name (UTF-8)
///   u32 32        | source_hash
///   u32 count(args)
///   per arg: u8 tag | u32 len | payload
///     tag 0x01 bytes   -> raw bytes
///     tag 0x02 uint    -> 32-byte big-endian integer
///     tag 0x03 address -> 20 raw bytes
struct InitCode
{
    std::string name;
    Hash256 source_hash;
    std::vector<InitArg> args;

    Bytes encode() const;
    /// Throws ManifestError when `raw` is not a canonical encoding.
    static InitCode decode(ByteView raw);

    bool operator==(const InitCode&) const = default;
};

struct ContractSpec
{
    std::string name;
    Hash256 source_hash;
    std::vector<ManifestArg> args;

    bool operator==(const ContractSpec&) const = default;
};

/// A multi-contract version. Contracts are dependency ordered and the
/// version controller is the last entry.
struct VersionManifest
{
    std::uint64_t version_id = 1;
    std::vector<ContractSpec> contracts;
    std::size_t controller_index = 0;

    bool operator==(const VersionManifest&) const = default;
};

/// Addresses derived for one version.
struct DerivedVersion
{
    Address controller;  ///< v_i
    std::vector<std::pair<std::string, Address>> addresses;  ///< manifest order
    std::vector<Bytes> init_codes;  ///< manifest order, references resolved

    bool operator==(const DerivedVersion&) const = default;
};

class ManifestError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class RegistryError : public std::runtime_error
{
public:
    enum class Code
    {
        NoVersionDeployed,
        UnknownName,
    };
    RegistryError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

/// keccak256(0xff ++ deployer ++ salt ++ keccak256(init_code))[12:]
Address derive_address(const Address& deployer, const Hash256& salt, ByteView init_code) noexcept;

/// The salt of version i: i as a 32-byte big-endian integer.
inline Hash256 version_salt(std::uint64_t version_id) noexcept
{
    return word_be(version_id);
}

/// Throws ManifestError on duplicate names, forward or dangling references,
/// a controller that is not last, or a controller that does not reference
/// every other contract.
void validate_manifest(const VersionManifest& manifest);

/// Folds over the manifest in dependency order, substituting each reference
/// by the previously derived address, with deployer = registry and salt =
/// version id.
DerivedVersion derive_version_address(const VersionManifest& manifest, const Address& registry);

/// Batch derivation under one deployer and salt (OpenMP).
std::vector<Address> derive_addresses(
    const Address& deployer, const Hash256& salt, std::span<const Bytes> init_codes);
/// Serial reference for derive_addresses.
std::vector<Address> derive_addresses_serial(
    const Address& deployer, const Hash256& salt, std::span<const Bytes> init_codes);

/// Batch version derivation (OpenMP); throws the first ManifestError seen.
std::vector<DerivedVersion> derive_versions(
    std::span<const VersionManifest> manifests, const Address& registry);
std::vector<DerivedVersion> derive_versions_serial(
    std::span<const VersionManifest> manifests, const Address& registry);

struct VersionRecord
{
    std::uint64_t version_id = 0;
    Address controller_address;
    std::map<std::string, Address> contract_addresses;
    std::uint64_t deployed_block = 0;
    std::vector<Bytes> init_codes;  ///< retained so authenticity is re-checkable

    bool operator==(const VersionRecord&) const = default;
};

struct RegistryState
{
    Address registry_address;
    std::map<std::uint64_t, VersionRecord> versions;
    std::optional<std::uint64_t> current;
    std::map<std::string, Address> beacons;

    std::uint64_t next_version() const noexcept { return current ? *current + 1 : 1; }
};

/// Deploys version `version_id` from raw init codes (controller last).
///
/// `approved_expected` is the v_i of a queued, timelock-elapsed Upgrade
/// proposal for this version (nullopt when governance has none). The call
/// reverts with AddressMismatch unless the controller derives to exactly that
/// address and every other init code derives to an address the controller
/// references.
const VersionRecord& deploy_version(RegistryState& state, ledger::TxContext& ctx,
    std::uint64_t version_id, std::span<const Bytes> init_codes,
    const std::optional<Address>& approved_expected);

/// Recomputes v_i from a stored record and compares it with the record.
bool verify_record(const VersionRecord& record, const Address& registry);

const VersionRecord& current_version(const RegistryState& state);
Address resolve(const RegistryState& state, const std::string& name);

void to_json(nlohmann::json& j, const VersionRecord& r);
void to_json(nlohmann::json& j, const RegistryState& s);

// Manifest JSON:
// {"version_id": 1, "controller_index": 2,
//  "contracts": [{"name": "...", "source_hash": "0x..",
//                 "args": [{"bytes": "0x.."}, {"uint": 5},
//                          {"address": "0x.."}, {"ref": "name"}]}]}
void to_json(nlohmann::json& j, const ManifestArg& arg);
void from_json(const nlohmann::json& j, ManifestArg& arg);
void to_json(nlohmann::json& j, const VersionManifest& m);
void from_json(const nlohmann::json& j, VersionManifest& m);

}  // namespace detdeploy::registry
