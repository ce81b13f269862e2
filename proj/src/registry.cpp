// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/keccak.hpp>
#include <detdeploy/registry.hpp>

#include <algorithm>
#include <set>

namespace detdeploy::registry
{
namespace
{
constexpr std::uint8_t tag_bytes = 0x01;
constexpr std::uint8_t tag_uint = 0x02;
constexpr std::uint8_t tag_address = 0x03;

void append_field(Bytes& out, ByteView field)
{
    append_be(out, field.size(), 4);
    out.insert(out.end(), field.begin(), field.end());
}

class Reader
{
public:
    explicit Reader(ByteView raw) : raw_(raw) {}

    std::uint64_t be(std::size_t width)
    {
        need(width);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < width; ++i)
            v = (v << 8) | raw_[pos_++];
        return v;
    }

    ByteView field()
    {
        const auto len = be(4);
        need(len);
        const auto out = raw_.subspan(pos_, len);
        pos_ += len;
        return out;
    }

    bool done() const noexcept { return pos_ == raw_.size(); }

private:
    void need(std::uint64_t n) const
    {
        if (raw_.size() - pos_ < n)
            throw ManifestError("init code truncated");
    }

    ByteView raw_;
    std::size_t pos_ = 0;
};

std::set<Address> referenced_addresses(const InitCode& code)
{
    std::set<Address> out;
    for (const auto& arg : code.args)
        if (const auto* a = std::get_if<Address>(&arg))
            out.insert(*a);
    return out;
}
}  // namespace

Bytes InitCode::encode() const
{
    Bytes out;
    append_field(out, as_bytes(name));
    append_field(out, source_hash.view());
    append_be(out, args.size(), 4);
    for (const auto& arg : args)
    {
        if (const auto* b = std::get_if<Bytes>(&arg))
        {
            out.push_back(tag_bytes);
            append_field(out, *b);
        }
        else if (const auto* u = std::get_if<std::uint64_t>(&arg))
        {
            out.push_back(tag_uint);
            append_field(out, word_be(*u).view());
        }
        else
        {
            out.push_back(tag_address);
            append_field(out, std::get<Address>(arg).view());
        }
    }
    return out;
}

InitCode InitCode::decode(ByteView raw)
{
    Reader r(raw);
    InitCode code;
    const auto name = r.field();
    code.name.assign(name.begin(), name.end());
    const auto hash = r.field();
    if (hash.size() != 32)
        throw ManifestError("source hash must be 32 bytes");
    code.source_hash = Hash256::from_view(hash);

    const auto count = r.be(4);
    for (std::uint64_t i = 0; i < count; ++i)
    {
        const auto tag = r.be(1);
        const auto payload = r.field();
        switch (tag)
        {
        case tag_bytes:
            code.args.emplace_back(Bytes(payload.begin(), payload.end()));
            break;
        case tag_uint:
        {
            if (payload.size() != 32 || !std::all_of(payload.begin(), payload.begin() + 24,
                                            [](auto b) { return b == 0; }))
                throw ManifestError("uint argument out of range");
            std::uint64_t v = 0;
            for (std::size_t k = 24; k < 32; ++k)
                v = (v << 8) | payload[k];
            code.args.emplace_back(v);
            break;
        }
        case tag_address:
            if (payload.size() != 20)
                throw ManifestError("address argument must be 20 bytes");
            code.args.emplace_back(Address::from_view(payload));
            break;
        default:
            throw ManifestError("unknown argument tag");
        }
    }
    if (!r.done())
        throw ManifestError("trailing bytes after init code");
    return code;
}

Address derive_address(const Address& deployer, const Hash256& salt, ByteView init_code) noexcept
{
    const auto code_hash = keccak256(init_code);
    Keccak256 h;
    const std::uint8_t prefix = 0xff;
    h.update(ByteView{&prefix, 1});
    h.update(deployer.view());
    h.update(salt.view());
    h.update(code_hash.view());
    const auto digest = h.finalize();

    Address out;
    std::copy(digest.bytes.begin() + 12, digest.bytes.end(), out.bytes.begin());
    return out;
}

void validate_manifest(const VersionManifest& m)
{
    if (m.contracts.empty())
        throw ManifestError("manifest has no contracts");
    if (m.version_id == 0)
        throw ManifestError("version id must be >= 1");
    if (m.controller_index != m.contracts.size() - 1)
        throw ManifestError("version controller must be the last contract");

    std::set<std::string> seen;
    for (const auto& c : m.contracts)
    {
        if (c.name.empty())
            throw ManifestError("contract name must not be empty");
        for (const auto& arg : c.args)
        {
            if (const auto* ref = std::get_if<ContractRef>(&arg); ref && !seen.contains(ref->name))
                throw ManifestError("contract '" + c.name + "' references '" + ref->name +
                                    "' which is not an earlier contract");
        }
        if (!seen.insert(c.name).second)
            throw ManifestError("duplicate contract name '" + c.name + "'");
    }

    std::set<std::string> controller_refs;
    for (const auto& arg : m.contracts.back().args)
        if (const auto* ref = std::get_if<ContractRef>(&arg))
            controller_refs.insert(ref->name);
    for (std::size_t i = 0; i + 1 < m.contracts.size(); ++i)
        if (!controller_refs.contains(m.contracts[i].name))
            throw ManifestError("version controller does not reference '" + m.contracts[i].name + "'");
}

DerivedVersion derive_version_address(const VersionManifest& m, const Address& registry)
{
    validate_manifest(m);
    const auto salt = version_salt(m.version_id);

    DerivedVersion out;
    std::map<std::string, Address> by_name;
    for (const auto& c : m.contracts)
    {
        InitCode code{c.name, c.source_hash, {}};
        for (const auto& arg : c.args)
        {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, ContractRef>)
                        code.args.emplace_back(by_name.at(v.name));
                    else
                        code.args.emplace_back(v);
                },
                arg);
        }
        auto encoded = code.encode();
        const auto address = derive_address(registry, salt, encoded);
        by_name.emplace(c.name, address);
        out.addresses.emplace_back(c.name, address);
        out.init_codes.push_back(std::move(encoded));
    }
    out.controller = out.addresses.back().second;
    return out;
}

std::vector<Address> derive_addresses_serial(
    const Address& deployer, const Hash256& salt, std::span<const Bytes> init_codes)
{
    std::vector<Address> out;
    out.reserve(init_codes.size());
    for (const auto& code : init_codes)
        out.push_back(derive_address(deployer, salt, code));
    return out;
}

std::vector<Address> derive_addresses(
    const Address& deployer, const Hash256& salt, std::span<const Bytes> init_codes)
{
    std::vector<Address> out(init_codes.size());
    const auto n = static_cast<std::ptrdiff_t>(init_codes.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[i] = derive_address(deployer, salt, init_codes[i]);
    return out;
}

std::vector<DerivedVersion> derive_versions_serial(
    std::span<const VersionManifest> manifests, const Address& registry)
{
    std::vector<DerivedVersion> out;
    out.reserve(manifests.size());
    for (const auto& m : manifests)
        out.push_back(derive_version_address(m, registry));
    return out;
}

std::vector<DerivedVersion> derive_versions(
    std::span<const VersionManifest> manifests, const Address& registry)
{
    std::vector<DerivedVersion> out(manifests.size());
    std::vector<std::optional<std::string>> errors(manifests.size());
    const auto n = static_cast<std::ptrdiff_t>(manifests.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i)
    {
        try
        {
            out[i] = derive_version_address(manifests[i], registry);
        }
        catch (const ManifestError& e)
        {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors)
        if (e)
            throw ManifestError(*e);
    return out;
}

const VersionRecord& deploy_version(RegistryState& state, ledger::TxContext& ctx,
    std::uint64_t version_id, std::span<const Bytes> init_codes,
    const std::optional<Address>& approved_expected)
{
    using ledger::ErrorCode;
    ctx.require(approved_expected.has_value(), ErrorCode::NoApprovedProposal);
    ctx.require(!state.versions.contains(version_id), ErrorCode::VersionExists);
    ctx.require(!init_codes.empty(), ErrorCode::MalformedManifest);

    const auto addresses =
        derive_addresses_serial(state.registry_address, version_salt(version_id), init_codes);
    ctx.require(addresses.back() == *approved_expected, ErrorCode::AddressMismatch);

    // Every leaf must derive to an address the (authentic) controller binds.
    std::vector<InitCode> decoded(init_codes.size());
    try
    {
        decoded.back() = InitCode::decode(init_codes.back());
    }
    catch (const ManifestError&)
    {
        ctx.revert(ErrorCode::MalformedManifest);
    }
    const auto refs = referenced_addresses(decoded.back());
    for (std::size_t i = 0; i + 1 < addresses.size(); ++i)
        ctx.require(refs.contains(addresses[i]), ErrorCode::AddressMismatch);
    try
    {
        for (std::size_t i = 0; i + 1 < init_codes.size(); ++i)
            decoded[i] = InitCode::decode(init_codes[i]);
    }
    catch (const ManifestError&)
    {
        ctx.revert(ErrorCode::MalformedManifest);
    }

    VersionRecord record;
    record.version_id = version_id;
    record.controller_address = addresses.back();
    record.deployed_block = ctx.block();
    record.init_codes.assign(init_codes.begin(), init_codes.end());
    for (std::size_t i = 0; i < decoded.size(); ++i)
    {
        const bool fresh = record.contract_addresses.emplace(decoded[i].name, addresses[i]).second;
        ctx.require(fresh, ErrorCode::MalformedManifest);
    }

    ctx.write_slot("registry/version/" + std::to_string(version_id));
    ctx.write_slot("registry/current");
    for (const auto& [name, address] : record.contract_addresses)
    {
        ctx.write_slot("registry/beacon/" + name);
        state.beacons[name] = address;
    }
    state.current = version_id;
    auto& stored = state.versions[version_id] = std::move(record);

    ctx.emit("DeterministicUpgradeExecuted", {{"version_id", std::to_string(version_id)},
                                                 {"controller_address", stored.controller_address.hex()}});
    return stored;
}

bool verify_record(const VersionRecord& record, const Address& registry)
{
    if (record.init_codes.empty())
        return false;
    const auto addresses =
        derive_addresses_serial(registry, version_salt(record.version_id), record.init_codes);
    return addresses.back() == record.controller_address;
}

const VersionRecord& current_version(const RegistryState& state)
{
    if (!state.current)
        throw RegistryError(RegistryError::Code::NoVersionDeployed, "no version deployed");
    return state.versions.at(*state.current);
}

Address resolve(const RegistryState& state, const std::string& name)
{
    const auto it = state.beacons.find(name);
    if (it == state.beacons.end())
        throw RegistryError(RegistryError::Code::UnknownName, "unknown contract name '" + name + "'");
    return it->second;
}

}  // namespace detdeploy::registry
