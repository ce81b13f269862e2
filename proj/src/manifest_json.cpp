// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/registry.hpp>

namespace detdeploy::registry
{
void to_json(nlohmann::json& j, const ManifestArg& arg)
{
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Bytes>)
                j = {{"bytes", "0x" + to_hex(v)}};
            else if constexpr (std::is_same_v<T, std::uint64_t>)
                j = {{"uint", v}};
            else if constexpr (std::is_same_v<T, Address>)
                j = {{"address", v.hex()}};
            else
                j = {{"ref", v.name}};
        },
        arg);
}

void from_json(const nlohmann::json& j, ManifestArg& arg)
{
    if (!j.is_object() || j.size() != 1)
        throw ManifestError("constructor argument must be a single-key object");
    const auto it = j.begin();
    const auto& key = it.key();
    const auto& value = it.value();
    if (key == "bytes")
        arg = from_hex(value.get<std::string>());
    else if (key == "uint")
        arg = value.get<std::uint64_t>();
    else if (key == "address")
        arg = Address::from_hex(value.get<std::string>());
    else if (key == "ref")
        arg = ContractRef{value.get<std::string>()};
    else
        throw ManifestError("unknown constructor argument kind '" + key + "'");
}

void to_json(nlohmann::json& j, const VersionManifest& m)
{
    auto contracts = nlohmann::json::array();
    for (const auto& c : m.contracts)
        contracts.push_back(
            {{"name", c.name}, {"source_hash", c.source_hash.hex()}, {"args", c.args}});
    j = {{"version_id", m.version_id}, {"controller_index", m.controller_index},
        {"contracts", std::move(contracts)}};
}

void from_json(const nlohmann::json& j, VersionManifest& m)
{
    try
    {
        j.at("version_id").get_to(m.version_id);
        m.contracts.clear();
        for (const auto& c : j.at("contracts"))
        {
            ContractSpec spec;
            c.at("name").get_to(spec.name);
            spec.source_hash = Hash256::from_hex(c.at("source_hash").get<std::string>());
            if (c.contains("args"))
                spec.args = c.at("args").get<std::vector<ManifestArg>>();
            m.contracts.push_back(std::move(spec));
        }
        m.controller_index = j.contains("controller_index")
                                 ? j.at("controller_index").get<std::size_t>()
                                 : (m.contracts.empty() ? 0 : m.contracts.size() - 1);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ManifestError(std::string("malformed manifest JSON: ") + e.what());
    }
    catch (const std::invalid_argument& e)
    {
        throw ManifestError(std::string("malformed manifest JSON: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const VersionRecord& r)
{
    auto contracts = nlohmann::json::object();
    for (const auto& [name, address] : r.contract_addresses)
        contracts[name] = address.hex();
    auto codes = nlohmann::json::array();
    for (const auto& code : r.init_codes)
        codes.push_back("0x" + to_hex(code));
    j = {{"version_id", r.version_id}, {"controller_address", r.controller_address.hex()},
        {"contract_addresses", std::move(contracts)}, {"deployed_block", r.deployed_block},
        {"init_codes", std::move(codes)}};
}

void to_json(nlohmann::json& j, const RegistryState& s)
{
    auto versions = nlohmann::json::array();
    for (const auto& [id, record] : s.versions)
        versions.push_back(record);
    auto beacons = nlohmann::json::object();
    for (const auto& [name, address] : s.beacons)
        beacons[name] = address.hex();
    j = {{"registry_address", s.registry_address.hex()}, {"versions", std::move(versions)},
        {"beacons", std::move(beacons)}};
    j["current"] = s.current ? nlohmann::json(*s.current) : nlohmann::json(nullptr);
}

}  // namespace detdeploy::registry
