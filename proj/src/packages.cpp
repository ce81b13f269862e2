// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/keccak.hpp>
#include <detdeploy/packages.hpp>

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace detdeploy::packages
{
using nlohmann::json;

namespace
{
json to_json_value(const ContractDecl& c)
{
    return {{"name", c.name}, {"source", c.source}, {"args", c.args}};
}

ContractDecl decl_from_json(const json& j)
{
    ContractDecl c;
    j.at("name").get_to(c.name);
    j.at("source").get_to(c.source);
    if (j.contains("args"))
        c.args = j.at("args").get<std::vector<registry::ManifestArg>>();
    return c;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw PackageError(PackageError::Code::MissingSource, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

std::string normalize_source(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i)
    {
        if (text[i] == '\r')
        {
            out.push_back('\n');
            if (i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
        }
        else
        {
            out.push_back(text[i]);
        }
    }
    return out;
}

std::string canonical_bytes(const Package& p)
{
    auto contracts = json::array();
    for (const auto& c : p.contracts)
        contracts.push_back(to_json_value(c));
    const json doc = {{"version_id", p.version_id}, {"commit_ref", p.commit_ref},
        {"sources", p.sources}, {"contracts", std::move(contracts)}, {"controller", p.controller},
        {"test_suite", p.test_suite}};
    try
    {
        return doc.dump(-1, ' ', false, json::error_handler_t::strict);
    }
    catch (const json::exception& e)
    {
        throw PackageError(PackageError::Code::MalformedPackage, e.what());
    }
}

Package parse_package(std::string_view bytes)
{
    try
    {
        const auto doc = json::parse(bytes);
        Package p;
        doc.at("version_id").get_to(p.version_id);
        doc.at("commit_ref").get_to(p.commit_ref);
        doc.at("sources").get_to(p.sources);
        for (const auto& c : doc.at("contracts"))
            p.contracts.push_back(decl_from_json(c));
        doc.at("controller").get_to(p.controller);
        doc.at("test_suite").get_to(p.test_suite);
        return p;
    }
    catch (const json::exception& e)
    {
        throw PackageError(PackageError::Code::MalformedPackage, e.what());
    }
    catch (const registry::ManifestError& e)
    {
        throw PackageError(PackageError::Code::MalformedPackage, e.what());
    }
}

Hash256 content_id(const Package& package)
{
    return keccak256(canonical_bytes(package));
}

std::vector<ContractDecl> dependency_order(std::vector<ContractDecl> contracts,
    const std::string& controller)
{
    std::map<std::string, ContractDecl> pending;
    for (auto& c : contracts)
        if (!pending.emplace(c.name, std::move(c)).second)
            throw PackageError(PackageError::Code::MalformedPackage, "duplicate contract name");
    if (controller.empty() || !pending.contains(controller))
        throw PackageError(PackageError::Code::MissingController, "no version controller designated");

    const auto deps_of = [](const ContractDecl& c) {
        std::set<std::string> deps;
        for (const auto& a : c.args)
            if (const auto* ref = std::get_if<registry::ContractRef>(&a))
                deps.insert(ref->name);
        return deps;
    };

    std::vector<ContractDecl> ordered;
    std::set<std::string> placed;
    auto root = std::move(pending.at(controller));
    pending.erase(controller);

    // Repeatedly place the lexicographically smallest contract whose
    // dependencies are all placed.
    while (!pending.empty())
    {
        auto it = std::find_if(pending.begin(), pending.end(), [&](const auto& kv) {
            const auto deps = deps_of(kv.second);
            return std::all_of(deps.begin(), deps.end(), [&](const auto& d) { return placed.contains(d); });
        });
        if (it == pending.end())
            throw PackageError(PackageError::Code::MalformedPackage,
                "dependency cycle or reference to an unknown contract");
        placed.insert(it->first);
        ordered.push_back(std::move(it->second));
        pending.erase(it);
    }
    for (const auto& d : deps_of(root))
        if (!placed.contains(d))
            throw PackageError(PackageError::Code::MalformedPackage,
                "controller references unknown contract '" + d + "'");
    ordered.push_back(std::move(root));
    return ordered;
}

PackageManifest manifest_of(const Package& p)
{
    PackageManifest out;
    out.version_id = p.version_id;
    out.test_suite = p.test_suite;
    out.commit_ref = p.commit_ref;
    out.manifest.version_id = p.version_id;
    for (const auto& c : p.contracts)
    {
        const auto src = p.sources.find(c.source);
        if (src == p.sources.end())
            throw PackageError(PackageError::Code::MissingSource,
                "contract '" + c.name + "' names missing source '" + c.source + "'");
        out.manifest.contracts.push_back({c.name, keccak256(src->second), c.args});
    }
    out.manifest.controller_index = out.manifest.contracts.empty() ? 0 : out.manifest.contracts.size() - 1;
    return out;
}

BuildResult rebuild(const Package& package, const Address& registry)
{
    BuildResult out;
    out.package = package;
    out.manifest = manifest_of(package);
    try
    {
        out.derived = registry::derive_version_address(out.manifest.manifest, registry);
    }
    catch (const registry::ManifestError& e)
    {
        throw PackageError(PackageError::Code::MalformedPackage, e.what());
    }
    out.cid = content_id(package);
    return out;
}

BuildResult build_package(const SourceTree& sources, std::uint64_t version_id,
    const BuildConfig& config, const Address& registry)
{
    if (sources.empty())
        throw PackageError(PackageError::Code::EmptySource, "source tree is empty");

    Package p;
    p.version_id = version_id;
    p.commit_ref = config.commit_ref;
    for (const auto& [name, text] : sources)
        if (!p.sources.emplace(name, normalize_source(text)).second)
            throw PackageError(PackageError::Code::MalformedPackage, "duplicate source '" + name + "'");
    p.contracts = dependency_order(config.contracts, config.controller);
    p.controller = config.controller;
    p.test_suite = config.test_suite;
    return rebuild(p, registry);
}

std::pair<SourceTree, BuildConfig> load_package_dir(const std::filesystem::path& dir)
{
    const auto manifest_path = dir / "package.json";
    BuildConfig config;
    try
    {
        const auto doc = json::parse(read_file(manifest_path));
        for (const auto& c : doc.at("contracts"))
            config.contracts.push_back(decl_from_json(c));
        doc.at("controller").get_to(config.controller);
        if (doc.contains("test_suite"))
            doc.at("test_suite").get_to(config.test_suite);
        if (doc.contains("commit_ref"))
            doc.at("commit_ref").get_to(config.commit_ref);
    }
    catch (const json::exception& e)
    {
        throw PackageError(PackageError::Code::MalformedPackage,
            manifest_path.string() + ": " + e.what());
    }

    SourceTree sources;
    const auto src_root = dir / "sources";
    if (std::filesystem::is_directory(src_root))
    {
        for (const auto& entry : std::filesystem::recursive_directory_iterator(src_root))
            if (entry.is_regular_file())
                sources.emplace_back(
                    std::filesystem::relative(entry.path(), src_root).generic_string(),
                    read_file(entry.path()));
    }
    return {std::move(sources), std::move(config)};
}

}  // namespace detdeploy::packages
