// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic upgrade packages and a content-addressed package store.

#include <detdeploy/bytes.hpp>
#include <detdeploy/registry.hpp>

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace detdeploy::packages
{
class PackageError : public std::runtime_error
{
public:
    enum class Code
    {
        EmptySource,
        MissingController,
        MissingSource,
        UnknownCid,
        CorruptObject,
        MalformedPackage,
    };

    PackageError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

/// Named source files. Input order is irrelevant to every derived value.
using SourceTree = std::vector<std::pair<std::string, std::string>>;

/// A contract to build: `source` names an entry of the source tree.
struct ContractDecl
{
    std::string name;
    std::string source;
    std::vector<registry::ManifestArg> args;

    bool operator==(const ContractDecl&) const = default;
};

struct BuildConfig
{
    std::vector<ContractDecl> contracts;  ///< any order; sorted by dependencies
    std::string controller;
    std::vector<std::string> test_suite;  ///< names of standard checks
    std::string commit_ref;
};

/// The stored package: everything a stakeholder needs to rebuild.
struct Package
{
    std::uint64_t version_id = 0;
    std::string commit_ref;
    std::map<std::string, std::string> sources;  ///< LF-normalised
    std::vector<ContractDecl> contracts;         ///< dependency order, controller last
    std::string controller;
    std::vector<std::string> test_suite;

    bool operator==(const Package&) const = default;
};

struct PackageManifest
{
    std::uint64_t version_id = 0;
    registry::VersionManifest manifest;
    std::vector<std::string> test_suite;
    std::string commit_ref;

    bool operator==(const PackageManifest&) const = default;
};

struct BuildResult
{
    Package package;
    PackageManifest manifest;
    registry::DerivedVersion derived;  ///< includes the init codes
    Hash256 cid;
};

/// CRLF and lone CR become LF. No other normalisation.
std::string normalize_source(std::string_view text);

/// Canonical JSON: sorted keys, UTF-8, no insignificant whitespace.
std::string canonical_bytes(const Package& package);
/// Throws PackageError(MalformedPackage).
Package parse_package(std::string_view bytes);

Hash256 content_id(const Package& package);

/// Orders contracts so every reference points backwards, with the
/// controller last; ties broken by name. Throws PackageError on a missing
/// controller or a dependency cycle.
std::vector<ContractDecl> dependency_order(std::vector<ContractDecl> contracts,
    const std::string& controller);

PackageManifest manifest_of(const Package& package);

BuildResult build_package(const SourceTree& sources, std::uint64_t version_id,
    const BuildConfig& config, const Address& registry);

/// Rebuilds a fetched package exactly as its author did.
BuildResult rebuild(const Package& package, const Address& registry);

/// Reads `<dir>/package.json` and `<dir>/sources/**`.
std::pair<SourceTree, BuildConfig> load_package_dir(const std::filesystem::path& dir);

/// Content-addressed object store keyed by keccak256 of the stored bytes.
class ContentStore
{
public:
    virtual ~ContentStore() = default;

    /// Idempotent. Returns the cid of `bytes`.
    virtual Hash256 put(const std::string& bytes) = 0;
    virtual std::optional<std::string> get(const Hash256& cid) const = 0;
    virtual std::size_t size() const = 0;

    Hash256 store(const Package& package) { return put(canonical_bytes(package)); }
    /// Throws PackageError(UnknownCid) or PackageError(CorruptObject).
    Package fetch(const Hash256& cid) const;
};

class MemoryStore final : public ContentStore
{
public:
    Hash256 put(const std::string& bytes) override;
    std::optional<std::string> get(const Hash256& cid) const override;
    std::size_t size() const override;

private:
    mutable std::mutex mutex_;
    std::map<Hash256, std::string> objects_;
};

/// One file per object, named by the hex cid.
class DirectoryStore final : public ContentStore
{
public:
    explicit DirectoryStore(std::filesystem::path root);

    Hash256 put(const std::string& bytes) override;
    std::optional<std::string> get(const Hash256& cid) const override;
    std::size_t size() const override;

    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::filesystem::path root_;
};

}  // namespace detdeploy::packages
