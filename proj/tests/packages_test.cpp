// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/keccak.hpp>
#include <detdeploy/packages.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

using namespace detdeploy;
using namespace detdeploy::packages;
using registry::ContractRef;

namespace
{
const Address reg = Address::from_hex("0x5fbdb2315678afecb367f032d93f642f64180aa3");

SourceTree sources()
{
    return {
        {"contracts/Token.sol", "contract Token {\n    uint256 supply;\n}\n"},
        {"contracts/Hub.sol", "contract Hub {\n    address token;\n}\n"},
        {"contracts/Oracle.sol", "contract Oracle {}\n"},
        {"contracts/Controller.sol", "contract Controller {}\n"},
    };
}

BuildConfig config()
{
    BuildConfig c;
    c.contracts = {
        {"controller", "contracts/Controller.sol",
            {ContractRef{"token"}, ContractRef{"hub"}, ContractRef{"oracle"}}},
        {"hub", "contracts/Hub.sol", {ContractRef{"token"}, ContractRef{"oracle"}}},
        {"oracle", "contracts/Oracle.sol", {}},
        {"token", "contracts/Token.sol", {std::uint64_t{21'000'000}}},
    };
    c.controller = "controller";
    c.test_suite = {"controller-binds-all", "unique-contract-names"};
    c.commit_ref = "abc123";
    return c;
}

std::filesystem::path temp_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("detdeploy-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}
}  // namespace

TEST(Packages, BuildIsPermutationIndependent)
{
    const auto base = build_package(sources(), 1, config(), reg);
    std::mt19937 rng(42);
    for (int i = 0; i < 10; ++i)
    {
        auto s = sources();
        auto c = config();
        std::shuffle(s.begin(), s.end(), rng);
        std::shuffle(c.contracts.begin(), c.contracts.end(), rng);
        const auto b = build_package(s, 1, c, reg);
        EXPECT_EQ(b.cid, base.cid);
        EXPECT_EQ(b.derived, base.derived);
        EXPECT_EQ(canonical_bytes(b.package), canonical_bytes(base.package));
    }
}

TEST(Packages, DependencyOrderIsTopologicalWithControllerLast)
{
    const auto ordered = dependency_order(config().contracts, "controller");
    std::vector<std::string> names;
    for (const auto& c : ordered)
        names.push_back(c.name);
    EXPECT_EQ(names, (std::vector<std::string>{"oracle", "token", "hub", "controller"}));
}

TEST(Packages, DependencyErrors)
{
    auto c = config();
    EXPECT_THROW(dependency_order(c.contracts, "missing"), PackageError);
    c.contracts[2].args = {ContractRef{"hub"}};
    try
    {
        dependency_order(c.contracts, "controller");
        FAIL() << "cycle not detected";
    }
    catch (const PackageError& e)
    {
        EXPECT_EQ(e.code(), PackageError::Code::MalformedPackage);
    }
    auto unknown = config();
    unknown.contracts[1].args.push_back(ContractRef{"ghost"});
    EXPECT_THROW(dependency_order(unknown.contracts, "controller"), PackageError);
}

TEST(Packages, SourceChangesChangeCidAndAddress)
{
    const auto base = build_package(sources(), 1, config(), reg);
    auto s = sources();
    s[0].second += " ";
    const auto changed = build_package(s, 1, config(), reg);
    EXPECT_NE(changed.cid, base.cid);
    EXPECT_NE(changed.derived.controller, base.derived.controller);

    auto c = config();
    c.commit_ref = "def456";
    const auto other_ref = build_package(sources(), 1, c, reg);
    EXPECT_NE(other_ref.cid, base.cid);
    EXPECT_EQ(other_ref.derived.controller, base.derived.controller);
}

TEST(Packages, LineEndingsAreNormalised)
{
    EXPECT_EQ(normalize_source("a\r\nb\rc\n"), "a\nb\nc\n");
    const auto base = build_package(sources(), 1, config(), reg);
    auto s = sources();
    for (auto& [name, text] : s)
    {
        std::string crlf;
        for (const char ch : text)
            crlf += ch == '\n' ? std::string("\r\n") : std::string(1, ch);
        text = crlf;
    }
    EXPECT_EQ(build_package(s, 1, config(), reg).cid, base.cid);
}

TEST(Packages, ManifestHashesNormalisedSources)
{
    const auto b = build_package(sources(), 3, config(), reg);
    EXPECT_EQ(b.manifest.version_id, 3u);
    ASSERT_EQ(b.manifest.manifest.contracts.size(), 4u);
    const auto& token = b.manifest.manifest.contracts[1];
    EXPECT_EQ(token.name, "token");
    EXPECT_EQ(token.source_hash, keccak256(std::string_view{"contract Token {\n    uint256 supply;\n}\n"}));
    EXPECT_EQ(b.derived, registry::derive_version_address(b.manifest.manifest, reg));
}

TEST(Packages, BuildErrors)
{
    try
    {
        build_package({}, 1, config(), reg);
        FAIL();
    }
    catch (const PackageError& e)
    {
        EXPECT_EQ(e.code(), PackageError::Code::EmptySource);
    }
    auto s = sources();
    s.pop_back();
    try
    {
        build_package(s, 1, config(), reg);
        FAIL();
    }
    catch (const PackageError& e)
    {
        EXPECT_EQ(e.code(), PackageError::Code::MissingSource);
    }
    auto dup = sources();
    dup.push_back(dup.front());
    EXPECT_THROW(build_package(dup, 1, config(), reg), PackageError);
}

TEST(Packages, CanonicalBytesRoundTrip)
{
    const auto b = build_package(sources(), 1, config(), reg);
    const auto bytes = canonical_bytes(b.package);
    EXPECT_EQ(parse_package(bytes), b.package);
    EXPECT_EQ(canonical_bytes(parse_package(bytes)), bytes);
    EXPECT_EQ(content_id(b.package), keccak256(bytes));
    EXPECT_EQ(bytes.find('\n'), std::string::npos);
    EXPECT_THROW(parse_package("{not json"), PackageError);
    EXPECT_THROW(parse_package("{}"), PackageError);
}

TEST(Packages, RebuildReproducesTheAuthorsBuild)
{
    const auto b = build_package(sources(), 2, config(), reg);
    const auto r = rebuild(parse_package(canonical_bytes(b.package)), reg);
    EXPECT_EQ(r.cid, b.cid);
    EXPECT_EQ(r.derived, b.derived);
    EXPECT_EQ(r.manifest, b.manifest);
}

template <class Store>
void store_contract(Store& store)
{
    const auto b = build_package(sources(), 1, config(), reg);
    const auto cid = store.store(b.package);
    EXPECT_EQ(cid, b.cid);
    EXPECT_EQ(store.store(b.package), cid);
    EXPECT_EQ(store.size(), 1u);
    EXPECT_EQ(store.fetch(cid), b.package);

    Hash256 unknown = cid;
    unknown.bytes[0] ^= 0xff;
    try
    {
        store.fetch(unknown);
        FAIL();
    }
    catch (const PackageError& e)
    {
        EXPECT_EQ(e.code(), PackageError::Code::UnknownCid);
    }
}

TEST(ContentStore, MemoryStore)
{
    MemoryStore store;
    store_contract(store);
}

TEST(ContentStore, DirectoryStoreAndCorruption)
{
    const auto dir = temp_dir("store");
    {
        DirectoryStore store(dir);
        store_contract(store);
    }
    DirectoryStore reopened(dir);
    EXPECT_EQ(reopened.size(), 1u);
    const auto b = build_package(sources(), 1, config(), reg);
    EXPECT_EQ(reopened.fetch(b.cid), b.package);

    {
        std::ofstream out(dir / b.cid.hex().substr(2), std::ios::trunc);
        out << "tampered";
    }
    try
    {
        reopened.fetch(b.cid);
        FAIL() << "corruption not detected";
    }
    catch (const PackageError& e)
    {
        EXPECT_EQ(e.code(), PackageError::Code::CorruptObject);
    }
    std::filesystem::remove_all(dir);
}

TEST(Packages, LoadPackageDirectory)
{
    const auto dir = temp_dir("pkgdir");
    std::filesystem::create_directories(dir / "sources" / "contracts");
    for (const auto& [name, text] : sources())
        std::ofstream(dir / "sources" / name) << text;
    nlohmann::json doc = {{"controller", "controller"}, {"commit_ref", "abc123"},
        {"test_suite", {"controller-binds-all", "unique-contract-names"}}};
    for (const auto& c : config().contracts)
        doc["contracts"].push_back({{"name", c.name}, {"source", c.source}, {"args", c.args}});
    std::ofstream(dir / "package.json") << doc.dump(2);

    const auto [s, c] = load_package_dir(dir);
    EXPECT_EQ(s.size(), 4u);
    EXPECT_EQ(build_package(s, 1, c, reg).cid, build_package(sources(), 1, config(), reg).cid);

    std::ofstream(dir / "package.json") << "{";
    EXPECT_THROW(load_package_dir(dir), PackageError);
    std::filesystem::remove_all(dir);
}
