// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/harness.hpp>
#include <detdeploy/keccak.hpp>

#include <stdexcept>

namespace detdeploy::harness
{
using governance::Role;
namespace call = governance::call;

Address account_for(std::string_view label)
{
    const auto digest = keccak256(label);
    return Address::from_view(ByteView(digest.bytes).subspan(12));
}

Accounts Accounts::make()
{
    return {
        account_for("deployer"),
        account_for("registry"),
        {account_for("stakeholder-1"), account_for("stakeholder-2"), account_for("stakeholder-3")},
        account_for("package-proposer"),
        account_for("propagator"),
    };
}

std::pair<packages::SourceTree, packages::BuildConfig> c1_sources()
{
    packages::SourceTree sources = {
        {"contracts/Token.sol",
            "contract Token {\n"
            "    uint256 public totalSupply;\n"
            "    constructor(uint256 supply) { totalSupply = supply; }\n"
            "}\n"},
        {"contracts/Hub.sol",
            "contract Hub {\n"
            "    address public token;\n"
            "    constructor(address t) { token = t; }\n"
            "}\n"},
        {"contracts/VersionController.sol",
            "contract VersionController {\n"
            "    address public token;\n"
            "    address public hub;\n"
            "    constructor(address t, address h) { token = t; hub = h; }\n"
            "}\n"},
    };
    packages::BuildConfig config;
    config.contracts = {
        {"controller", "contracts/VersionController.sol",
            {registry::ContractRef{"token"}, registry::ContractRef{"hub"}}},
        {"hub", "contracts/Hub.sol", {registry::ContractRef{"token"}}},
        {"token", "contracts/Token.sol", {std::uint64_t{1'000'000}}},
    };
    config.controller = "controller";
    config.test_suite = {
        "commit-ref-present", "controller-binds-all", "unique-contract-names", "version-matches-salt"};
    config.commit_ref = "release-1";
    return {std::move(sources), std::move(config)};
}

Fixture::Fixture(governance::GovernanceParams params, ledger::LedgerConfig ledger)
  : accounts(Accounts::make()),
    chain(governance::ChainConfig{accounts.deployer, accounts.registry, params, ledger})
{
    for (const auto& s : accounts.stakeholders)
        chain.register_account(s);
    chain.register_account(accounts.proposer);
    chain.register_account(accounts.propagator);

    const auto grant = [&](const Address& who, Role role) {
        auto r = chain.submit(accounts.deployer, call::GrantRole{who, role});
        if (!r.committed())
            throw std::logic_error("fixture bootstrap reverted");
        bootstrap.push_back({"grant_role", std::move(r)});
    };
    for (const auto& s : accounts.stakeholders)
    {
        grant(s, Role::Stakeholder);
        grant(s, Role::Voter);
    }
    grant(accounts.proposer, Role::PackageProposer);
    grant(accounts.propagator, Role::Propagator);

    auto closed = chain.submit(accounts.deployer, call::CloseBootstrap{});
    if (!closed.committed())
        throw std::logic_error("fixture bootstrap could not be closed");
    bootstrap.push_back({"close_bootstrap", std::move(closed)});

    const auto [sources, config] = c1_sources();
    build = packages::build_package(
        sources, chain.snapshot().state->registry.next_version(), config, accounts.registry);
}

governance::UpgradePayload Fixture::upgrade_payload() const
{
    return {build.package.version_id, build.derived.controller, build.cid};
}

std::pair<Hash256, ledger::TxReceipt> Fixture::propose_upgrade()
{
    store.store(build.package);
    const auto payload = upgrade_payload();
    auto receipt = chain.submit(accounts.proposer, call::Propose{payload});
    return {governance::proposal_id(payload), std::move(receipt)};
}

}  // namespace detdeploy::harness
