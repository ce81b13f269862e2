// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/pipeline.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace detdeploy::pipeline
{
using governance::Support;
using nlohmann::json;

const std::map<std::string, TestPredicate>& standard_checks()
{
    static const std::map<std::string, TestPredicate> checks = {
        {"unique-contract-names",
            [](const packages::PackageManifest& m, const registry::DerivedVersion&) {
                std::set<std::string> names;
                for (const auto& c : m.manifest.contracts)
                    if (!names.insert(c.name).second)
                        return false;
                return true;
            }},
        {"controller-binds-all",
            [](const packages::PackageManifest& m, const registry::DerivedVersion& d) {
                if (d.init_codes.empty())
                    return false;
                const auto controller = registry::InitCode::decode(d.init_codes.back());
                for (std::size_t i = 0; i + 1 < d.addresses.size(); ++i)
                {
                    const auto& want = d.addresses[i].second;
                    const bool bound = std::any_of(controller.args.begin(), controller.args.end(),
                        [&](const auto& a) {
                            const auto* addr = std::get_if<Address>(&a);
                            return addr && *addr == want;
                        });
                    if (!bound)
                        return false;
                }
                return m.manifest.contracts.size() == d.addresses.size();
            }},
        {"version-matches-salt",
            [](const packages::PackageManifest& m, const registry::DerivedVersion&) {
                return m.version_id == m.manifest.version_id && m.version_id >= 1;
            }},
        {"commit-ref-present",
            [](const packages::PackageManifest& m, const registry::DerivedVersion&) {
                return !m.commit_ref.empty();
            }},
    };
    return checks;
}

VerificationReport verify_proposal(const StakeholderConfig& config,
    const governance::Proposal& proposal, const packages::ContentStore& store,
    const Address& registry, std::uint64_t height)
{
    VerificationReport report;
    report.proposal_id = proposal.id;
    report.account = config.account;
    report.produced_at = height;
    report.mainnet_rigor = config.mainnet_rigor;

    const auto* upgrade = proposal.upgrade();
    if (!upgrade)
    {
        report.note = "not an upgrade proposal";
        return report;
    }

    packages::BuildResult build;
    try
    {
        build = packages::rebuild(store.fetch(upgrade->package_cid), registry);
    }
    catch (const packages::PackageError& e)
    {
        report.note = std::string("PackageUnavailable: ") + e.what();
        return report;
    }

    report.derived_address = build.derived.controller;
    report.integrity = build.derived.controller == upgrade->expected_address &&
                       build.manifest.version_id == upgrade->version_id;

    const auto run = [&](const std::string& name, const TestPredicate& check) {
        if (config.external_runner)
            return config.external_runner(name);
        try
        {
            return check(build.manifest, build.derived);
        }
        catch (const std::exception&)
        {
            return false;
        }
    };

    const auto& standard = standard_checks();
    for (const auto& name : build.manifest.test_suite)
    {
        const auto it = standard.find(name);
        report.standard_results[name] = it != standard.end() && run(name, it->second);
    }
    for (const auto& test : config.private_tests)
        report.private_results[test.name] = run(test.name, test.check);

    const auto all_pass = [](const auto& results) {
        return std::all_of(results.begin(), results.end(), [](const auto& kv) { return kv.second; });
    };
    switch (config.policy)
    {
    case VotePolicy::AllPass:
        report.decision = report.integrity && all_pass(report.standard_results) &&
                                  all_pass(report.private_results)
                              ? Support::For
                              : Support::Against;
        break;
    }
    return report;
}

void to_json(json& j, const VerificationReport& r)
{
    j = {{"proposal_id", r.proposal_id.hex()}, {"account", r.account.hex()},
        {"integrity", r.integrity}, {"standard_results", r.standard_results},
        {"private_results", r.private_results}, {"decision", governance::to_string(r.decision)},
        {"produced_at", r.produced_at}, {"mainnet_rigor", r.mainnet_rigor}, {"note", r.note}};
    j["derived_address"] = r.derived_address ? json(r.derived_address->hex()) : json(nullptr);
}

void from_json(const json& j, VerificationReport& r)
{
    r.proposal_id = Hash256::from_hex(j.at("proposal_id").get<std::string>());
    r.account = Address::from_hex(j.at("account").get<std::string>());
    j.at("integrity").get_to(r.integrity);
    j.at("standard_results").get_to(r.standard_results);
    j.at("private_results").get_to(r.private_results);
    r.decision = governance::parse_support(j.at("decision").get<std::string>()).value_or(Support::Against);
    j.at("produced_at").get_to(r.produced_at);
    r.mainnet_rigor = j.value("mainnet_rigor", false);
    j.at("note").get_to(r.note);
    if (const auto& d = j.at("derived_address"); !d.is_null())
        r.derived_address = Address::from_hex(d.get<std::string>());
    else
        r.derived_address.reset();
}

ReportStore::ReportStore(std::filesystem::path root) : root_(std::move(root))
{
    std::filesystem::create_directories(*root_);
}

void ReportStore::save(const VerificationReport& report)
{
    std::scoped_lock lock(mutex_);
    if (!root_)
    {
        memory_[report.proposal_id][report.account] = report;
        return;
    }
    const auto dir = *root_ / report.proposal_id.hex();
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / (report.account.hex() + ".json"));
    out << json(report).dump(2) << '\n';
}

std::vector<VerificationReport> ReportStore::for_proposal(const Hash256& proposal_id) const
{
    std::scoped_lock lock(mutex_);
    std::vector<VerificationReport> out;
    if (!root_)
    {
        if (const auto it = memory_.find(proposal_id); it != memory_.end())
            for (const auto& [account, report] : it->second)
                out.push_back(report);
        return out;
    }
    const auto dir = *root_ / proposal_id.hex();
    if (!std::filesystem::is_directory(dir))
        return out;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files)
    {
        std::ifstream in(path);
        out.push_back(json::parse(in).get<VerificationReport>());
    }
    return out;
}

StakeholderNode::StakeholderNode(StakeholderConfig config, const packages::ContentStore& store,
    ReportStore* reports, std::optional<std::int64_t> vote_at)
  : config_(std::move(config)), store_(store), reports_(reports), vote_at_(vote_at)
{
    if (config_.poll_interval == 0)
        throw std::invalid_argument("poll_interval must be positive");
}

std::vector<ledger::TxReceipt> StakeholderNode::poll(governance::Chain& chain)
{
    std::vector<ledger::TxReceipt> cast;
    const auto height = chain.height();
    const auto now = chain.timestamp();

    for (const auto& p : chain.proposals())
    {
        if (!p.upgrade() || seen_.contains(p.id))
            continue;
        const auto state = governance::evaluate_state(p, height);
        if (state != governance::ProposalState::Pending && state != governance::ProposalState::Active)
            continue;

        Pending pending;
        pending.report = verify_proposal(config_, p, store_, chain.registry_address(), height);
        const auto created = chain.timestamp_at(p.creation_block);
        pending.due = vote_at_ ? created + *vote_at_ : chain.timestamp_at(p.snapshot_block);
        if (reports_)
            reports_->save(pending.report);
        journal_.push_back({height, p.id, "verified", std::nullopt});
        seen_.emplace(p.id, std::move(pending));
    }

    for (auto& [id, pending] : seen_)
    {
        if (pending.done || now < pending.due)
            continue;
        pending.done = true;
        auto receipt = chain.submit(
            config_.account, governance::call::CastVote{id, pending.report.decision});
        journal_.push_back({height, id, "vote", receipt});
        cast.push_back(std::move(receipt));
    }
    return cast;
}

std::optional<VerificationReport> StakeholderNode::report(const Hash256& proposal_id) const
{
    const auto it = seen_.find(proposal_id);
    if (it == seen_.end())
        return std::nullopt;
    return it->second.report;
}

std::vector<ledger::TxReceipt> run_nodes(governance::Chain& chain,
    std::vector<StakeholderNode*> nodes, std::uint64_t until_height)
{
    std::vector<ledger::TxReceipt> out;
    if (nodes.empty())
        return out;
    std::uint64_t step = nodes.front()->config().poll_interval;
    for (const auto* n : nodes)
        step = std::min(step, n->config().poll_interval);
    std::vector<std::optional<std::uint64_t>> last_poll(nodes.size());
    while (true)
    {
        for (std::size_t i = 0; i < nodes.size(); ++i)
        {
            const auto h = chain.height();
            if (last_poll[i] && h < *last_poll[i] + nodes[i]->config().poll_interval)
                continue;
            last_poll[i] = h;
            auto r = nodes[i]->poll(chain);
            out.insert(out.end(), r.begin(), r.end());
        }
        if (chain.height() >= until_height)
            break;
        chain.advance_blocks(std::min(step, until_height - chain.height()));
    }
    return out;
}

}  // namespace detdeploy::pipeline
