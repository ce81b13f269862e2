// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/harness.hpp>

#include <httplib.h>

#include <charconv>
#include <thread>

namespace detdeploy::harness
{
using governance::ProposalPayload;
using nlohmann::json;
namespace call = governance::call;

Engine::Engine(EngineConfig config)
  : config_(config), fixture_(std::make_unique<Fixture>(config.params))
{
    if (!config_.setup_c1)
        return;
    auto& chain = fixture_->chain;
    chain.advance_blocks(1);
    auto [id, receipt] = fixture_->propose_upgrade();
    if (!receipt.committed())
        throw std::logic_error("engine setup: proposal reverted");
    c1_ = id;
    verify_all(id);
    const auto p = chain.proposal(id);
    chain.advance_blocks(p.snapshot_block - chain.height());
}

void Engine::verify_all(const Hash256& proposal_id)
{
    auto& chain = fixture_->chain;
    const auto p = chain.proposal(proposal_id);
    if (p.upgrade() == nullptr)
        return;
    for (const auto& account : fixture_->accounts.stakeholders)
    {
        pipeline::StakeholderConfig config;
        config.account = account;
        reports_.save(pipeline::verify_proposal(
            config, p, fixture_->store, chain.registry_address(), chain.height()));
    }
}

namespace
{
struct HttpError
{
    int status;
    json body;
};

[[noreturn]] void bad_request(const std::string& message)
{
    throw HttpError{400, {{"error", "BadRequest"}, {"message", message}}};
}

std::vector<std::string_view> split_path(std::string_view path)
{
    std::vector<std::string_view> parts;
    while (!path.empty())
    {
        const auto slash = path.find('/');
        const auto part = path.substr(0, slash);
        if (!part.empty())
            parts.push_back(part);
        if (slash == std::string_view::npos)
            break;
        path.remove_prefix(slash + 1);
    }
    return parts;
}

std::map<std::string, std::string> parse_query(std::string_view query)
{
    std::map<std::string, std::string> out;
    std::size_t pos = 0;
    while (!query.empty())
    {
        const auto amp = query.find('&', pos);
        const auto item = query.substr(pos, amp == std::string_view::npos ? amp : amp - pos);
        const auto eq = item.find('=');
        if (!item.empty())
            out[std::string(item.substr(0, eq))] =
                eq == std::string_view::npos ? "" : std::string(item.substr(eq + 1));
        if (amp == std::string_view::npos)
            break;
        pos = amp + 1;
    }
    return out;
}

std::uint64_t parse_uint(std::string_view text, const char* what)
{
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size())
        bad_request(std::string("invalid ") + what);
    return v;
}

json parse_body(std::string_view body)
{
    if (body.empty())
        return json::object();
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        bad_request("body must be a JSON object");
    return j;
}

const std::string& string_field(const json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        bad_request(std::string("missing string field '") + key + "'");
    return it->get_ref<const std::string&>();
}

Address address_field(const json& j, const char* key)
{
    try
    {
        return Address::from_hex(string_field(j, key));
    }
    catch (const std::invalid_argument&)
    {
        bad_request(std::string("field '") + key + "' is not a 20-byte hex address");
    }
}

Hash256 parse_id(std::string_view text)
{
    try
    {
        return Hash256::from_hex(text);
    }
    catch (const std::invalid_argument&)
    {
        bad_request("proposal id must be 32-byte hex");
    }
}

json proposal_view(const governance::Proposal& p, std::uint64_t height)
{
    json j = p;
    j["state"] = to_string(governance::evaluate_state(p, height));
    return j;
}

json receipt_response(const ledger::TxReceipt& receipt)
{
    if (!receipt.committed())
        throw HttpError{409, {{"error", ledger::to_string(*receipt.error)}, {"receipt", receipt}}};
    return {{"receipt", receipt}};
}

ProposalPayload payload_from(const json& body, Engine& engine)
{
    const auto kind = body.value("kind", std::string("Upgrade"));
    if (kind == "Upgrade")
    {
        if (body.contains("package"))
        {
            auto& fx = engine.fixture();
            const auto package = packages::parse_package(body.at("package").dump());
            const auto built = packages::rebuild(package, fx.chain.registry_address());
            fx.store.store(package);
            return governance::UpgradePayload{package.version_id, built.derived.controller, built.cid};
        }
        governance::UpgradePayload up;
        up.version_id = body.at("version_id").get<std::uint64_t>();
        up.expected_address = address_field(body, "expected_address");
        up.package_cid = Hash256::from_hex(string_field(body, "package_cid"));
        return up;
    }
    if (kind == "StakeholderChange")
        return governance::StakeholderChangePayload{address_field(body, "account"), body.value("add", true)};
    if (kind == "RoleAssignment")
    {
        const auto role = governance::parse_role(string_field(body, "role"));
        if (!role)
            bad_request("unknown role");
        return governance::RoleAssignmentPayload{address_field(body, "account"), *role, body.value("grant", true)};
    }
    if (kind == "ParameterChange")
    {
        governance::ParameterChangePayload pc;
        if (body.contains("voting_delay"))
            pc.voting_delay = body.at("voting_delay").get<std::uint64_t>();
        if (body.contains("voting_period"))
            pc.voting_period = body.at("voting_period").get<std::uint64_t>();
        if (body.contains("timelock_delay"))
            pc.timelock_delay = body.at("timelock_delay").get<std::int64_t>();
        if (body.contains("quorum"))
            pc.quorum = body.at("quorum").get<std::uint32_t>();
        return pc;
    }
    bad_request("unknown proposal kind '" + kind + "'");
}

std::vector<Bytes> init_codes_for(const json& body, Engine& engine, const governance::Proposal& p)
{
    if (body.contains("init_codes"))
    {
        std::vector<Bytes> codes;
        for (const auto& c : body.at("init_codes"))
            codes.push_back(from_hex(c.get<std::string>()));
        return codes;
    }
    const auto* up = p.upgrade();
    if (up == nullptr)
        return {};
    // Without explicit init codes the propagator rebuilds the stored package.
    auto& fx = engine.fixture();
    return packages::rebuild(fx.store.fetch(up->package_cid), fx.chain.registry_address())
        .derived.init_codes;
}

json accounts_view(Engine& engine)
{
    const auto& a = engine.fixture().accounts;
    json stakeholders = json::array();
    for (const auto& s : a.stakeholders)
        stakeholders.push_back(s.hex());
    return {{"deployer", a.deployer.hex()}, {"registry", a.registry.hex()},
        {"stakeholders", std::move(stakeholders)}, {"proposer", a.proposer.hex()},
        {"propagator", a.propagator.hex()}};
}
}  // namespace

struct ApiService::Server
{
    httplib::Server http;
    std::thread thread;
};

ApiService::ApiService(Engine& engine) : engine_(engine) {}

ApiService::~ApiService()
{
    stop();
}

HttpResponse ApiService::handle(std::string_view method, std::string_view target, std::string_view body)
{
    auto& chain = engine_.fixture().chain;
    const auto qpos = target.find('?');
    const auto parts = split_path(target.substr(0, qpos));
    const auto query = parse_query(qpos == std::string_view::npos ? "" : target.substr(qpos + 1));
    const bool get = method == "GET";
    const bool post = method == "POST";

    try
    {
        if (parts.empty())
            throw HttpError{404, {{"error", "NotFound"}}};
        const auto root = parts[0];

        if (root == "proposals" && parts.size() == 1 && get)
        {
            const auto snap = chain.snapshot();
            json out = json::array();
            for (const auto& id : snap.state->governance.proposal_order)
                out.push_back(proposal_view(snap.state->governance.proposals.at(id), snap.height));
            return {200, std::move(out)};
        }
        if (root == "proposals" && parts.size() == 1 && post)
        {
            const auto j = parse_body(body);
            const auto sender = address_field(j, "proposer");
            const auto payload = payload_from(j, engine_);
            auto r = receipt_response(chain.submit(sender, call::Propose{payload}));
            const auto id = governance::proposal_id(payload);
            engine_.verify_all(id);
            r["proposal_id"] = id.hex();
            return {200, std::move(r)};
        }
        if (root == "proposals" && parts.size() >= 2)
        {
            const auto id = parse_id(parts[1]);
            const auto snap = chain.snapshot();
            const auto& proposals = snap.state->governance.proposals;
            const auto it = proposals.find(id);
            if (it == proposals.end())
                throw HttpError{404, {{"error", "UnknownProposal"}}};

            if (parts.size() == 2 && get)
            {
                auto view = proposal_view(it->second, snap.height);
                const auto log = conformance::log_from_ledger(chain.events());
                json timeline = json::array();
                for (const auto& t : log.traces)
                    if (t.case_id == id.hex())
                        for (const auto& e : t.events)
                            timeline.push_back({{"activity", e.activity},
                                {"timestamp", ledger::format_iso8601(e.timestamp)}, {"tx_id", e.tx_id},
                                {"payload", e.payload}});
                view["timeline"] = std::move(timeline);
                return {200, std::move(view)};
            }
            if (parts.size() == 3 && get && parts[2] == "reports")
                return {200, json(engine_.reports().for_proposal(id))};
            if (parts.size() == 3 && post)
            {
                const auto j = parse_body(body);
                if (parts[2] == "vote")
                {
                    const auto support = governance::parse_support(string_field(j, "support"));
                    if (!support)
                        bad_request("support must be For or Against");
                    return {200,
                        receipt_response(chain.submit(address_field(j, "voter"), call::CastVote{id, *support}))};
                }
                if (parts[2] == "queue")
                    return {200, receipt_response(chain.submit(address_field(j, "sender"), call::Queue{id}))};
                if (parts[2] == "execute")
                {
                    const auto sender = address_field(j, "sender");
                    auto codes = init_codes_for(j, engine_, it->second);
                    return {200, receipt_response(chain.submit(sender, call::Execute{id, std::move(codes)}))};
                }
            }
        }
        if (root == "versions" && parts.size() == 1 && get)
        {
            const auto snap = chain.snapshot();
            return {200, json(snap.state->registry)};
        }
        if (root == "events" && parts.size() == 1 && get)
        {
            const auto events = chain.events();
            const std::uint64_t since = query.contains("since") ? parse_uint(query.at("since"), "since") : 0;
            json out = json::array();
            for (std::size_t i = since; i < events.size(); ++i)
                out.push_back(events[i]);
            return {200, std::move(out)};
        }
        if (root == "accounts" && parts.size() == 1 && get)
            return {200, accounts_view(engine_)};
        if (root == "time" && parts.size() == 2 && parts[1] == "advance" && post)
        {
            if (!engine_.time_control())
                throw HttpError{403, {{"error", "TimeControlDisabled"}}};
            const auto j = parse_body(body);
            const auto blocks = j.value("blocks", std::uint64_t{1});
            chain.advance_blocks(blocks);
            return {200, {{"height", chain.height()}, {"timestamp", chain.timestamp()}}};
        }
        throw HttpError{404, {{"error", "NotFound"}}};
    }
    catch (const HttpError& e)
    {
        return {e.status, e.body};
    }
    catch (const governance::QueryError& e)
    {
        return {404, {{"error", ledger::to_string(e.code())}}};
    }
    catch (const packages::PackageError& e)
    {
        return {400, {{"error", "BadPackage"}, {"message", e.what()}}};
    }
    catch (const json::exception& e)
    {
        return {400, {{"error", "BadRequest"}, {"message", e.what()}}};
    }
    catch (const std::invalid_argument& e)
    {
        return {400, {{"error", "BadRequest"}, {"message", e.what()}}};
    }
}

namespace
{
void install_routes(httplib::Server& http, ApiService& api)
{
    const auto dispatch = [&api](const httplib::Request& req, httplib::Response& res) {
        const auto r = api.handle(req.method, req.target, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
        {"Access-Control-Allow-Headers", "Content-Type"},
        {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http.Get(".*", dispatch);
    http.Post(".*", dispatch);
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}
}  // namespace

bool ApiService::listen(const std::string& host, int port)
{
    stop();
    server_ = std::make_unique<Server>();
    install_routes(server_->http, *this);
    return server_->http.listen(host, port);
}

int ApiService::start_background(const std::string& host)
{
    stop();
    server_ = std::make_unique<Server>();
    install_routes(server_->http, *this);
    const int port = server_->http.bind_to_any_port(host);
    if (port < 0)
        return port;
    server_->thread = std::thread([this] { server_->http.listen_after_bind(); });
    server_->http.wait_until_ready();
    return port;
}

void ApiService::stop()
{
    if (!server_)
        return;
    server_->http.stop();
    if (server_->thread.joinable())
        server_->thread.join();
    server_.reset();
}

}  // namespace detdeploy::harness
