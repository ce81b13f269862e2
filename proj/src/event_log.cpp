// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/conformance.hpp>

#include <json.hpp>

#include <map>
#include <sstream>

namespace detdeploy::conformance
{
namespace
{
constexpr std::string_view csv_header = "case_id,activity,timestamp,tx_id,payload_json";

std::string csv_field(const std::string& value)
{
    if (value.find_first_of(",\"\r\n") == std::string::npos)
        return value;
    std::string out = "\"";
    for (const char c : value)
    {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

/// RFC 4180 records; quoted fields may contain separators and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i)
    {
        const char c = text[i];
        if (quoted)
        {
            if (c == '"')
            {
                if (i + 1 < text.size() && text[i + 1] == '"')
                {
                    field.push_back('"');
                    ++i;
                }
                else
                {
                    quoted = false;
                }
            }
            else
            {
                field.push_back(c);
            }
            continue;
        }
        switch (c)
        {
        case '"':
            if (field_started)
                throw ConformanceError("stray quote in CSV field");
            quoted = true;
            field_started = true;
            break;
        case ',':
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
            break;
        case '\r':
            break;
        case '\n':
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
            rows.push_back(std::move(row));
            row.clear();
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted)
        throw ConformanceError("unterminated quoted CSV field");
    if (field_started || !row.empty())
    {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string xml_escape(std::string_view s)
{
    std::string out;
    for (const char c : s)
    {
        switch (c)
        {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string xml_unescape(std::string_view s)
{
    static const std::pair<std::string_view, char> entities[] = {
        {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
    std::string out;
    for (std::size_t i = 0; i < s.size();)
    {
        bool matched = false;
        if (s[i] == '&')
        {
            for (const auto& [entity, c] : entities)
            {
                if (s.substr(i, entity.size()) == entity)
                {
                    out.push_back(c);
                    i += entity.size();
                    matched = true;
                    break;
                }
            }
            if (!matched)
                throw ConformanceError("unsupported XML entity");
        }
        else
        {
            out.push_back(s[i++]);
        }
    }
    return out;
}

std::string attribute(std::string_view tag, std::string_view name)
{
    const auto key = std::string(name) + "=\"";
    const auto start = tag.find(key);
    if (start == std::string_view::npos)
        throw ConformanceError("XES element without " + std::string(name));
    const auto begin = start + key.size();
    const auto end = tag.find('"', begin);
    if (end == std::string_view::npos)
        throw ConformanceError("unterminated XES attribute");
    return xml_unescape(tag.substr(begin, end - begin));
}

std::string payload_json(const ledger::Payload& payload)
{
    return nlohmann::json(payload).dump();
}

ledger::Payload parse_payload(const std::string& text)
{
    if (text.empty())
        return {};
    try
    {
        return nlohmann::json::parse(text).get<ledger::Payload>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConformanceError(std::string("malformed payload_json: ") + e.what());
    }
}

EventLog group_rows(std::vector<std::pair<std::string, Event>> rows)
{
    EventLog log;
    std::map<std::string, std::size_t> index;
    for (auto& [case_id, event] : rows)
    {
        auto [it, fresh] = index.try_emplace(case_id, log.traces.size());
        if (fresh)
            log.traces.push_back({case_id, {}});
        log.traces[it->second].events.push_back(std::move(event));
    }
    return log;
}

EventLog import_csv(std::string_view text)
{
    auto rows = parse_csv(text);
    if (rows.empty() || rows.front().size() != 5)
        throw ConformanceError("CSV header must be: " + std::string(csv_header));
    std::vector<std::pair<std::string, Event>> events;
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        auto& r = rows[i];
        if (r.size() == 1 && r[0].empty())
            continue;
        if (r.size() != 5)
            throw ConformanceError("CSV row " + std::to_string(i) + " has " +
                                   std::to_string(r.size()) + " fields");
        Event e;
        e.activity = r[1];
        try
        {
            e.timestamp = ledger::parse_iso8601(r[2]);
            e.tx_id = r[3].empty() ? 0 : std::stoull(r[3]);
        }
        catch (const std::exception& ex)
        {
            throw ConformanceError("CSV row " + std::to_string(i) + ": " + ex.what());
        }
        e.payload = parse_payload(r[4]);
        events.emplace_back(r[0], std::move(e));
    }
    return group_rows(std::move(events));
}

EventLog import_xes(std::string_view text)
{
    EventLog log;
    std::optional<Trace> trace;
    std::optional<Event> event;
    int global_depth = 0;

    std::size_t pos = 0;
    while ((pos = text.find('<', pos)) != std::string_view::npos)
    {
        const auto end = text.find('>', pos);
        if (end == std::string_view::npos)
            throw ConformanceError("unterminated XES tag");
        const auto tag = text.substr(pos + 1, end - pos - 1);
        pos = end + 1;

        if (tag.starts_with("?") || tag.starts_with("!"))
            continue;
        if (tag.starts_with("global"))
        {
            if (!tag.ends_with("/"))
                ++global_depth;
            continue;
        }
        if (tag == "/global")
        {
            --global_depth;
            continue;
        }
        if (global_depth > 0)
            continue;

        if (tag == "trace")
            trace.emplace();
        else if (tag == "/trace")
        {
            if (!trace)
                throw ConformanceError("unbalanced </trace>");
            log.traces.push_back(std::move(*trace));
            trace.reset();
        }
        else if (tag == "event")
        {
            if (!trace)
                throw ConformanceError("<event> outside a trace");
            event.emplace();
        }
        else if (tag == "/event")
        {
            if (!event)
                throw ConformanceError("unbalanced </event>");
            trace->events.push_back(std::move(*event));
            event.reset();
        }
        else if (tag.starts_with("string ") || tag.starts_with("date ") || tag.starts_with("int "))
        {
            const auto key = attribute(tag, "key");
            const auto value = attribute(tag, "value");
            try
            {
                if (event)
                {
                    if (key == "concept:name")
                        event->activity = value;
                    else if (key == "time:timestamp")
                        event->timestamp = ledger::parse_iso8601(value);
                    else if (key == "tx_id")
                        event->tx_id = std::stoull(value);
                    else if (key == "payload_json")
                        event->payload = parse_payload(value);
                }
                else if (trace && key == "concept:name")
                {
                    trace->case_id = value;
                }
            }
            catch (const std::invalid_argument& ex)
            {
                throw ConformanceError(std::string("malformed XES attribute: ") + ex.what());
            }
        }
    }
    if (trace || event)
        throw ConformanceError("truncated XES document");
    return log;
}
}  // namespace

EventLog log_from_ledger(std::span<const ledger::LedgerEvent> events)
{
    std::map<std::uint64_t, std::string> tx_case;
    for (const auto& e : events)
        if (const auto it = e.payload.find("proposal_id"); it != e.payload.end())
            tx_case.try_emplace(e.tx_id, it->second);

    std::vector<std::pair<std::string, Event>> rows;
    for (const auto& e : events)
    {
        std::string case_id;
        if (const auto it = e.payload.find("proposal_id"); it != e.payload.end())
            case_id = it->second;
        else if (const auto tx = tx_case.find(e.tx_id); tx != tx_case.end())
            case_id = tx->second;
        else
            continue;
        rows.emplace_back(std::move(case_id), Event{e.name, e.timestamp, e.tx_id, e.payload});
    }
    return group_rows(std::move(rows));
}

Trace make_trace(std::string case_id, const std::vector<std::string>& activities,
    const std::vector<std::int64_t>& timestamps)
{
    Trace t{std::move(case_id), {}};
    for (std::size_t i = 0; i < activities.size(); ++i)
        t.events.push_back({activities[i], i < timestamps.size() ? timestamps[i] : 0, 0, {}});
    return t;
}

std::string export_log(const EventLog& log, LogFormat format)
{
    std::ostringstream out;
    if (format == LogFormat::Csv)
    {
        out << csv_header << '\n';
        for (const auto& t : log.traces)
            for (const auto& e : t.events)
                out << csv_field(t.case_id) << ',' << csv_field(e.activity) << ','
                    << ledger::format_iso8601(e.timestamp) << ',' << e.tx_id << ','
                    << csv_field(payload_json(e.payload)) << '\n';
        return out.str();
    }

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<log xes.version=\"1.0\" xes.features=\"nested-attributes\" "
           "xmlns=\"http://www.xes-standard.org/\">\n"
        << "  <extension name=\"Concept\" prefix=\"concept\" "
           "uri=\"http://www.xes-standard.org/concept.xesext\"/>\n"
        << "  <extension name=\"Time\" prefix=\"time\" "
           "uri=\"http://www.xes-standard.org/time.xesext\"/>\n"
        << "  <global scope=\"trace\">\n"
        << "    <string key=\"concept:name\" value=\"__INVALID__\"/>\n"
        << "  </global>\n"
        << "  <global scope=\"event\">\n"
        << "    <string key=\"concept:name\" value=\"__INVALID__\"/>\n"
        << "    <date key=\"time:timestamp\" value=\"1970-01-01T00:00:00Z\"/>\n"
        << "  </global>\n"
        << "  <classifier name=\"Activity\" keys=\"concept:name\"/>\n";
    for (const auto& t : log.traces)
    {
        out << "  <trace>\n"
            << "    <string key=\"concept:name\" value=\"" << xml_escape(t.case_id) << "\"/>\n";
        for (const auto& e : t.events)
        {
            out << "    <event>\n"
                << "      <string key=\"concept:name\" value=\"" << xml_escape(e.activity) << "\"/>\n"
                << "      <date key=\"time:timestamp\" value=\"" << ledger::format_iso8601(e.timestamp)
                << "\"/>\n"
                << "      <int key=\"tx_id\" value=\"" << e.tx_id << "\"/>\n"
                << "      <string key=\"payload_json\" value=\"" << xml_escape(payload_json(e.payload))
                << "\"/>\n"
                << "    </event>\n";
        }
        out << "  </trace>\n";
    }
    out << "</log>\n";
    return out.str();
}

EventLog import_log(std::string_view text, LogFormat format)
{
    return format == LogFormat::Csv ? import_csv(text) : import_xes(text);
}

LogFormat format_for_path(std::string_view path) noexcept
{
    return path.ends_with(".xes") || path.ends_with(".XES") ? LogFormat::Xes : LogFormat::Csv;
}

}  // namespace detdeploy::conformance
