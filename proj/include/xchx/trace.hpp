// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_TRACE_HPP
#define XCHX_TRACE_HPP

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xchx/hash.hpp"

namespace xchx {

/// One simulation event. Serialized as a JSON line with fixed key order so
/// traces hash identically across runs.
struct TraceEvent {
    std::int64_t t_ms = 0;
    std::string actor;
    std::string action;
    nlohmann::ordered_json payload;

    std::string to_line() const {
        nlohmann::ordered_json line;
        line["t_ms"] = t_ms;
        line["actor"] = actor;
        line["action"] = action;
        line["payload"] = payload;
        return line.dump();
    }
};

inline std::string trace_to_jsonl(const std::vector<TraceEvent>& events) {
    std::string out;
    for (const auto& ev : events) {
        out += ev.to_line();
        out += '\n';
    }
    return out;
}

inline std::vector<TraceEvent> trace_from_jsonl(const std::string& text) {
    std::vector<TraceEvent> events;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::ordered_json node = nlohmann::ordered_json::parse(line);
        TraceEvent ev;
        ev.t_ms = node.at("t_ms").get<std::int64_t>();
        ev.actor = node.at("actor").get<std::string>();
        ev.action = node.at("action").get<std::string>();
        ev.payload = node.at("payload");
        events.push_back(std::move(ev));
    }
    return events;
}

inline std::string trace_hash(const std::vector<TraceEvent>& events) {
    return hex(sha256(trace_to_jsonl(events)));
}

/// Run counters. Online metrics and trace recomputation share this single
/// fold, so the two can only agree or reveal a serialization defect.
struct Metrics {
    std::map<std::string, std::int64_t> counters;
    std::map<std::string, std::int64_t> gas_by_caller;
    std::map<std::string, std::int64_t> gas_by_op;

    bool operator==(const Metrics&) const = default;

    std::int64_t counter(const std::string& name) const {
        auto it = counters.find(name);
        return it == counters.end() ? 0 : it->second;
    }

    void absorb(const TraceEvent& ev) {
        auto bump = [&](const char* name, std::int64_t by = 1) { counters[name] += by; };
        if (ev.action == "session_settled") bump("sessions_settled");
        else if (ev.action == "session_aborted") bump("sessions_aborted");
        else if (ev.action == "tally_finalized") bump("tallies_finalized");
        else if (ev.action == "tally_escalated") bump("tallies_escalated");
        else if (ev.action == "admission_ok") bump("committee_admissions");
        else if (ev.action == "slash") bump("slashings");
        else if (ev.action == "vote_ok") bump("votes_cast");
        else if (ev.action == "block_mined") bump("blocks_mined");
        else if (ev.action == "reorg_ok") bump("reorgs");
        else if (ev.action == "transfer_submitted") bump("transfers_submitted");
        else if (ev.action == "transfer_rejected") bump("transfers_rejected");
        else if (ev.action == "prepare_ok") bump("intents_prepared");
        else if (ev.action == "prepare_rejected") bump("prepares_rejected");
        else if (ev.action == "select_ok") bump("intents_excluded", ev.payload.value("excluded", 0));
        else if (ev.action == "escrow_move") {
            bump("escrow_moves_total");
            std::string kind = ev.payload.value("kind", "");
            if (kind == "payee_return" || kind == "payee_forfeit" || kind == "forward")
                bump("settlement_moves");
            if (kind == "payee_forfeit") bump("escrow_forfeitures");
        } else if (ev.action == "final_audit") {
            if (ev.payload.value("wrong", false)) {
                if (ev.payload.value("verdict", "") == "Confirmed") bump("wrong_confirmed");
                else bump("wrong_failed");
            }
        } else if (ev.action == "conservation_check") {
            if (ev.payload.value("ok", false)) bump("conservation_checks_passed");
        } else if (ev.action == "gas_charge") {
            std::int64_t gas = ev.payload.value("gas", std::int64_t(0));
            gas_by_caller[ev.payload.value("caller", "?")] += gas;
            gas_by_op[ev.payload.value("op", "?")] += gas;
            bump("gas_total", gas);
        }
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json out;
        out["counters"] = nlohmann::ordered_json::object();
        for (const auto& [name, value] : counters) out["counters"][name] = value;
        out["gas_by_caller"] = nlohmann::ordered_json::object();
        for (const auto& [name, value] : gas_by_caller) out["gas_by_caller"][name] = value;
        out["gas_by_op"] = nlohmann::ordered_json::object();
        for (const auto& [name, value] : gas_by_op) out["gas_by_op"][name] = value;
        return out;
    }

    std::string to_csv() const {
        std::string out = "counter,value\n";
        for (const auto& [name, value] : counters) out += name + "," + std::to_string(value) + "\n";
        for (const auto& [name, value] : gas_by_caller)
            out += "gas_caller." + name + "," + std::to_string(value) + "\n";
        for (const auto& [name, value] : gas_by_op)
            out += "gas_op." + name + "," + std::to_string(value) + "\n";
        return out;
    }
};

/// Pure recomputation of the counters from a finished trace.
inline Metrics collect_metrics(const std::vector<TraceEvent>& events) {
    Metrics metrics;
    for (const auto& ev : events) metrics.absorb(ev);
    return metrics;
}

}  // namespace xchx

#endif  // XCHX_TRACE_HPP
