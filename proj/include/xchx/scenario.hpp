// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_SCENARIO_HPP
#define XCHX_SCENARIO_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "xchx/committee.hpp"
#include "xchx/contracts.hpp"
#include "xchx/ledger.hpp"

namespace xchx {

enum class BehaviorKind {
    HonestPayer,
    FalseClaimPayer,
    DoubleSpendPayer,
    HonestPayee,
    FalseDenialPayee,
    HonestIntermediary,
    AbscondingIntermediary,
    HonestValidator,
    ByzantineValidator,
    SybilSpawner,
};

inline std::optional<BehaviorKind> behavior_from_name(const std::string& name) {
    static const std::map<std::string, BehaviorKind> names = {
        {"HonestPayer", BehaviorKind::HonestPayer},
        {"FalseClaimPayer", BehaviorKind::FalseClaimPayer},
        {"DoubleSpendPayer", BehaviorKind::DoubleSpendPayer},
        {"HonestPayee", BehaviorKind::HonestPayee},
        {"FalseDenialPayee", BehaviorKind::FalseDenialPayee},
        {"HonestIntermediary", BehaviorKind::HonestIntermediary},
        {"AbscondingIntermediary", BehaviorKind::AbscondingIntermediary},
        {"HonestValidator", BehaviorKind::HonestValidator},
        {"ByzantineValidator", BehaviorKind::ByzantineValidator},
        {"SybilSpawner", BehaviorKind::SybilSpawner},
    };
    auto it = names.find(name);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

struct ActorSpec {
    std::string id;
    BehaviorKind kind = BehaviorKind::HonestPayer;

    // Parameters, validated per kind at load time.
    int split = 1;                      // payers: raw transfers per obligation
    int reorg_depth = 1;                // DoubleSpendPayer
    std::string divert_to;              // DoubleSpendPayer: replacement recipient
    double lie_probability = 1.0;       // ByzantineValidator
    double hash_rate = 1.0;             // validators: puzzle attempts per second
    Amount stake = 0;                   // validators: 0 means the scenario minimum
    Amount min_amount = 1;              // intermediaries: dust threshold
    std::string abscond_at = "payout";  // AbscondingIntermediary: select | deposit | payout
    int spawn_count = 3;                // SybilSpawner
    Amount dust_amount = 1;             // SybilSpawner
};

struct UpdateSpec {
    std::string id;
    std::int64_t at_s = 0;
};

struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 0;
    std::int64_t duration_s = 3600;
    std::vector<ChainConfig> chains;
    std::string ether_chain;
    std::vector<IntermediaryRecord> intermediaries;
    std::vector<TradeIntent> trades;
    PowParams pow;
    int threshold_a = -1;  // -1: default to floor(w/2)
    SessionParams session;
    std::map<std::string, std::int64_t> gas_overrides;
    std::vector<ActorSpec> actors;
    std::vector<UpdateSpec> updates;
    std::string fault;  // honored only by fault-injection builds

    const ChainConfig& chain(const std::string& id) const {
        for (const auto& c : chains) {
            if (c.chain_id == id) return c;
        }
        throw ConfigError("unknown chain " + id);
    }

    std::optional<const ActorSpec*> actor(const std::string& id) const {
        for (const auto& a : actors) {
            if (a.id == id) return &a;
        }
        return std::nullopt;
    }
};

namespace detail {

using nlohmann::json;

inline const json& need(const json& node, const std::string& key, const std::string& path) {
    auto it = node.find(key);
    if (it == node.end()) throw ConfigError(path + "." + key + ": missing");
    return *it;
}

inline std::int64_t need_int(const json& node, const std::string& key, const std::string& path) {
    const json& v = need(node, key, path);
    if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected integer");
    return v.get<std::int64_t>();
}

inline std::int64_t opt_int(const json& node, const std::string& key, std::int64_t fallback,
                            const std::string& path) {
    if (!node.contains(key)) return fallback;
    if (!node[key].is_number_integer()) throw ConfigError(path + "." + key + ": expected integer");
    return node[key].get<std::int64_t>();
}

inline double opt_num(const json& node, const std::string& key, double fallback, const std::string& path) {
    if (!node.contains(key)) return fallback;
    if (!node[key].is_number()) throw ConfigError(path + "." + key + ": expected number");
    return node[key].get<double>();
}

inline std::string need_str(const json& node, const std::string& key, const std::string& path) {
    const json& v = need(node, key, path);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected string");
    return v.get<std::string>();
}

inline std::string opt_str(const json& node, const std::string& key, const std::string& fallback,
                           const std::string& path) {
    if (!node.contains(key)) return fallback;
    if (!node[key].is_string()) throw ConfigError(path + "." + key + ": expected string");
    return node[key].get<std::string>();
}

/// Exchange rates must be exact: decimal strings or integers, never floats.
inline Rat need_rate(const json& node, const std::string& key, const std::string& path) {
    const json& v = need(node, key, path);
    if (v.is_number_integer()) return Rat(v.get<std::int64_t>());
    if (v.is_string()) return parse_decimal(v.get<std::string>());
    throw ConfigError(path + "." + key + ": expected integer or decimal string");
}

inline U256 parse_target(const json& node, const std::string& path) {
    if (node.contains("target_hex")) {
        const json& v = node["target_hex"];
        if (!v.is_string()) throw ConfigError(path + ".target_hex: expected hex string");
        std::string text = v.get<std::string>();
        if (text.empty() || text.size() > 64) throw ConfigError(path + ".target_hex: bad length");
        U256 value = 0;
        for (char ch : text) {
            int digit;
            if (ch >= '0' && ch <= '9') digit = ch - '0';
            else if (ch >= 'a' && ch <= 'f') digit = 10 + ch - 'a';
            else if (ch >= 'A' && ch <= 'F') digit = 10 + ch - 'A';
            else throw ConfigError(path + ".target_hex: invalid hex digit");
            value = (value << 4) | digit;
        }
        return value;
    }
    std::int64_t shift = opt_int(node, "target_shift", 255, path);
    if (shift < 1 || shift > 255) throw ConfigError(path + ".target_shift: out of [1, 255]");
    return U256(1) << static_cast<unsigned>(shift);
}

}  // namespace detail

inline Scenario load_scenario(const std::string& text) {
    using nlohmann::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("scenario: top level must be an object");

    Scenario sc;
    sc.name = detail::opt_str(root, "name", "scenario", "scenario");
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned() && !root["seed"].is_number_integer())
            throw ConfigError("scenario.seed: expected unsigned integer");
        sc.seed = root["seed"].get<std::uint64_t>();
    }
    sc.duration_s = detail::opt_int(root, "duration_s", 3600, "scenario");
    if (sc.duration_s <= 0) throw ConfigError("scenario.duration_s: must be positive");

    const json& chains = detail::need(root, "chains", "scenario");
    if (!chains.is_array() || chains.empty()) throw ConfigError("scenario.chains: expected non-empty array");
    std::set<std::string> chain_ids;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        std::string path = "scenario.chains[" + std::to_string(i) + "]";
        const json& node = chains[i];
        ChainConfig cfg;
        cfg.chain_id = detail::need_str(node, "chain_id", path);
        cfg.block_interval_s = detail::opt_int(node, "block_interval_s", 10, path);
        cfg.confirmation_depth = static_cast<int>(detail::opt_int(node, "confirmation_depth", 6, path));
        cfg.decimals = static_cast<int>(detail::opt_int(node, "decimals", 8, path));
        if (node.contains("initial_balances")) {
            const json& balances = node["initial_balances"];
            if (!balances.is_object()) throw ConfigError(path + ".initial_balances: expected object");
            for (auto it = balances.begin(); it != balances.end(); ++it) {
                if (!it.value().is_number_integer())
                    throw ConfigError(path + ".initial_balances." + it.key() + ": expected integer");
                cfg.initial_balances[it.key()] = it.value().get<Amount>();
            }
        }
        if (!chain_ids.insert(cfg.chain_id).second)
            throw ConfigError(path + ".chain_id: duplicate chain " + cfg.chain_id);
        bool is_ether = node.value("is_ether", false);
        if (is_ether) {
            if (!sc.ether_chain.empty()) throw ConfigError(path + ".is_ether: second ether chain");
            sc.ether_chain = cfg.chain_id;
            if (!node.contains("confirmation_depth")) cfg.confirmation_depth = 1;
        }
        try {
            cfg.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(path + ": " + e.what());
        }
        sc.chains.push_back(std::move(cfg));
    }
    if (sc.ether_chain.empty()) throw ConfigError("scenario.chains: exactly one chain must set is_ether");

    auto account_on_chain = [&](const std::string& account, const std::string& chain_id) {
        for (const auto& c : sc.chains) {
            if (c.chain_id == chain_id) return c.initial_balances.count(account) > 0;
        }
        return false;
    };

    if (root.contains("intermediaries")) {
        const json& list = root["intermediaries"];
        if (!list.is_array()) throw ConfigError("scenario.intermediaries: expected array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            std::string path = "scenario.intermediaries[" + std::to_string(i) + "]";
            const json& node = list[i];
            IntermediaryRecord rec;
            rec.id = detail::need_str(node, "id", path);
            rec.eth_address = detail::need_str(node, "eth_address", path);
            if (!account_on_chain(rec.eth_address, sc.ether_chain))
                throw ConfigError(path + ".eth_address: account " + rec.eth_address +
                                  " not present in chain " + sc.ether_chain + " initial_balances");
            if (node.contains("coin_addresses")) {
                const json& addrs = node["coin_addresses"];
                if (!addrs.is_object()) throw ConfigError(path + ".coin_addresses: expected object");
                for (auto it = addrs.begin(); it != addrs.end(); ++it) {
                    if (!it.value().is_string())
                        throw ConfigError(path + ".coin_addresses." + it.key() + ": expected string");
                    if (!chain_ids.count(it.key()))
                        throw ConfigError(path + ".coin_addresses." + it.key() + ": unknown chain");
                    std::string account = it.value().get<std::string>();
                    if (!account_on_chain(account, it.key()))
                        throw ConfigError(path + ".coin_addresses." + it.key() + ": account " + account +
                                          " not present in chain initial_balances");
                    rec.coin_addresses[it.key()] = account;
                }
            }
            if (node.contains("pairs")) {
                const json& pairs = node["pairs"];
                if (!pairs.is_array()) throw ConfigError(path + ".pairs: expected array");
                for (std::size_t j = 0; j < pairs.size(); ++j) {
                    std::string ppath = path + ".pairs[" + std::to_string(j) + "]";
                    const json& pnode = pairs[j];
                    std::string in = detail::need_str(pnode, "asset_in", ppath);
                    std::string out = detail::need_str(pnode, "asset_out", ppath);
                    if (!chain_ids.count(in)) throw ConfigError(ppath + ".asset_in: unknown chain " + in);
                    if (!chain_ids.count(out)) throw ConfigError(ppath + ".asset_out: unknown chain " + out);
                    Rat rate = detail::need_rate(pnode, "rate", ppath);
                    if (rate <= 0) throw ConfigError(ppath + ".rate: must be > 0");
                    rec.rates[{in, out}] = rate;
                }
            }
            rec.validation_successes = static_cast<int>(detail::opt_int(node, "validation_successes", 0, path));
            sc.intermediaries.push_back(std::move(rec));
        }
    }

    auto known_intermediary = [&](const std::string& id) {
        for (const auto& rec : sc.intermediaries) {
            if (rec.id == id) return true;
        }
        return false;
    };

    if (root.contains("trades")) {
        const json& list = root["trades"];
        if (!list.is_array()) throw ConfigError("scenario.trades: expected array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            std::string path = "scenario.trades[" + std::to_string(i) + "]";
            const json& node = list[i];
            TradeIntent intent;
            intent.payer = detail::need_str(node, "payer", path);
            intent.payer_eth = detail::need_str(node, "payer_eth", path);
            intent.payer_coin = detail::need_str(node, "payer_coin", path);
            intent.payee = detail::need_str(node, "payee", path);
            intent.payee_eth = detail::need_str(node, "payee_eth", path);
            intent.payee_coin = detail::need_str(node, "payee_coin", path);
            intent.asset_in = detail::need_str(node, "asset_in", path);
            intent.asset_out = detail::need_str(node, "asset_out", path);
            intent.amount = detail::need_int(node, "amount", path);
            intent.c1 = detail::need_str(node, "c1", path);
            intent.c2 = detail::need_str(node, "c2", path);
            if (intent.amount <= 0) throw ConfigError(path + ".amount: must be positive");
            if (!chain_ids.count(intent.asset_in)) throw ConfigError(path + ".asset_in: unknown chain");
            if (!chain_ids.count(intent.asset_out)) throw ConfigError(path + ".asset_out: unknown chain");
            if (!account_on_chain(intent.payer_coin, intent.asset_in))
                throw ConfigError(path + ".payer_coin: account " + intent.payer_coin +
                                  " not present in chain " + intent.asset_in + " initial_balances");
            if (!account_on_chain(intent.payee_coin, intent.asset_out))
                throw ConfigError(path + ".payee_coin: account " + intent.payee_coin +
                                  " not present in chain " + intent.asset_out + " initial_balances");
            if (!account_on_chain(intent.payer_eth, sc.ether_chain))
                throw ConfigError(path + ".payer_eth: account not on ether chain");
            if (!account_on_chain(intent.payee_eth, sc.ether_chain))
                throw ConfigError(path + ".payee_eth: account not on ether chain");
            if (!known_intermediary(intent.c1)) throw ConfigError(path + ".c1: unknown intermediary " + intent.c1);
            if (!known_intermediary(intent.c2)) throw ConfigError(path + ".c2: unknown intermediary " + intent.c2);
            sc.trades.push_back(std::move(intent));
        }
    }

    if (root.contains("committee")) {
        const json& node = root["committee"];
        if (!node.is_object()) throw ConfigError("scenario.committee: expected object");
        sc.pow.target = detail::parse_target(node, "scenario.committee");
        sc.pow.epoch_length_s = detail::opt_int(node, "epoch_length_s", 600, "scenario.committee");
        sc.pow.committee_cap = static_cast<int>(detail::opt_int(node, "committee_cap", 10, "scenario.committee"));
        sc.pow.retarget_clamp = static_cast<int>(detail::opt_int(node, "retarget_clamp", 4, "scenario.committee"));
        sc.pow.stake_min = detail::opt_int(node, "stake_min", 1, "scenario.committee");
        sc.threshold_a = static_cast<int>(detail::opt_int(node, "threshold_a", -1, "scenario.committee"));
        try {
            sc.pow.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("scenario.committee: ") + e.what());
        }
    }
    if (sc.threshold_a < 0) sc.threshold_a = sc.pow.committee_cap / 2;
    if (sc.threshold_a >= sc.pow.committee_cap)
        throw ConfigError("scenario.committee.threshold_a: must be < committee_cap");

    if (root.contains("session")) {
        const json& node = root["session"];
        if (!node.is_object()) throw ConfigError("scenario.session: expected object");
        sc.session.intent_cap = static_cast<int>(detail::opt_int(node, "intent_cap", 10, "scenario.session"));
        sc.session.fee_bps = detail::opt_int(node, "fee_bps", 0, "scenario.session");
        sc.session.collect_window_s = detail::opt_int(node, "collect_window_s", 600, "scenario.session");
        sc.session.select_window_s = detail::opt_int(node, "select_window_s", 3600, "scenario.session");
        sc.session.deposit_window_s = detail::opt_int(node, "deposit_window_s", 3600, "scenario.session");
        sc.session.payer_window_s = detail::opt_int(node, "payer_window_s", 3600, "scenario.session");
        sc.session.payee_window_s = detail::opt_int(node, "payee_window_s", 3600, "scenario.session");
        try {
            sc.session.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("scenario.session: ") + e.what());
        }
    }

    if (root.contains("gas_table")) {
        const json& node = root["gas_table"];
        if (!node.is_object()) throw ConfigError("scenario.gas_table: expected object");
        for (auto it = node.begin(); it != node.end(); ++it) {
            if (!default_gas_table().count(it.key()))
                throw ConfigError("scenario.gas_table." + it.key() + ": unknown operation");
            if (!it.value().is_number_integer())
                throw ConfigError("scenario.gas_table." + it.key() + ": expected integer");
            sc.gas_overrides[it.key()] = it.value().get<std::int64_t>();
        }
    }

    std::set<std::string> actor_ids;
    if (root.contains("actors")) {
        const json& list = root["actors"];
        if (!list.is_array()) throw ConfigError("scenario.actors: expected array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            std::string path = "scenario.actors[" + std::to_string(i) + "]";
            const json& node = list[i];
            ActorSpec actor;
            actor.id = detail::need_str(node, "id", path);
            if (!actor_ids.insert(actor.id).second)
                throw ConfigError(path + ".id: duplicate actor " + actor.id);
            std::string kind = detail::need_str(node, "behavior", path);
            auto parsed = behavior_from_name(kind);
            if (!parsed) throw ConfigError(path + ".behavior: unknown kind '" + kind + "'");
            actor.kind = *parsed;
            const json empty = json::object();
            const json& params = node.contains("params") ? node["params"] : empty;
            if (!params.is_object()) throw ConfigError(path + ".params: expected object");
            std::string ppath = path + ".params";
            switch (actor.kind) {
                case BehaviorKind::HonestPayer:
                case BehaviorKind::FalseClaimPayer:
                    actor.split = static_cast<int>(detail::opt_int(params, "split", 1, ppath));
                    if (actor.split < 1) throw ConfigError(ppath + ".split: must be >= 1");
                    break;
                case BehaviorKind::DoubleSpendPayer:
                    actor.reorg_depth = static_cast<int>(detail::need_int(params, "reorg_depth", ppath));
                    if (actor.reorg_depth < 1) throw ConfigError(ppath + ".reorg_depth: must be >= 1");
                    actor.divert_to = detail::opt_str(params, "divert_to", "", ppath);
                    break;
                case BehaviorKind::HonestPayee:
                case BehaviorKind::FalseDenialPayee:
                    break;
                case BehaviorKind::HonestIntermediary:
                case BehaviorKind::AbscondingIntermediary:
                    actor.min_amount = detail::opt_int(params, "min_amount", 1, ppath);
                    if (actor.min_amount < 0) throw ConfigError(ppath + ".min_amount: must be >= 0");
                    actor.abscond_at = detail::opt_str(params, "abscond_at", "payout", ppath);
                    if (actor.abscond_at != "select" && actor.abscond_at != "deposit" &&
                        actor.abscond_at != "payout")
                        throw ConfigError(ppath + ".abscond_at: expected select|deposit|payout");
                    if (!known_intermediary(actor.id))
                        throw ConfigError(path + ".id: no intermediary record for " + actor.id);
                    break;
                case BehaviorKind::HonestValidator:
                case BehaviorKind::ByzantineValidator:
                    actor.hash_rate = detail::opt_num(params, "hash_rate", 1.0, ppath);
                    if (actor.hash_rate <= 0) throw ConfigError(ppath + ".hash_rate: must be > 0");
                    actor.stake = detail::opt_int(params, "stake", 0, ppath);
                    if (actor.stake < 0) throw ConfigError(ppath + ".stake: must be >= 0");
                    actor.lie_probability = detail::opt_num(params, "lie_probability", 1.0, ppath);
                    if (actor.lie_probability < 0 || actor.lie_probability > 1)
                        throw ConfigError(ppath + ".lie_probability: out of [0, 1]");
                    if (!known_intermediary(actor.id))
                        throw ConfigError(path + ".id: no intermediary record for " + actor.id);
                    break;
                case BehaviorKind::SybilSpawner:
                    actor.spawn_count = static_cast<int>(detail::opt_int(params, "spawn_count", 3, ppath));
                    if (actor.spawn_count < 1) throw ConfigError(ppath + ".spawn_count: must be >= 1");
                    actor.dust_amount = detail::opt_int(params, "dust_amount", 1, ppath);
                    if (actor.dust_amount < 1) throw ConfigError(ppath + ".dust_amount: must be >= 1");
                    break;
            }
            sc.actors.push_back(std::move(actor));
        }
    }

    // Every trade party needs a matching actor of the right family.
    for (std::size_t i = 0; i < sc.trades.size(); ++i) {
        std::string path = "scenario.trades[" + std::to_string(i) + "]";
        auto payer = sc.actor(sc.trades[i].payer);
        if (!payer) throw ConfigError(path + ".payer: no actor named " + sc.trades[i].payer);
        BehaviorKind pk = (*payer)->kind;
        if (pk != BehaviorKind::HonestPayer && pk != BehaviorKind::FalseClaimPayer &&
            pk != BehaviorKind::DoubleSpendPayer)
            throw ConfigError(path + ".payer: actor " + sc.trades[i].payer + " is not a payer behavior");
        auto payee = sc.actor(sc.trades[i].payee);
        if (!payee) throw ConfigError(path + ".payee: no actor named " + sc.trades[i].payee);
        BehaviorKind bk = (*payee)->kind;
        if (bk != BehaviorKind::HonestPayee && bk != BehaviorKind::FalseDenialPayee)
            throw ConfigError(path + ".payee: actor " + sc.trades[i].payee + " is not a payee behavior");
    }

    if (root.contains("updates")) {
        const json& list = root["updates"];
        if (!list.is_array()) throw ConfigError("scenario.updates: expected array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            std::string path = "scenario.updates[" + std::to_string(i) + "]";
            UpdateSpec update;
            update.id = detail::need_str(list[i], "id", path);
            update.at_s = detail::opt_int(list[i], "at_s", 0, path);
            if (!known_intermediary(update.id)) throw ConfigError(path + ".id: unknown intermediary");
            sc.updates.push_back(std::move(update));
        }
    }

    sc.fault = detail::opt_str(root, "fault", "", "scenario");

    return sc;
}

}  // namespace xchx

#endif  // XCHX_SCENARIO_HPP
