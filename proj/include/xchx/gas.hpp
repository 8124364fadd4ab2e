// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_GAS_HPP
#define XCHX_GAS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xchx/common.hpp"

namespace xchx {

/// Measured cost of each contract entry point, in gas units.
inline const std::map<std::string, std::int64_t>& default_gas_table() {
    static const std::map<std::string, std::int64_t> table = {
        {"Deploy", 3690283},       {"IC.Register", 181591}, {"IC.Update", 80995},
        {"IC.Verify_PoW", 191737}, {"TC.Prepare", 398525},  {"TC.Deposit", 36452},
        {"TC.Validation", 163780},
    };
    return table;
}

struct GasCharge {
    std::string caller;
    std::string op;
    std::int64_t gas;
};

class GasLedger {
public:
    using ChargeHook = std::function<void(const GasCharge&)>;

    GasLedger() : table_(default_gas_table()) {}

    /// Apply a {op -> gas} override map. Unknown operation names are refused
    /// so a typo cannot silently zero a cost.
    void apply_overrides(const std::map<std::string, std::int64_t>& overrides) {
        for (const auto& [op, gas] : overrides) {
            if (!table_.count(op)) throw ConfigError("gas_table: unknown operation " + op);
            if (gas < 0) throw ConfigError("gas_table: negative gas for " + op);
            table_[op] = gas;
        }
    }

    void set_pricing(Rat gas_price_ether, Rat usd_per_ether) {
        gas_price_ = std::move(gas_price_ether);
        usd_per_ether_ = std::move(usd_per_ether);
    }

    void set_hook(ChargeHook hook) { hook_ = std::move(hook); }

    std::int64_t cost_of(const std::string& op) const {
        auto it = table_.find(op);
        if (it == table_.end()) throw ConfigError("gas_table: unknown operation " + op);
        return it->second;
    }

    void charge(const std::string& caller, const std::string& op) {
        GasCharge entry{caller, op, cost_of(op)};
        charges_.push_back(entry);
        if (hook_) hook_(entry);
    }

    const std::vector<GasCharge>& charges() const { return charges_; }
    const std::map<std::string, std::int64_t>& table() const { return table_; }
    const Rat& gas_price() const { return gas_price_; }
    const Rat& usd_per_ether() const { return usd_per_ether_; }

    Rat usd_of_gas(std::int64_t gas) const { return Rat(gas) * gas_price_ * usd_per_ether_; }

    struct ReportRow {
        std::string caller;
        std::string op;
        std::int64_t gas;
        Rat usd;
    };

    std::vector<ReportRow> report(const std::optional<std::string>& caller_filter = std::nullopt) const {
        std::vector<ReportRow> rows;
        for (const auto& charge : charges_) {
            if (caller_filter && charge.caller != *caller_filter) continue;
            rows.push_back({charge.caller, charge.op, charge.gas, usd_of_gas(charge.gas)});
        }
        return rows;
    }

    std::map<std::string, std::int64_t> totals_by_op() const {
        std::map<std::string, std::int64_t> totals;
        for (const auto& charge : charges_) totals[charge.op] += charge.gas;
        return totals;
    }

    std::map<std::string, std::int64_t> counts_by_op() const {
        std::map<std::string, std::int64_t> counts;
        for (const auto& charge : charges_) counts[charge.op] += 1;
        return counts;
    }

    std::map<std::string, std::int64_t> totals_by_caller() const {
        std::map<std::string, std::int64_t> totals;
        for (const auto& charge : charges_) totals[charge.caller] += charge.gas;
        return totals;
    }

    std::int64_t total_gas() const {
        std::int64_t total = 0;
        for (const auto& charge : charges_) total += charge.gas;
        return total;
    }

private:
    std::map<std::string, std::int64_t> table_;
    Rat gas_price_ = Rat(3, 1000000000);  // 0.000000003 ether per gas
    Rat usd_per_ether_ = 130;
    std::vector<GasCharge> charges_;
    ChargeHook hook_;
};

}  // namespace xchx

#endif  // XCHX_GAS_HPP
