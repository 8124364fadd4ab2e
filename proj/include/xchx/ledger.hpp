// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_LEDGER_HPP
#define XCHX_LEDGER_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xchx/common.hpp"

namespace xchx {

struct ChainConfig {
    std::string chain_id;
    std::int64_t block_interval_s = 10;  // simulated seconds per block
    int confirmation_depth = 6;          // k: blocks including the transfer's own
    int decimals = 8;                    // scale of the smallest unit, metadata only
    std::map<Account, Amount> initial_balances;

    void validate() const {
        if (chain_id.empty()) throw ConfigError("chain_id must be non-empty");
        if (block_interval_s <= 0) throw ConfigError(chain_id + ": block_interval must be > 0");
        if (confirmation_depth < 1) throw ConfigError(chain_id + ": confirmation_depth must be >= 1");
        for (const auto& [account, amount] : initial_balances) {
            if (amount < 0) throw ConfigError(chain_id + ": negative initial balance for " + account);
        }
    }
};

struct Transfer {
    TxId tx_id;
    Account from;
    Account to;
    Amount amount = 0;
    std::uint64_t nonce = 0;
};

struct Block {
    std::uint64_t height = 0;
    std::vector<Transfer> transfers;
};

// Account-based single-chain ledger. Reorgs are explicit, adversary-invoked
// events; dropped transfers do not re-enter the pending pool.
class Ledger {
public:
    explicit Ledger(ChainConfig config) : config_(std::move(config)) {
        config_.validate();
        balances_ = config_.initial_balances;
        for (const auto& [account, amount] : balances_) total_supply_ += amount;
        chain_.push_back(Block{});  // genesis, height 0, no transfers
    }

    const ChainConfig& config() const { return config_; }
    std::uint64_t height() const { return chain_.back().height; }
    const std::vector<Block>& chain() const { return chain_; }
    const std::vector<Transfer>& pending() const { return pending_; }
    const std::set<TxId>& dropped() const { return dropped_; }
    Amount total_supply() const { return total_supply_; }

    Amount balance(const Account& account) const {
        auto it = balances_.find(account);
        return it == balances_.end() ? 0 : it->second;
    }

    /// Confirmed balance minus pending outflow: what a sender can still commit.
    Amount spendable(const Account& account) const {
        Amount out = 0;
        for (const auto& t : pending_) {
            if (t.from == account) out += t.amount;
        }
        return balance(account) - out;
    }

    /// Next per-sender sequence number across included and pending transfers.
    std::uint64_t next_nonce(const Account& account) const {
        std::uint64_t next = 0;
        auto it = included_nonce_.find(account);
        if (it != included_nonce_.end()) next = it->second + 1;
        for (const auto& t : pending_) {
            if (t.from == account && t.nonce >= next) next = t.nonce + 1;
        }
        return next;
    }

    Outcome<TxId> submit(Transfer t) {
        if (t.amount <= 0) return Outcome<TxId>::rejected("amount must be positive");
        if (t.tx_id.empty()) t.tx_id = config_.chain_id + "-tx" + std::to_string(tx_counter_++);
        if (known_tx(t.tx_id)) return Outcome<TxId>::rejected("duplicate tx_id " + t.tx_id);
        if (t.nonce != next_nonce(t.from))
            return Outcome<TxId>::rejected("stale or out-of-order nonce for " + t.from);
        if (spendable(t.from) < t.amount)
            return Outcome<TxId>::rejected("insufficient spendable balance for " + t.from);
        TxId id = t.tx_id;
        pending_.push_back(std::move(t));
        return Outcome<TxId>::accepted(id);
    }

    /// Include every balance-valid pending transfer, per-sender nonce order
    /// preserved. Transfers a reorg invalidated stay pending.
    const Block& mine() {
        Block block;
        block.height = height() + 1;
        std::vector<Transfer> remaining;
        bool progress = true;
        while (progress) {
            progress = false;
            std::vector<Transfer> still;
            for (auto& t : pending_) {
                bool nonce_ok = next_included_nonce(t.from) == t.nonce;
                if (nonce_ok && balance(t.from) >= t.amount) {
                    apply(t);
                    block.transfers.push_back(t);
                    progress = true;
                } else {
                    still.push_back(std::move(t));
                }
            }
            pending_ = std::move(still);
        }
        chain_.push_back(std::move(block));
        check_conservation();
        return chain_.back();
    }

    /// Replace the top `depth` blocks with `depth` new ones whose first block
    /// carries `replacement`. Rejected wholesale if any replacement transfer
    /// is invalid against the rewound state; the ledger is left untouched.
    Outcome<void> reorg(std::uint64_t depth, std::vector<Transfer> replacement) {
        if (depth < 1) return Outcome<void>::rejected("reorg depth must be >= 1");
        if (depth > height()) return Outcome<void>::rejected("reorg depth exceeds chain height");

        // Dry-run the replacement against the rewound state.
        std::map<Account, Amount> trial_balances = config_.initial_balances;
        std::map<Account, std::uint64_t> trial_nonce;
        std::set<TxId> trial_ids;
        std::size_t keep = chain_.size() - depth;
        for (std::size_t i = 0; i < keep; ++i) {
            for (const auto& t : chain_[i].transfers) {
                trial_balances[t.from] -= t.amount;
                trial_balances[t.to] += t.amount;
                trial_nonce[t.from] = t.nonce + 1;
                trial_ids.insert(t.tx_id);
            }
        }
        for (const auto& t : replacement) {
            if (t.amount <= 0) return Outcome<void>::rejected("replacement amount must be positive");
            if (trial_ids.count(t.tx_id)) return Outcome<void>::rejected("replacement duplicates tx " + t.tx_id);
            auto nit = trial_nonce.find(t.from);
            std::uint64_t expect = nit == trial_nonce.end() ? 0 : nit->second;
            if (t.nonce != expect) return Outcome<void>::rejected("replacement nonce invalid for " + t.from);
            if (trial_balances[t.from] < t.amount)
                return Outcome<void>::rejected("replacement overdraws " + t.from);
            trial_balances[t.from] -= t.amount;
            trial_balances[t.to] += t.amount;
            trial_nonce[t.from] = t.nonce + 1;
            trial_ids.insert(t.tx_id);
        }

        // Commit: rewind, then mine `depth` blocks, replacements in the first.
        std::set<TxId> replaced_ids;
        for (const auto& t : replacement) replaced_ids.insert(t.tx_id);
        for (std::size_t i = keep; i < chain_.size(); ++i) {
            for (const auto& t : chain_[i].transfers) {
                if (!replaced_ids.count(t.tx_id)) dropped_.insert(t.tx_id);
            }
        }
        chain_.resize(keep);
        std::uint64_t next_height = chain_.back().height + 1;
        Block first;
        first.height = next_height;
        first.transfers = std::move(replacement);
        chain_.push_back(std::move(first));
        for (std::uint64_t i = 1; i < depth; ++i) {
            chain_.push_back(Block{next_height + i, {}});
        }
        for (const auto& t : chain_[keep].transfers) dropped_.erase(t.tx_id);
        rebuild_from_chain();
        check_conservation();
        return Outcome<void>::accepted();
    }

    /// Tip height - inclusion height + 1 for canonical transfers; pending,
    /// dropped, and unknown ids all read as "no confirmation".
    std::optional<std::uint64_t> confirmation_depth(const TxId& tx_id) const {
        auto it = inclusion_height_.find(tx_id);
        if (it == inclusion_height_.end()) return std::nullopt;
        return height() - it->second + 1;
    }

    /// Sum of confirmed from->to transfers whose depth is at least min_depth.
    Amount confirmed_amount(const Account& from, const Account& to, std::uint64_t min_depth) const {
        Amount sum = 0;
        for (const auto& block : chain_) {
            if (height() - block.height + 1 < min_depth) continue;
            for (const auto& t : block.transfers) {
                if (t.from == from && t.to == to) sum += t.amount;
            }
        }
        return sum;
    }

    Amount balances_sum() const {
        Amount sum = 0;
        for (const auto& [account, amount] : balances_) sum += amount;
        return sum;
    }

private:
    bool known_tx(const TxId& id) const {
        if (inclusion_height_.count(id) || dropped_.count(id)) return true;
        return std::any_of(pending_.begin(), pending_.end(),
                           [&](const Transfer& t) { return t.tx_id == id; });
    }

    std::uint64_t next_included_nonce(const Account& account) const {
        auto it = included_nonce_.find(account);
        return it == included_nonce_.end() ? 0 : it->second + 1;
    }

    void apply(const Transfer& t) {
        balances_[t.from] -= t.amount;
        balances_[t.to] += t.amount;
        included_nonce_[t.from] = t.nonce;
        inclusion_height_[t.tx_id] = height() + 1;  // caller is building block height()+1
    }

    void rebuild_from_chain() {
        balances_ = config_.initial_balances;
        included_nonce_.clear();
        inclusion_height_.clear();
        for (const auto& block : chain_) {
            for (const auto& t : block.transfers) {
                balances_[t.from] -= t.amount;
                balances_[t.to] += t.amount;
                included_nonce_[t.from] = t.nonce;
                inclusion_height_[t.tx_id] = block.height;
            }
        }
    }

    void check_conservation() const {
        if (balances_sum() != total_supply_)
            throw InvariantViolation("ledger conservation violated on " + config_.chain_id);
        for (const auto& [account, amount] : balances_) {
            if (amount < 0) throw InvariantViolation("negative balance on " + config_.chain_id);
        }
    }

    ChainConfig config_;
    std::vector<Block> chain_;
    std::vector<Transfer> pending_;
    std::map<Account, Amount> balances_;
    std::map<Account, std::uint64_t> included_nonce_;  // highest included nonce per sender
    std::map<TxId, std::uint64_t> inclusion_height_;
    std::set<TxId> dropped_;
    Amount total_supply_ = 0;
    std::uint64_t tx_counter_ = 0;
};

}  // namespace xchx

#endif  // XCHX_LEDGER_HPP
