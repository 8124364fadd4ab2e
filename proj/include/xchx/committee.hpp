// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_COMMITTEE_HPP
#define XCHX_COMMITTEE_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xchx/contracts.hpp"
#include "xchx/hash.hpp"
#include "xchx/rng.hpp"

namespace xchx {

struct PowParams {
    U256 target = u256_max() >> 1;  // hash must fall below this
    std::int64_t epoch_length_s = 600;
    int committee_cap = 10;  // w
    int retarget_clamp = 4;
    Amount stake_min = 1;

    void validate() const {
        if (target == 0) throw ConfigError("pow target must be > 0");
        if (epoch_length_s <= 0) throw ConfigError("epoch_length must be > 0");
        if (committee_cap < 3) throw ConfigError("committee_cap must be >= 3");
        if (retarget_clamp < 2) throw ConfigError("retarget_clamp must be >= 2");
        if (stake_min < 1) throw ConfigError("stake_min must be >= 1");
    }
};

inline bool pow_check(std::uint64_t epoch_id, const std::string& candidate, std::uint64_t nonce,
                      const U256& target) {
    return pow_hash(epoch_id, candidate, nonce) < target;
}

/// Search for a winning nonce from an rng-chosen starting point. The zero
/// target admits nothing, so the search short-circuits.
inline std::optional<std::uint64_t> solve_pow(const std::string& candidate, std::uint64_t epoch_id,
                                              Rng& rng, const U256& target,
                                              std::uint64_t max_attempts = 1 << 20) {
    if (target == 0) return std::nullopt;
    std::uint64_t nonce = rng.next_u64();
    for (std::uint64_t i = 0; i < max_attempts; ++i, ++nonce) {
        if (pow_check(epoch_id, candidate, nonce, target)) return nonce;
    }
    return std::nullopt;
}

/// Difficulty update: scale by observed/desired admission interval, clamped
/// to a factor of `retarget_clamp` per epoch. Zero admissions read as an
/// infinitely slow epoch and take the full upward clamp.
inline U256 retarget(const U256& old_target, int admissions, std::int64_t elapsed_s,
                     const PowParams& params) {
    if (elapsed_s <= 0) throw ConfigError("retarget: elapsed must be > 0");
    BigInt old_value(old_target);
    BigInt scaled;
    if (admissions <= 0) {
        scaled = old_value * params.retarget_clamp;
    } else {
        // ratio = (elapsed / admissions) / (epoch_length / cap)
        scaled = old_value * elapsed_s * params.committee_cap / (BigInt(admissions) * params.epoch_length_s);
        BigInt lo = old_value / params.retarget_clamp;
        BigInt hi = old_value * params.retarget_clamp;
        scaled = std::max(lo, std::min(hi, scaled));
    }
    if (scaled < 1) scaled = 1;
    BigInt max_value(u256_max());
    if (scaled > max_value) scaled = max_value;
    return U256(scaled);
}

struct TallyOutcome {
    bool finalized = false;
    Verdict verdict = Verdict::Failed;
    std::vector<std::string> dissenters;
    int confirm_votes = 0;
    int fail_votes = 0;
};

struct StakePayout {
    std::string member;
    Amount amount = 0;
};

/// One epoch's PoW-elected validator set: admission, voting, majority-rule
/// finalization, and slashing of dissenting members.
class CommitteeManager {
public:
    CommitteeManager(PowParams params, int threshold_a, Ledger& ether, GasLedger& gas,
                     IntermediaryRegistry& registry, Account stake_escrow, Account treasury)
        : params_(params),
          threshold_a_(threshold_a),
          ether_(ether),
          gas_(gas),
          registry_(registry),
          stake_escrow_(std::move(stake_escrow)),
          treasury_(std::move(treasury)) {
        params_.validate();
        if (threshold_a_ < 0) throw ConfigError("threshold_a must be >= 0");
    }

    std::uint64_t epoch_id() const { return epoch_id_; }
    bool epoch_open() const { return epoch_open_; }
    const U256& target() const { return params_.target; }
    const PowParams& params() const { return params_; }
    int threshold_a() const { return threshold_a_; }
    const std::vector<std::string>& members() const { return members_; }
    int admissions_this_epoch() const { return admissions_; }

    bool is_member(const std::string& id) const {
        return std::find(members_.begin(), members_.end(), id) != members_.end();
    }

    Amount stake_of(const std::string& id) const {
        auto it = stakes_.find(id);
        return it == stakes_.end() ? 0 : it->second;
    }

    void open_epoch(std::int64_t now_ms) {
        if (epoch_open_) throw InvariantViolation("epoch already open");
        if (started_) epoch_id_ += 1;
        started_ = true;
        epoch_open_ = true;
        epoch_start_ms_ = now_ms;
        admissions_ = 0;
        // Unfinalized items carry over: the fresh committee re-votes them.
        for (auto& [ref, ctl] : items_) {
            if (!ctl.finalized) {
                ctl.epoch = epoch_id_;
                ctl.votes.clear();
            }
        }
    }

    struct CloseReport {
        std::vector<StakePayout> stake_returns;
        int admissions = 0;
        std::int64_t elapsed_s = 0;
        U256 new_target;
    };

    /// Return the surviving members' stakes and retarget for the next epoch.
    CloseReport close_epoch(std::int64_t now_ms) {
        if (!epoch_open_) throw InvariantViolation("no epoch open");
        CloseReport report;
        report.admissions = admissions_;
        report.elapsed_s = std::max<std::int64_t>(1, (now_ms - epoch_start_ms_) / 1000);
        for (const auto& member : members_) {
            Amount stake = stakes_[member];
            if (stake > 0) move_stake(stake_escrow_, registry_.record(member).eth_address, stake);
            report.stake_returns.push_back({member, stake});
        }
        members_.clear();
        stakes_.clear();
        params_.target = retarget(params_.target, report.admissions, report.elapsed_s, params_);
        report.new_target = params_.target;
        epoch_open_ = false;
        return report;
    }

    /// IC.Verify_PoW: hash check, capacity check, stake escrow. Gas falls due
    /// once the contract actually verifies a solution, valid or not.
    Outcome<void> verify_pow(const std::string& candidate, std::uint64_t epoch_id, std::uint64_t nonce,
                             Amount stake, std::int64_t) {
        if (!epoch_open_ || epoch_id != epoch_id_) return Outcome<void>::rejected("epoch not open");
        if (!registry_.known(candidate)) return Outcome<void>::rejected("candidate not registered");
        if (registry_.suspended(candidate)) return Outcome<void>::rejected("candidate suspended");
        if (is_member(candidate)) return Outcome<void>::rejected("already a member");
        if (stake < params_.stake_min) return Outcome<void>::rejected("insufficient stake");
        if (!pow_check(epoch_id, candidate, nonce, params_.target)) {
            gas_.charge(candidate, "IC.Verify_PoW");
            return Outcome<void>::rejected("invalid nonce");
        }
        if (static_cast<int>(members_.size()) >= params_.committee_cap)
            return Outcome<void>::rejected("committee full");
        Transfer t;
        t.from = registry_.record(candidate).eth_address;
        t.to = stake_escrow_;
        t.amount = stake;
        t.nonce = ether_.next_nonce(t.from);
        auto escrowed = ether_.submit(std::move(t));
        if (!escrowed) return Outcome<void>::rejected("stake escrow failed: " + escrowed.reason());
        members_.push_back(candidate);
        stakes_[candidate] = stake;
        admissions_ += 1;
        gas_.charge(candidate, "IC.Verify_PoW");
        if (epoch_id_ == 0) registry_.mark_genesis(candidate);
        return Outcome<void>::accepted();
    }

    void assign_item(const std::string& ref, std::set<std::string> excluded_voters, std::int64_t deadline_ms) {
        ItemCtl ctl;
        ctl.epoch = epoch_id_;
        ctl.excluded = std::move(excluded_voters);
        ctl.deadline_ms = deadline_ms;
        items_[ref] = std::move(ctl);
    }

    bool item_open(const std::string& ref) const {
        auto it = items_.find(ref);
        return it != items_.end() && !it->second.finalized;
    }

    std::vector<std::string> open_item_refs() const {
        std::vector<std::string> refs;
        for (const auto& [ref, ctl] : items_) {
            if (!ctl.finalized) refs.push_back(ref);
        }
        return refs;
    }

    bool has_voted(const std::string& member, const std::string& ref) const {
        auto it = items_.find(ref);
        if (it == items_.end()) return false;
        for (const auto& [voter, verdict] : it->second.votes) {
            if (voter == member) return true;
        }
        return false;
    }

    bool may_vote(const std::string& member, const std::string& ref) const {
        auto it = items_.find(ref);
        if (it == items_.end() || it->second.finalized) return false;
        if (it->second.epoch != epoch_id_ || !epoch_open_) return false;
        if (!is_member(member)) return false;
        if (it->second.excluded.count(member)) return false;
        return !has_voted(member, ref);
    }

    Outcome<void> submit_vote(const std::string& member, const std::string& ref, Verdict verdict) {
        auto it = items_.find(ref);
        if (it == items_.end()) return Outcome<void>::rejected("unknown item " + ref);
        if (it->second.finalized) return Outcome<void>::rejected("item already finalized");
        if (it->second.epoch != epoch_id_ || !epoch_open_)
            return Outcome<void>::rejected("item not assigned to the open epoch");
        if (!is_member(member)) return Outcome<void>::rejected(member + " is not a committee member");
        if (it->second.excluded.count(member))
            return Outcome<void>::rejected(member + " is conflicted on this item");
        if (has_voted(member, ref)) return Outcome<void>::rejected("duplicate vote");
        it->second.votes.push_back({member, verdict});
        gas_.charge(member, "TC.Validation");
        return Outcome<void>::accepted();
    }

    /// All eligible members voted, or the deadline passed with at least one.
    bool ready_to_tally(const std::string& ref, std::int64_t now_ms) const {
        auto it = items_.find(ref);
        if (it == items_.end() || it->second.finalized) return false;
        if (it->second.epoch != epoch_id_ || !epoch_open_) return false;
        std::size_t votes = current_votes(it->second).size();
        if (now_ms >= it->second.deadline_ms && votes >= 1) return true;
        std::size_t eligible = 0;
        for (const auto& member : members_) {
            if (!it->second.excluded.count(member)) ++eligible;
        }
        return eligible > 0 && votes == eligible;
    }

    /// Majority rule: the verdict with strictly more votes wins, provided its
    /// count exceeds threshold_a. Anything else escalates to the next epoch.
    TallyOutcome tally(const std::string& ref) {
        auto it = items_.find(ref);
        if (it == items_.end() || it->second.finalized)
            throw InvariantViolation("tally on unknown or finalized item " + ref);
        TallyOutcome outcome;
        auto votes = current_votes(it->second);
        for (const auto& [member, verdict] : votes) {
            (verdict == Verdict::Confirmed ? outcome.confirm_votes : outcome.fail_votes) += 1;
        }
        std::optional<Verdict> winner;
        if (outcome.confirm_votes > outcome.fail_votes && outcome.confirm_votes > threshold_a_)
            winner = Verdict::Confirmed;
        else if (outcome.fail_votes > outcome.confirm_votes && outcome.fail_votes > threshold_a_)
            winner = Verdict::Failed;
        if (!winner) {
            // Tie or no quorum: clear and re-vote next epoch rather than
            // letting abstention force a default verdict.
            it->second.votes.clear();
            it->second.epoch = epoch_id_ + 1;
            return outcome;
        }
        outcome.finalized = true;
        outcome.verdict = *winner;
        for (const auto& [member, verdict] : votes) {
            if (verdict != *winner) outcome.dissenters.push_back(member);
        }
        it->second.finalized = true;
        it->second.final_verdict = *winner;
        return outcome;
    }

    std::optional<Verdict> finalized_verdict(const std::string& ref) const {
        auto it = items_.find(ref);
        if (it == items_.end() || !it->second.finalized) return std::nullopt;
        return it->second.final_verdict;
    }

    struct SlashReport {
        std::vector<StakePayout> slashed;
        std::vector<StakePayout> payouts;
        Amount treasury_residue = 0;
    };

    /// Remove dissenters, split their stakes equally among the survivors
    /// (integer division, remainder to the treasury), and credit everyone
    /// still standing with a validation success.
    SlashReport slash_and_distribute(const std::vector<std::string>& dissenters) {
        SlashReport report;
        Amount pot = 0;
        for (const auto& member : dissenters) {
            auto pos = std::find(members_.begin(), members_.end(), member);
            if (pos == members_.end()) throw InvariantViolation("slashing a non-member: " + member);
            pot += stakes_[member];
            report.slashed.push_back({member, stakes_[member]});
            members_.erase(pos);
            stakes_.erase(member);
            registry_.suspend(member);
        }
        if (members_.empty()) {
            if (pot > 0) {
                move_stake(stake_escrow_, treasury_, pot);
                report.treasury_residue = pot;
            }
            return report;
        }
        Amount share = pot / static_cast<Amount>(members_.size());
        Amount residue = pot % static_cast<Amount>(members_.size());
        for (const auto& member : members_) {
            if (share > 0) {
                move_stake(stake_escrow_, registry_.record(member).eth_address, share);
                report.payouts.push_back({member, share});
            }
            registry_.credit_success(member);
        }
        if (residue > 0) {
            move_stake(stake_escrow_, treasury_, residue);
            report.treasury_residue = residue;
        }
        return report;
    }

private:
    struct ItemCtl {
        std::uint64_t epoch = 0;
        std::set<std::string> excluded;
        std::int64_t deadline_ms = 0;
        std::vector<std::pair<std::string, Verdict>> votes;
        bool finalized = false;
        Verdict final_verdict = Verdict::Failed;
    };

    /// Votes cast by members still on the committee; a slashed member's
    /// earlier votes on open items stop counting.
    std::vector<std::pair<std::string, Verdict>> current_votes(const ItemCtl& ctl) const {
        std::vector<std::pair<std::string, Verdict>> votes;
        for (const auto& vote : ctl.votes) {
            if (is_member(vote.first)) votes.push_back(vote);
        }
        return votes;
    }

    void move_stake(const Account& from, const Account& to, Amount amount) {
        Transfer t;
        t.from = from;
        t.to = to;
        t.amount = amount;
        t.nonce = ether_.next_nonce(from);
        auto moved = ether_.submit(std::move(t));
        if (!moved) throw InvariantViolation("stake movement failed: " + moved.reason());
    }

    PowParams params_;
    int threshold_a_;
    Ledger& ether_;
    GasLedger& gas_;
    IntermediaryRegistry& registry_;
    Account stake_escrow_;
    Account treasury_;

    std::uint64_t epoch_id_ = 0;
    bool started_ = false;
    bool epoch_open_ = false;
    std::int64_t epoch_start_ms_ = 0;
    int admissions_ = 0;
    std::vector<std::string> members_;
    std::map<std::string, Amount> stakes_;
    std::map<std::string, ItemCtl> items_;
};

}  // namespace xchx

#endif  // XCHX_COMMITTEE_HPP
