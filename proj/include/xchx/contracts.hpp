// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_CONTRACTS_HPP
#define XCHX_CONTRACTS_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xchx/gas.hpp"
#include "xchx/ledger.hpp"

namespace xchx {

using AssetPair = std::pair<std::string, std::string>;  // (asset_in, asset_out)

struct IntermediaryRecord {
    std::string id;
    Account eth_address;
    std::map<std::string, Account> coin_addresses;  // chain_id -> account
    std::map<AssetPair, Rat> rates;                 // supported pairs carry their rate
    Amount stake = 0;
    int validation_successes = 0;
    bool active = true;
    bool suspended = false;
    bool genesis_member = false;  // admitted to epoch 0; exempt from the prior-success rule

    void validate() const {
        if (id.empty()) throw ConfigError("intermediary id must be non-empty");
        if (eth_address.empty()) throw ConfigError(id + ": eth_address must be non-empty");
        for (const auto& [pair, rate] : rates) {
            if (rate <= 0) throw ConfigError(id + ": rate must be > 0 for " + pair.first + "->" + pair.second);
        }
    }
};

/// The intermediary-registry contract (IC): registration, updates, trade-role
/// eligibility, and suspension of slashed members.
class IntermediaryRegistry {
public:
    explicit IntermediaryRegistry(GasLedger& gas) : gas_(gas) {}

    Outcome<std::string> register_intermediary(IntermediaryRecord record) {
        record.validate();
        if (records_.count(record.id)) return Outcome<std::string>::rejected("duplicate intermediary id " + record.id);
        for (const auto& [id, existing] : records_) {
            if (existing.eth_address == record.eth_address)
                return Outcome<std::string>::rejected("eth address already registered: " + record.eth_address);
        }
        std::string id = record.id;
        records_.emplace(id, std::move(record));
        gas_.charge(id, "IC.Register");
        return Outcome<std::string>::accepted(id);
    }

    Outcome<void> update(const std::string& id, const Account& eth_address,
                         std::map<std::string, Account> coin_addresses, std::map<AssetPair, Rat> rates) {
        auto it = records_.find(id);
        if (it == records_.end()) return Outcome<void>::rejected("unknown intermediary " + id);
        for (const auto& [pair, rate] : rates) {
            if (rate <= 0) return Outcome<void>::rejected("rate must be > 0");
        }
        for (const auto& [other_id, existing] : records_) {
            if (other_id != id && existing.eth_address == eth_address)
                return Outcome<void>::rejected("eth address already registered: " + eth_address);
        }
        it->second.eth_address = eth_address;
        it->second.coin_addresses = std::move(coin_addresses);
        it->second.rates = std::move(rates);
        gas_.charge(id, "IC.Update");
        return Outcome<void>::accepted();
    }

    bool known(const std::string& id) const { return records_.count(id) > 0; }

    const IntermediaryRecord& record(const std::string& id) const {
        auto it = records_.find(id);
        if (it == records_.end()) throw ConfigError("unknown intermediary " + id);
        return it->second;
    }

    /// A node may broker a trade only after taking part in at least one
    /// successful validation; epoch-0 (genesis) members are exempt, since
    /// nobody could qualify before the first committee existed.
    bool eligible_for_trade(const std::string& id) const {
        auto it = records_.find(id);
        if (it == records_.end()) return false;
        const auto& r = it->second;
        return r.active && !r.suspended && (r.validation_successes >= 1 || r.genesis_member);
    }

    bool suspended(const std::string& id) const {
        auto it = records_.find(id);
        return it != records_.end() && it->second.suspended;
    }

    void credit_success(const std::string& id) {
        auto it = records_.find(id);
        if (it != records_.end()) it->second.validation_successes += 1;
    }

    void suspend(const std::string& id) {
        auto it = records_.find(id);
        if (it != records_.end()) it->second.suspended = true;
    }

    void mark_genesis(const std::string& id) {
        auto it = records_.find(id);
        if (it != records_.end()) it->second.genesis_member = true;
    }

    std::optional<Rat> rate(const std::string& id, const AssetPair& pair) const {
        auto it = records_.find(id);
        if (it == records_.end()) return std::nullopt;
        auto rit = it->second.rates.find(pair);
        if (rit == it->second.rates.end()) return std::nullopt;
        return rit->second;
    }

private:
    GasLedger& gas_;
    std::map<std::string, IntermediaryRecord> records_;
};

struct TradeIntent {
    std::string payer;
    Account payer_eth;
    Account payer_coin;
    std::string payee;
    Account payee_eth;
    Account payee_coin;
    std::string asset_in;
    std::string asset_out;
    Amount amount = 0;
    std::string c1;
    std::string c2;

    void validate() const {
        if (amount <= 0) throw ConfigError("trade amount must be positive");
        if (payer.empty() || payee.empty()) throw ConfigError("trade parties must be named");
        if (c1.empty() || c2.empty()) throw ConfigError("trade intermediaries must be named");
    }
};

enum class Phase {
    Collecting,
    AwaitSelection,
    AwaitDeposits,
    AwaitPayerTransfers,
    AwaitPayeeTransfers,
    Settled,
    Aborted,
};

inline const char* phase_name(Phase phase) {
    switch (phase) {
        case Phase::Collecting: return "Collecting";
        case Phase::AwaitSelection: return "AwaitSelection";
        case Phase::AwaitDeposits: return "AwaitDeposits";
        case Phase::AwaitPayerTransfers: return "AwaitPayerTransfers";
        case Phase::AwaitPayeeTransfers: return "AwaitPayeeTransfers";
        case Phase::Settled: return "Settled";
        case Phase::Aborted: return "Aborted";
    }
    return "?";
}

enum class Verdict { Confirmed, Failed };

inline const char* verdict_name(Verdict verdict) {
    return verdict == Verdict::Confirmed ? "Confirmed" : "Failed";
}

enum class PartyOutcome { Pending, Confirmed, Failed };

enum class ItemLeg { Payer, Payee };

/// One committee-validated obligation: merged per participant, so the count
/// of validations tracks the number of users, not raw transfer volume.
struct ValidationItem {
    std::string ref;
    std::string session_id;
    ItemLeg leg;
    std::string party;    // payer id or payee id
    std::string chain_id;
    Account from;
    Account to;
    Amount amount = 0;    // obligation in that chain's units
    std::int64_t deadline_ms = 0;
    std::set<std::string> excluded_voters;  // session intermediaries may not self-certify
};

struct EscrowMove {
    Account from;
    Account to;
    Amount amount = 0;
    std::string kind;  // deposit | refund_failed_payer | payee_return | payee_forfeit | forward | abort_refund
};

struct SettlementReport {
    std::vector<EscrowMove> moves;
    Phase terminal = Phase::Settled;
};

struct SessionParams {
    int intent_cap = 10;
    std::int64_t fee_bps = 0;  // deducted from the payee-side coin amount
    std::int64_t collect_window_s = 600;
    std::int64_t select_window_s = 3600;
    std::int64_t deposit_window_s = 3600;
    std::int64_t payer_window_s = 3600;
    std::int64_t payee_window_s = 3600;

    void validate() const {
        if (intent_cap < 1) throw ConfigError("session intent_cap must be >= 1");
        if (fee_bps < 0 || fee_bps > 10000) throw ConfigError("fee_bps out of [0, 10000]");
        if (collect_window_s <= 0 || select_window_s <= 0 || deposit_window_s <= 0 ||
            payer_window_s <= 0 || payee_window_s <= 0)
            throw ConfigError("session windows must be positive");
    }
};

/// The transaction contract (TC) for one trading session. Single-user trades
/// are the n = 1 case of the same machine. All ether escrow movements happen
/// on the ether ledger against a per-contract escrow account.
class TradeSession {
public:
    struct MergedIntent {
        std::string payer;
        Account payer_eth;
        Account payer_coin;
        std::string payee;
        Account payee_eth;
        Account payee_coin;
        Amount amount = 0;        // coin1 units, merged across raw requests
        Amount ether_slice = 0;   // escrow slice, fixed when deposits are sized
        bool excluded = false;    // filtered out at selection, before escrow
        bool failed_in_trade = false;
    };

    TradeSession(std::string session_id, std::string asset_in, std::string asset_out,
                 const IntermediaryRecord& c1, const IntermediaryRecord& c2, Rat rate_in_to_eth,
                 Rat rate_eth_to_out, SessionParams params, std::int64_t now_ms, Ledger& ether,
                 GasLedger& gas, Account escrow_account)
        : session_id_(std::move(session_id)),
          asset_in_(std::move(asset_in)),
          asset_out_(std::move(asset_out)),
          c1_(c1.id),
          c2_(c2.id),
          c1_eth_(c1.eth_address),
          c2_eth_(c2.eth_address),
          rate_in_(std::move(rate_in_to_eth)),
          rate_out_(std::move(rate_eth_to_out)),
          params_(params),
          ether_(ether),
          gas_(gas),
          escrow_account_(std::move(escrow_account)) {
        params_.validate();
        auto c1_coin = c1.coin_addresses.find(asset_in_);
        if (c1_coin == c1.coin_addresses.end())
            throw ConfigError(c1_.empty() ? "c1 missing" : c1_ + " has no address on " + asset_in_);
        auto c2_coin = c2.coin_addresses.find(asset_out_);
        if (c2_coin == c2.coin_addresses.end())
            throw ConfigError(c2_ + " has no address on " + asset_out_);
        c1_coin_ = c1_coin->second;
        c2_coin_ = c2_coin->second;
        phase_deadline_ms_ = now_ms + params_.collect_window_s * 1000;
    }

    const std::string& id() const { return session_id_; }
    Phase phase() const { return phase_; }
    const std::string& asset_in() const { return asset_in_; }
    const std::string& asset_out() const { return asset_out_; }
    const std::string& c1() const { return c1_; }
    const std::string& c2() const { return c2_; }
    Amount total() const { return total_; }
    std::int64_t phase_deadline_ms() const { return phase_deadline_ms_; }
    const std::vector<MergedIntent>& intents() const { return intents_; }
    const std::vector<ValidationItem>& payer_items() const { return payer_items_; }
    const std::vector<ValidationItem>& payee_items() const { return payee_items_; }
    const std::vector<EscrowMove>& escrow_moves() const { return escrow_moves_; }

    /// amount_B: per payee, the coin1-denominated sum over confirmed payers.
    const std::map<std::string, Amount>& amount_b() const { return amount_b_; }

    PartyOutcome payer_outcome(const std::string& payer) const {
        auto it = payer_outcomes_.find(payer);
        return it == payer_outcomes_.end() ? PartyOutcome::Pending : it->second;
    }
    PartyOutcome payee_outcome(const std::string& payee) const {
        auto it = payee_outcomes_.find(payee);
        return it == payee_outcomes_.end() ? PartyOutcome::Pending : it->second;
    }

    /// Coin2 the second intermediary owes a payee, rate-scaled per intent and
    /// floored, minus the configured fee.
    Amount payee_payout(const std::string& payee) const {
        Amount sum = 0;
        for (const auto& intent : intents_) {
            if (intent.payee != payee || intent.excluded || intent.failed_in_trade) continue;
            if (payer_outcome(intent.payer) != PartyOutcome::Confirmed) continue;
            sum += scale_to_coin2(intent.amount);
        }
        return sum;
    }

    Outcome<void> prepare(const TradeIntent& intent, std::int64_t now_ms) {
        if (phase_ != Phase::Collecting) return Outcome<void>::rejected("session not collecting");
        if (intent.amount <= 0) return Outcome<void>::rejected("amount must be positive");
        if (intent.asset_in != asset_in_ || intent.asset_out != asset_out_)
            return Outcome<void>::rejected("asset pair does not match session");
        if (intent.c1 != c1_ || intent.c2 != c2_)
            return Outcome<void>::rejected("chosen intermediaries do not match session");

        auto existing = find_intent(intent.payer, intent.payee);
        if (existing) {
            // Same pair again inside the window: merged into one entry.
            (*existing)->amount += intent.amount;
        } else {
            if (static_cast<int>(intents_.size()) >= params_.intent_cap)
                return Outcome<void>::rejected("session full");
            MergedIntent entry;
            entry.payer = intent.payer;
            entry.payer_eth = intent.payer_eth;
            entry.payer_coin = intent.payer_coin;
            entry.payee = intent.payee;
            entry.payee_eth = intent.payee_eth;
            entry.payee_coin = intent.payee_coin;
            entry.amount = intent.amount;
            intents_.push_back(std::move(entry));
        }
        total_ += intent.amount;
        // Each user pays the preparation cost once, however many requests
        // they fold into the session.
        if (!prepare_charged_.count(intent.payer)) {
            prepare_charged_.insert(intent.payer);
            gas_.charge(intent.payer, "TC.Prepare");
        }
        if (static_cast<int>(intents_.size()) >= params_.intent_cap) begin_selection(now_ms);
        return Outcome<void>::accepted();
    }

    Outcome<void> select(const std::string& intermediary, const std::set<std::pair<std::string, std::string>>& accepted,
                         Amount min_amount, std::int64_t now_ms) {
        if (phase_ != Phase::AwaitSelection) return Outcome<void>::rejected("session not awaiting selection");
        if (intermediary != c1_ && intermediary != c2_)
            return Outcome<void>::rejected(intermediary + " is not a chosen intermediary");
        bool& done = intermediary == c1_ ? c1_selected_ : c2_selected_;
        if (done) return Outcome<void>::rejected("already selected");
        done = true;
        for (auto& intent : intents_) {
            bool keep = accepted.count({intent.payer, intent.payee}) > 0 && intent.amount >= min_amount;
            if (!keep) intent.excluded = true;
        }
        if (c1_selected_ && c2_selected_) finish_selection(now_ms);
        return Outcome<void>::accepted();
    }

    /// Each intermediary escrows the full ether equivalent of the surviving
    /// session total: the closing transfer to C2 needs C1's deposit to cover
    /// it, and the forfeiture branch needs the same of C2.
    Amount required_deposit() const {
        Amount sum = 0;
        for (const auto& intent : intents_) {
            if (!intent.excluded) sum += intent.ether_slice;
        }
        return sum;
    }

    Outcome<void> deposit(const std::string& intermediary, Amount amount, std::int64_t now_ms) {
        if (phase_ != Phase::AwaitDeposits) return Outcome<void>::rejected("session not awaiting deposits");
        if (intermediary != c1_ && intermediary != c2_)
            return Outcome<void>::rejected(intermediary + " is not a chosen intermediary");
        bool& done = intermediary == c1_ ? c1_deposited_ : c2_deposited_;
        if (done) return Outcome<void>::rejected("already deposited");
        if (amount != required_deposit()) return Outcome<void>::rejected("deposit amount mismatch");
        const Account& from = intermediary == c1_ ? c1_eth_ : c2_eth_;
        if (amount > 0) {
            auto moved = move_ether(from, escrow_account_, amount, "deposit");
            if (!moved) return Outcome<void>::rejected(moved.reason());
        }
        done = true;
        (intermediary == c1_ ? c1_deposit_ : c2_deposit_) = amount;
        gas_.charge(intermediary, "TC.Deposit");
        if (c1_deposited_ && c2_deposited_) begin_payer_phase(now_ms);
        return Outcome<void>::accepted();
    }

    /// Committee-final verdict for one validation item. Payer failures shrink
    /// the session total and hand the matching escrow slices straight back.
    Outcome<void> record_final_verdict(const std::string& item_ref, Verdict verdict, std::int64_t now_ms) {
        if (phase_ != Phase::AwaitPayerTransfers && phase_ != Phase::AwaitPayeeTransfers)
            return Outcome<void>::rejected("session not in a validation phase");
        const ValidationItem* item = find_item(item_ref);
        if (!item) return Outcome<void>::rejected("unknown validation item " + item_ref);
        if (item->leg == ItemLeg::Payer) {
            if (phase_ != Phase::AwaitPayerTransfers) return Outcome<void>::rejected("payer leg already closed");
            if (payer_outcome(item->party) != PartyOutcome::Pending)
                return Outcome<void>::rejected("duplicate verdict for " + item_ref);
            payer_outcomes_[item->party] =
                verdict == Verdict::Confirmed ? PartyOutcome::Confirmed : PartyOutcome::Failed;
            if (verdict == Verdict::Failed) {
                for (auto& intent : intents_) {
                    if (intent.payer != item->party || intent.excluded || intent.failed_in_trade) continue;
                    intent.failed_in_trade = true;
                    total_ -= intent.amount;
                    if (intent.ether_slice > 0) {
                        must_move(escrow_account_, c1_eth_, intent.ether_slice, "refund_failed_payer");
                        must_move(escrow_account_, c2_eth_, intent.ether_slice, "refund_failed_payer");
                    }
                }
            }
            if (all_payers_decided()) begin_payee_phase(now_ms);
        } else {
            if (phase_ != Phase::AwaitPayeeTransfers) return Outcome<void>::rejected("payee leg not open");
            if (payee_outcome(item->party) != PartyOutcome::Pending)
                return Outcome<void>::rejected("duplicate verdict for " + item_ref);
            payee_outcomes_[item->party] =
                verdict == Verdict::Confirmed ? PartyOutcome::Confirmed : PartyOutcome::Failed;
        }
        return Outcome<void>::accepted();
    }

    bool ready_to_settle() const {
        if (phase_ != Phase::AwaitPayeeTransfers) return false;
        for (const auto& item : payee_items_) {
            if (payee_outcome(item.party) == PartyOutcome::Pending) return false;
        }
        return true;
    }

    /// Close out the escrow. Confirmed payees hand C2 its slice back, failed
    /// payees are compensated from it, and whatever the payers delivered gets
    /// forwarded from C1's deposit to C2.
    Outcome<SettlementReport> settle(std::int64_t) {
        if (!ready_to_settle()) return Outcome<SettlementReport>::rejected("payee outcomes not all decided");
        SettlementReport report;
        std::size_t first_move = escrow_moves_.size();
        for (const auto& item : payee_items_) {
            Amount slice = payee_ether_slice(item.party);
            if (slice <= 0) continue;
            if (payee_outcome(item.party) == PartyOutcome::Confirmed) {
                must_move(escrow_account_, c2_eth_, slice, "payee_return");
            } else {
                Account payee_eth = payee_eth_account(item.party);
                must_move(escrow_account_, payee_eth, slice, "payee_forfeit");
            }
        }
        Amount forward = 0;
        for (const auto& intent : intents_) {
            if (intent.excluded || intent.failed_in_trade) continue;
            forward += intent.ether_slice;
        }
        if (forward > 0 && !fault_skip_forward_) must_move(escrow_account_, c2_eth_, forward, "forward");
        bool any_confirmed = false;
        for (const auto& intent : intents_) {
            if (!intent.excluded && !intent.failed_in_trade) any_confirmed = true;
        }
        phase_ = any_confirmed ? Phase::Settled : Phase::Aborted;
        check_escrow_zero_sum();
        report.moves.assign(escrow_moves_.begin() + static_cast<std::ptrdiff_t>(first_move), escrow_moves_.end());
        report.terminal = phase_;
        return Outcome<SettlementReport>::accepted(std::move(report));
    }

    struct TickResult {
        bool aborted = false;
        bool advanced = false;
        std::string note;
    };

    /// Deadline-driven transitions. Every phase has one so a silent party can
    /// never wedge the session.
    TickResult tick(std::int64_t now_ms) {
        TickResult result;
        if (now_ms < phase_deadline_ms_) return result;
        switch (phase_) {
            case Phase::Collecting:
                if (intents_.empty()) {
                    abort_session("collection window closed with no intents");
                    result.aborted = true;
                } else {
                    begin_selection(now_ms);
                    result.advanced = true;
                    result.note = "collection window closed";
                }
                break;
            case Phase::AwaitSelection:
                abort_session("selection deadline passed");
                result.aborted = true;
                break;
            case Phase::AwaitDeposits:
                refund_deposits_on_abort();
                abort_session("deposit deadline passed");
                result.aborted = true;
                break;
            default:
                break;  // validation phases conclude via vote deadlines
        }
        return result;
    }

    Amount escrow_in() const { return escrow_in_; }
    Amount escrow_out() const { return escrow_out_; }
    bool terminal() const { return phase_ == Phase::Settled || phase_ == Phase::Aborted; }

    void inject_fault_skip_forward() { fault_skip_forward_ = true; }

private:
    std::optional<MergedIntent*> find_intent(const std::string& payer, const std::string& payee) {
        for (auto& intent : intents_) {
            if (intent.payer == payer && intent.payee == payee) return &intent;
        }
        return std::nullopt;
    }

    const ValidationItem* find_item(const std::string& ref) const {
        for (const auto& item : payer_items_) {
            if (item.ref == ref) return &item;
        }
        for (const auto& item : payee_items_) {
            if (item.ref == ref) return &item;
        }
        return nullptr;
    }

    Amount scale_to_ether(Amount coin1_amount) const {
        Rat scaled = Rat(coin1_amount) * rate_in_;
        BigInt floored = boost::multiprecision::numerator(scaled) / boost::multiprecision::denominator(scaled);
        return static_cast<Amount>(floored);
    }

    Amount scale_to_coin2(Amount coin1_amount) const {
        Rat scaled = Rat(coin1_amount) * rate_in_ * rate_out_ * Rat(10000 - params_.fee_bps, 10000);
        BigInt floored = boost::multiprecision::numerator(scaled) / boost::multiprecision::denominator(scaled);
        return static_cast<Amount>(floored);
    }

    Amount payee_ether_slice(const std::string& payee) const {
        Amount sum = 0;
        for (const auto& intent : intents_) {
            if (intent.payee != payee || intent.excluded || intent.failed_in_trade) continue;
            if (payer_outcome(intent.payer) == PartyOutcome::Confirmed) sum += intent.ether_slice;
        }
        return sum;
    }

    Account payee_eth_account(const std::string& payee) const {
        for (const auto& intent : intents_) {
            if (intent.payee == payee) return intent.payee_eth;
        }
        throw InvariantViolation("payee without intent: " + payee);
    }

    void begin_selection(std::int64_t now_ms) {
        phase_ = Phase::AwaitSelection;
        phase_deadline_ms_ = now_ms + params_.select_window_s * 1000;
    }

    void finish_selection(std::int64_t now_ms) {
        total_ = 0;
        for (auto& intent : intents_) {
            if (intent.excluded) continue;
            intent.ether_slice = scale_to_ether(intent.amount);
            total_ += intent.amount;
        }
        bool any = false;
        for (const auto& intent : intents_) any = any || !intent.excluded;
        if (!any) {
            abort_session("every intent excluded at selection");
            return;
        }
        phase_ = Phase::AwaitDeposits;
        phase_deadline_ms_ = now_ms + params_.deposit_window_s * 1000;
    }

    void begin_payer_phase(std::int64_t now_ms) {
        phase_ = Phase::AwaitPayerTransfers;
        phase_deadline_ms_ = now_ms + params_.payer_window_s * 1000;
        std::map<std::string, Amount> per_payer;
        std::map<std::string, Account> payer_coin;
        for (const auto& intent : intents_) {
            if (intent.excluded) continue;
            per_payer[intent.payer] += intent.amount;
            payer_coin[intent.payer] = intent.payer_coin;
        }
        for (const auto& [payer, amount] : per_payer) {
            ValidationItem item;
            item.ref = session_id_ + "/payer/" + payer;
            item.session_id = session_id_;
            item.leg = ItemLeg::Payer;
            item.party = payer;
            item.chain_id = asset_in_;
            item.from = payer_coin[payer];
            item.to = c1_coin_;
            item.amount = amount;
            item.deadline_ms = phase_deadline_ms_;
            item.excluded_voters = {c1_, c2_};
            payer_items_.push_back(std::move(item));
        }
    }

    void begin_payee_phase(std::int64_t now_ms) {
        phase_ = Phase::AwaitPayeeTransfers;
        phase_deadline_ms_ = now_ms + params_.payee_window_s * 1000;
        amount_b_.clear();
        for (const auto& intent : intents_) {
            if (intent.excluded || intent.failed_in_trade) continue;
            if (payer_outcome(intent.payer) == PartyOutcome::Confirmed)
                amount_b_[intent.payee] += intent.amount;
        }
        for (const auto& [payee, coin1_amount] : amount_b_) {
            if (coin1_amount <= 0) continue;
            ValidationItem item;
            item.ref = session_id_ + "/payee/" + payee;
            item.session_id = session_id_;
            item.leg = ItemLeg::Payee;
            item.party = payee;
            item.chain_id = asset_out_;
            item.from = c2_coin_;
            item.to = payee_coin_account(payee);
            item.amount = payee_payout(payee);
            item.deadline_ms = phase_deadline_ms_;
            item.excluded_voters = {c1_, c2_};
            payee_items_.push_back(std::move(item));
        }
    }

    Account payee_coin_account(const std::string& payee) const {
        for (const auto& intent : intents_) {
            if (intent.payee == payee) return intent.payee_coin;
        }
        throw InvariantViolation("payee without intent: " + payee);
    }

    bool all_payers_decided() const {
        for (const auto& item : payer_items_) {
            if (payer_outcome(item.party) == PartyOutcome::Pending) return false;
        }
        return true;
    }

    void refund_deposits_on_abort() {
        if (c1_deposited_ && c1_deposit_ > 0) must_move(escrow_account_, c1_eth_, c1_deposit_, "abort_refund");
        if (c2_deposited_ && c2_deposit_ > 0) must_move(escrow_account_, c2_eth_, c2_deposit_, "abort_refund");
        c1_deposit_ = c2_deposit_ = 0;
    }

    void abort_session(const std::string& note) {
        phase_ = Phase::Aborted;
        abort_note_ = note;
        check_escrow_zero_sum();
    }

    Outcome<void> move_ether(const Account& from, const Account& to, Amount amount, const std::string& kind) {
        Transfer t;
        t.from = from;
        t.to = to;
        t.amount = amount;
        t.nonce = ether_.next_nonce(from);
        auto submitted = ether_.submit(std::move(t));
        if (!submitted) return Outcome<void>::rejected(submitted.reason());
        escrow_moves_.push_back({from, to, amount, kind});
        if (to == escrow_account_) escrow_in_ += amount;
        if (from == escrow_account_) escrow_out_ += amount;
        return Outcome<void>::accepted();
    }

    void must_move(const Account& from, const Account& to, Amount amount, const std::string& kind) {
        auto moved = move_ether(from, to, amount, kind);
        if (!moved)
            throw InvariantViolation("escrow movement failed in session " + session_id_ + ": " + moved.reason());
    }

    void check_escrow_zero_sum() const {
        if (!terminal()) return;
        if (fault_skip_forward_) return;  // the violation is the point; let the audit catch it
        if (escrow_in_ != escrow_out_)
            throw InvariantViolation("escrow zero-sum violated in session " + session_id_);
    }

    std::string session_id_;
    std::string asset_in_;
    std::string asset_out_;
    std::string c1_;
    std::string c2_;
    Account c1_eth_;
    Account c2_eth_;
    Account c1_coin_;
    Account c2_coin_;
    Rat rate_in_;
    Rat rate_out_;
    SessionParams params_;
    Ledger& ether_;
    GasLedger& gas_;
    Account escrow_account_;

    Phase phase_ = Phase::Collecting;
    std::int64_t phase_deadline_ms_ = 0;
    std::vector<MergedIntent> intents_;
    std::set<std::string> prepare_charged_;
    Amount total_ = 0;
    bool c1_selected_ = false;
    bool c2_selected_ = false;
    bool c1_deposited_ = false;
    bool c2_deposited_ = false;
    Amount c1_deposit_ = 0;
    Amount c2_deposit_ = 0;
    std::map<std::string, PartyOutcome> payer_outcomes_;
    std::map<std::string, PartyOutcome> payee_outcomes_;
    std::map<std::string, Amount> amount_b_;
    std::vector<ValidationItem> payer_items_;
    std::vector<ValidationItem> payee_items_;
    std::vector<EscrowMove> escrow_moves_;
    Amount escrow_in_ = 0;
    Amount escrow_out_ = 0;
    std::string abort_note_;
    bool fault_skip_forward_ = false;
};

}  // namespace xchx

#endif  // XCHX_CONTRACTS_HPP
