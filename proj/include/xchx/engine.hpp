// Copyright (c) 2026 The xchx developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef XCHX_ENGINE_HPP
#define XCHX_ENGINE_HPP

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "xchx/committee.hpp"
#include "xchx/contracts.hpp"
#include "xchx/scenario.hpp"
#include "xchx/trace.hpp"

namespace xchx {

/// Expected seconds until a PoW solution, given the share of hash space the
/// target admits. The puzzle itself is latency-modeled; admitted nonces are
/// still checked against the real hash.
inline double solve_time_sample(const U256& target, double hash_rate, Rng& rng) {
    if (hash_rate <= 0) throw ConfigError("solve_time_sample: hash_rate must be > 0");
    double ratio = BigInt(target).convert_to<double>() * std::pow(2.0, -256);
    double rate = hash_rate * ratio;
    if (!(rate > 0)) return std::numeric_limits<double>::infinity();
    return rng.exponential(rate);
}

struct RunResult {
    std::vector<TraceEvent> trace;
    Metrics metrics;
    std::string hash;
};

class Engine {
public:
    explicit Engine(Scenario scenario, std::optional<std::uint64_t> seed_override = std::nullopt)
        : sc_(std::move(scenario)) {
        if (seed_override) sc_.seed = *seed_override;
        duration_ms_ = sc_.duration_s * 1000;
    }

    RunResult run() {
        setup();
        while (!queue_.empty()) {
            QEvent ev = queue_.top();
            queue_.pop();
            if (ev.t_ms > duration_ms_) continue;
            clock_ = ev.t_ms;
            dispatch(ev);
            converge();
        }
        clock_ = duration_ms_;
        drain();
        RunResult result;
        result.trace = std::move(trace_);
        result.metrics = metrics_;
        result.hash = trace_hash(result.trace);
        return result;
    }

private:
    enum class EvKind { MineBlock, EpochBoundary, Admission, Deadline, Update };

    struct QEvent {
        std::int64_t t_ms;
        std::uint64_t seq;
        EvKind kind;
        std::string subject;

        bool operator>(const QEvent& other) const {
            return std::tie(t_ms, seq) > std::tie(other.t_ms, other.seq);
        }
    };

    struct ActorState {
        ActorSpec spec;
        Rng rng{0};
        bool spawned = false;
        bool reorg_done = false;
        bool ds_submitted = false;
        TxId ds_txid;
        std::uint64_t ds_nonce = 0;
        Amount ds_amount = 0;
        std::set<std::string> prepared;        // session ids
        std::set<std::string> selected;        // session ids
        std::set<std::string> deposited;       // session ids
        std::set<std::string> paid_out;        // session ids
        std::set<std::string> transfers_done;  // payer item refs
        std::set<std::string> claims_done;     // session ids
        std::map<std::string, bool> lie_memo;  // item ref -> inverted?
    };

    struct ItemInfo {
        ValidationItem item;
        std::size_t session_idx = 0;
        bool finalized = false;
        Verdict verdict = Verdict::Failed;
    };

    // ---- plumbing -----------------------------------------------------------

    void emit(const std::string& actor, const std::string& action, nlohmann::ordered_json payload) {
        TraceEvent ev{clock_, actor, action, std::move(payload)};
        metrics_.absorb(ev);
        trace_.push_back(std::move(ev));
    }

    void schedule(std::int64_t t_ms, EvKind kind, std::string subject) {
        if (t_ms > duration_ms_) return;
        queue_.push(QEvent{t_ms, seq_++, kind, std::move(subject)});
    }

    Ledger& ledger(const std::string& chain_id) {
        auto it = ledgers_.find(chain_id);
        if (it == ledgers_.end()) throw InvariantViolation("unknown chain " + chain_id);
        return it->second;
    }

    Ledger& ether() { return ledger(sc_.ether_chain); }

    ActorState* actor_state(const std::string& id) {
        for (auto& actor : actors_) {
            if (actor.spec.id == id) return &actor;
        }
        return nullptr;
    }

    // ---- setup --------------------------------------------------------------

    void setup() {
        gas_.apply_overrides(sc_.gas_overrides);
        gas_.set_hook([this](const GasCharge& charge) {
            emit(charge.caller, "gas_charge",
                 {{"caller", charge.caller}, {"op", charge.op}, {"gas", charge.gas}});
        });

        emit("engine", "run_start", {{"scenario", sc_.name}, {"seed", sc_.seed}});

        for (const auto& cfg : sc_.chains) {
            ledgers_.emplace(cfg.chain_id, Ledger(cfg));
            emit("engine", "chain_created",
                 {{"chain", cfg.chain_id}, {"k", cfg.confirmation_depth}});
            schedule(cfg.block_interval_s * 1000, EvKind::MineBlock, cfg.chain_id);
        }

        gas_.charge("deployer", "Deploy");
        emit("deployer", "deploy", {});

        for (auto& actor : sc_.actors) {
            ActorState state;
            state.spec = actor;
            state.rng = derive_rng(sc_.seed, actor.id);
            actors_.push_back(std::move(state));
        }

        registry_ = std::make_unique<IntermediaryRegistry>(gas_);
        for (const auto& rec : sc_.intermediaries) {
            auto registered = registry_->register_intermediary(rec);
            if (registered)
                emit(rec.id, "register_ok", {{"id", rec.id}});
            else
                emit(rec.id, "register_rejected", {{"id", rec.id}, {"reason", registered.reason()}});
        }

        committee_ = std::make_unique<CommitteeManager>(sc_.pow, sc_.threshold_a, ether(), gas_,
                                                        *registry_, kStakeEscrow, kTreasury);

        create_sessions();

        committee_->open_epoch(0);
        emit("engine", "epoch_opened", {{"epoch", 0}, {"target", target_str()}});
        schedule_admissions();
        schedule(sc_.pow.epoch_length_s * 1000, EvKind::EpochBoundary, "");

        for (const auto& update : sc_.updates) schedule(update.at_s * 1000, EvKind::Update, update.id);

        if (!sc_.fault.empty()) {
#ifdef XCHX_FAULT_INJECTION
            if (sc_.fault == "leak_escrow") {
                for (auto& session : sessions_) session->inject_fault_skip_forward();
            } else {
                throw ConfigError("scenario.fault: unknown fault '" + sc_.fault + "'");
            }
#else
            throw ConfigError("scenario.fault: fault injection not enabled in this build");
#endif
        }

        converge();
    }

    void create_sessions() {
        // One session per (asset_in, asset_out, c1, c2) group, in first-trade order.
        std::vector<std::tuple<std::string, std::string, std::string, std::string>> keys;
        std::map<std::tuple<std::string, std::string, std::string, std::string>, std::vector<TradeIntent>>
            groups;
        for (const auto& trade : sc_.trades) {
            auto key = std::make_tuple(trade.asset_in, trade.asset_out, trade.c1, trade.c2);
            if (!groups.count(key)) keys.push_back(key);
            groups[key].push_back(trade);
        }
        for (const auto& key : keys) {
            const auto& [asset_in, asset_out, c1, c2] = key;
            std::string sid = "s" + std::to_string(sessions_.size());
            auto reject = [&](const std::string& reason) {
                emit("engine", "session_rejected",
                     {{"session", sid}, {"c1", c1}, {"c2", c2}, {"reason", reason}});
            };
            if (!registry_->eligible_for_trade(c1)) {
                reject(c1 + " has no successful validation record");
                continue;
            }
            if (!registry_->eligible_for_trade(c2)) {
                reject(c2 + " has no successful validation record");
                continue;
            }
            auto rate_in = registry_->rate(c1, {asset_in, sc_.ether_chain});
            if (!rate_in) {
                reject(c1 + " does not support " + asset_in + "->" + sc_.ether_chain);
                continue;
            }
            auto rate_out = registry_->rate(c2, {sc_.ether_chain, asset_out});
            if (!rate_out) {
                reject(c2 + " does not support " + sc_.ether_chain + "->" + asset_out);
                continue;
            }
            sessions_.push_back(std::make_unique<TradeSession>(
                sid, asset_in, asset_out, registry_->record(c1), registry_->record(c2), *rate_in,
                *rate_out, sc_.session, clock_, ether(), gas_, kTcEscrow));
            session_last_phase_.push_back(Phase::Collecting);
            session_moves_emitted_.push_back(0);
            payer_items_made_.push_back(false);
            payee_items_made_.push_back(false);
            for (const auto& trade : groups[key]) payer_jobs_[trade.payer].push_back({sessions_.size() - 1, trade});
            emit("engine", "session_created",
                 {{"session", sid}, {"asset_in", asset_in}, {"asset_out", asset_out}, {"c1", c1}, {"c2", c2}});
            schedule(sessions_.back()->phase_deadline_ms(), EvKind::Deadline, sid);
        }
    }

    void schedule_admissions() {
        std::int64_t epoch_end = clock_ + sc_.pow.epoch_length_s * 1000;
        for (auto& actor : actors_) {
            if (actor.spec.kind != BehaviorKind::HonestValidator &&
                actor.spec.kind != BehaviorKind::ByzantineValidator)
                continue;
            double dt_s = solve_time_sample(committee_->target(), actor.spec.hash_rate, actor.rng);
            if (!std::isfinite(dt_s)) continue;  // impossible target: the actor never joins
            std::int64_t at = clock_ + static_cast<std::int64_t>(dt_s * 1000.0);
            if (at >= epoch_end) continue;  // did not solve within this epoch
            schedule(at, EvKind::Admission, actor.spec.id);
        }
    }

    // ---- event dispatch -----------------------------------------------------

    void dispatch(const QEvent& ev) {
        switch (ev.kind) {
            case EvKind::MineBlock: {
                Ledger& l = ledger(ev.subject);
                const Block& block = l.mine();
                emit("engine", "block_mined",
                     {{"chain", ev.subject},
                      {"height", block.height},
                      {"txs", block.transfers.size()}});
                schedule(clock_ + l.config().block_interval_s * 1000, EvKind::MineBlock, ev.subject);
                break;
            }
            case EvKind::EpochBoundary: {
                close_epoch();
                committee_->open_epoch(clock_);
                emit("engine", "epoch_opened",
                     {{"epoch", committee_->epoch_id()}, {"target", target_str()}});
                schedule_admissions();
                schedule(clock_ + sc_.pow.epoch_length_s * 1000, EvKind::EpochBoundary, "");
                break;
            }
            case EvKind::Admission: {
                ActorState* actor = actor_state(ev.subject);
                if (!actor) break;
                attempt_admission(*actor);
                break;
            }
            case EvKind::Deadline:
                break;  // converge() notices expired deadlines
            case EvKind::Update: {
                const IntermediaryRecord& rec = registry_->record(ev.subject);
                auto updated = registry_->update(ev.subject, rec.eth_address, rec.coin_addresses, rec.rates);
                emit(ev.subject, updated ? "ic_update_ok" : "ic_update_rejected",
                     {{"id", ev.subject}});
                break;
            }
        }
    }

    void close_epoch() {
        auto report = committee_->close_epoch(clock_);
        for (const auto& ret : report.stake_returns) {
            emit(ret.member, "stake_returned", {{"member", ret.member}, {"amount", ret.amount}});
        }
        emit("engine", "epoch_closed",
             {{"epoch", committee_->epoch_id()},
              {"admissions", report.admissions},
              {"new_target", target_str()}});
    }

    void attempt_admission(ActorState& actor) {
        Amount stake = actor.spec.stake > 0 ? actor.spec.stake : sc_.pow.stake_min;
        auto nonce = solve_pow(actor.spec.id, committee_->epoch_id(), actor.rng, committee_->target());
        if (!nonce) {
            emit(actor.spec.id, "admission_rejected",
                 {{"id", actor.spec.id}, {"reason", "no nonce found"}});
            return;
        }
        auto admitted =
            committee_->verify_pow(actor.spec.id, committee_->epoch_id(), *nonce, stake, clock_);
        if (admitted) {
            emit(actor.spec.id, "admission_ok",
                 {{"id", actor.spec.id},
                  {"epoch", committee_->epoch_id()},
                  {"nonce", *nonce},
                  {"stake", stake}});
        } else {
            emit(actor.spec.id, "admission_rejected",
                 {{"id", actor.spec.id}, {"reason", admitted.reason()}});
        }
    }

    // ---- convergence sweeps -------------------------------------------------

    void converge() {
        for (int round = 0;; ++round) {
            if (round >= 64) throw InvariantViolation("engine sweep did not quiesce");
            bool progress = false;
            for (auto& actor : actors_) progress |= actor_step(actor);
            progress |= tally_pass();
            progress |= session_pass();
            if (!progress) break;
        }
        mine_ether_on_demand();
    }

    /// Contract calls settle within the block they land in: whenever contract
    /// bookkeeping queued ether movements, produce the block right away.
    void mine_ether_on_demand() {
        Ledger& l = ether();
        int guard = 0;
        while (!l.pending().empty()) {
            if (++guard > 8) throw InvariantViolation("ether drain loop stuck");
            const Block& block = l.mine();
            emit("engine", "block_mined",
                 {{"chain", sc_.ether_chain}, {"height", block.height}, {"txs", block.transfers.size()}});
        }
    }

    bool actor_step(ActorState& actor) {
        switch (actor.spec.kind) {
            case BehaviorKind::HonestPayer:
            case BehaviorKind::FalseClaimPayer:
            case BehaviorKind::DoubleSpendPayer:
                return payer_step(actor);
            case BehaviorKind::HonestPayee:
                return false;
            case BehaviorKind::FalseDenialPayee:
                return payee_step(actor);
            case BehaviorKind::HonestIntermediary:
            case BehaviorKind::AbscondingIntermediary:
                return intermediary_step(actor);
            case BehaviorKind::HonestValidator:
            case BehaviorKind::ByzantineValidator:
                return validator_step(actor);
            case BehaviorKind::SybilSpawner:
                return sybil_step(actor);
        }
        return false;
    }

    bool payer_step(ActorState& actor) {
        bool acted = false;
        auto jobs = payer_jobs_.find(actor.spec.id);
        if (jobs == payer_jobs_.end()) return false;

        // Publish trade requests while the session collects.
        for (const auto& [idx, trade] : jobs->second) {
            TradeSession& session = *sessions_[idx];
            if (session.phase() != Phase::Collecting) continue;
            std::string key = session.id() + "/" + trade.payer + ">" + trade.payee +
                              "#" + std::to_string(trade.amount);
            if (actor.prepared.count(key)) continue;
            actor.prepared.insert(key);
            auto prepared = session.prepare(trade, clock_);
            emit(actor.spec.id, prepared ? "prepare_ok" : "prepare_rejected",
                 {{"session", session.id()},
                  {"payer", trade.payer},
                  {"payee", trade.payee},
                  {"amount", trade.amount},
                  {"reason", prepared ? "" : prepared.reason()}});
            note_session_activity(idx);
            acted = true;
        }

        // Settle own obligation once the transfer phase opens.
        for (const auto& [ref, info] : items_) {
            if (info.item.leg != ItemLeg::Payer || info.item.party != actor.spec.id) continue;
            if (sessions_[info.session_idx]->phase() != Phase::AwaitPayerTransfers) continue;
            if (actor.transfers_done.count(ref)) continue;
            switch (actor.spec.kind) {
                case BehaviorKind::HonestPayer:
                    actor.transfers_done.insert(ref);
                    submit_split_transfers(actor, info.item);
                    acted = true;
                    break;
                case BehaviorKind::FalseClaimPayer:
                    // Spoofed completion message; no coins move. The contract
                    // only listens to the committee, so this lands in the
                    // trace and nowhere else.
                    actor.transfers_done.insert(ref);
                    emit(actor.spec.id, "claim_ignored",
                         {{"session", info.item.session_id}, {"claim", "transfer_complete"}});
                    acted = true;
                    break;
                case BehaviorKind::DoubleSpendPayer:
                    acted |= double_spend_step(actor, info);
                    break;
                default:
                    break;
            }
        }
        return acted;
    }

    void submit_split_transfers(ActorState& actor, const ValidationItem& item) {
        Ledger& l = ledger(item.chain_id);
        int split = std::max(1, actor.spec.split);
        Amount part = item.amount / split;
        if (part <= 0) split = 1;
        for (int i = 0; i < split; ++i) {
            Amount amount = i == 0 ? item.amount - part * (split - 1) : part;
            Transfer t;
            t.from = item.from;
            t.to = item.to;
            t.amount = amount;
            t.nonce = l.next_nonce(item.from);
            auto submitted = l.submit(std::move(t));
            emit(actor.spec.id, submitted ? "transfer_submitted" : "transfer_rejected",
                 {{"chain", item.chain_id},
                  {"from", item.from},
                  {"to", item.to},
                  {"amount", amount},
                  {"reason", submitted ? "" : submitted.reason()}});
        }
    }

    bool double_spend_step(ActorState& actor, const ItemInfo& info) {
        Ledger& l = ledger(info.item.chain_id);
        if (!actor.ds_submitted) {
            actor.ds_submitted = true;
            actor.transfers_done.insert(info.item.ref);
            Transfer t;
            t.from = info.item.from;
            t.to = info.item.to;
            t.amount = info.item.amount;
            t.nonce = l.next_nonce(info.item.from);
            actor.ds_nonce = t.nonce;
            actor.ds_amount = t.amount;
            auto submitted = l.submit(std::move(t));
            if (submitted) actor.ds_txid = submitted.value();
            emit(actor.spec.id, submitted ? "transfer_submitted" : "transfer_rejected",
                 {{"chain", info.item.chain_id},
                  {"from", info.item.from},
                  {"to", info.item.to},
                  {"amount", info.item.amount},
                  {"reason", submitted ? "" : submitted.reason()}});
            return true;
        }
        if (actor.reorg_done || actor.ds_txid.empty()) return false;
        auto depth = l.confirmation_depth(actor.ds_txid);
        if (!depth || *depth < static_cast<std::uint64_t>(actor.spec.reorg_depth)) return false;
        // Fork off the block containing the payment and divert the same coins.
        actor.reorg_done = true;
        Transfer divert;
        divert.tx_id = actor.ds_txid + "-divert";
        divert.from = info.item.from;
        divert.to = actor.spec.divert_to.empty() ? info.item.from : actor.spec.divert_to;
        divert.amount = actor.ds_amount;
        divert.nonce = actor.ds_nonce;
        auto forked = l.reorg(static_cast<std::uint64_t>(actor.spec.reorg_depth), {divert});
        emit(actor.spec.id, forked ? "reorg_ok" : "reorg_rejected",
             {{"chain", info.item.chain_id},
              {"depth", actor.spec.reorg_depth},
              {"reason", forked ? "" : forked.reason()}});
        return true;
    }

    bool payee_step(ActorState& actor) {
        // FalseDenialPayee: denies receipt hoping to pocket the escrow too.
        bool acted = false;
        for (const auto& [ref, info] : items_) {
            if (info.item.leg != ItemLeg::Payee || info.item.party != actor.spec.id) continue;
            if (actor.claims_done.count(info.item.session_id)) continue;
            actor.claims_done.insert(info.item.session_id);
            emit(actor.spec.id, "claim_ignored",
                 {{"session", info.item.session_id}, {"claim", "transfer_denied"}});
            acted = true;
        }
        return acted;
    }

    bool intermediary_step(ActorState& actor) {
        bool acted = false;
        const std::string& id = actor.spec.id;
        bool absconding = actor.spec.kind == BehaviorKind::AbscondingIntermediary;
        for (std::size_t idx = 0; idx < sessions_.size(); ++idx) {
            TradeSession& session = *sessions_[idx];
            if (session.c1() != id && session.c2() != id) continue;
            if (session.phase() == Phase::AwaitSelection && !actor.selected.count(session.id())) {
                if (absconding && actor.spec.abscond_at == "select") continue;
                actor.selected.insert(session.id());
                std::set<std::pair<std::string, std::string>> accepted;
                int excluded = 0;
                const Ledger& coin = ledger(session.asset_in());
                for (const auto& intent : session.intents()) {
                    bool funded = coin.balance(intent.payer_coin) >= intent.amount;
                    bool big_enough = intent.amount >= actor.spec.min_amount;
                    if (funded && big_enough)
                        accepted.insert({intent.payer, intent.payee});
                    else
                        ++excluded;
                }
                auto selected = session.select(id, accepted, actor.spec.min_amount, clock_);
                emit(id, selected ? "select_ok" : "select_rejected",
                     {{"session", session.id()},
                      {"accepted", accepted.size()},
                      {"excluded", excluded},
                      {"reason", selected ? "" : selected.reason()}});
                note_session_activity(idx);
                acted = true;
            }
            if (session.phase() == Phase::AwaitDeposits && !actor.deposited.count(session.id())) {
                if (absconding && actor.spec.abscond_at == "deposit") continue;
                actor.deposited.insert(session.id());
                Amount required = session.required_deposit();
                auto deposited = session.deposit(id, required, clock_);
                emit(id, deposited ? "deposit_ok" : "deposit_rejected",
                     {{"session", session.id()},
                      {"amount", required},
                      {"reason", deposited ? "" : deposited.reason()}});
                note_session_activity(idx);
                acted = true;
            }
            if (session.phase() == Phase::AwaitPayeeTransfers && session.c2() == id &&
                !actor.paid_out.count(session.id())) {
                if (absconding && actor.spec.abscond_at == "payout") continue;
                actor.paid_out.insert(session.id());
                for (const auto& item : session.payee_items()) {
                    Ledger& l = ledger(item.chain_id);
                    Transfer t;
                    t.from = item.from;
                    t.to = item.to;
                    t.amount = item.amount;
                    t.nonce = l.next_nonce(item.from);
                    auto submitted = l.submit(std::move(t));
                    emit(id, submitted ? "transfer_submitted" : "transfer_rejected",
                         {{"chain", item.chain_id},
                          {"from", item.from},
                          {"to", item.to},
                          {"amount", item.amount},
                          {"reason", submitted ? "" : submitted.reason()}});
                }
                acted = true;
            }
        }
        return acted;
    }

    bool validator_step(ActorState& actor) {
        bool acted = false;
        const std::string& id = actor.spec.id;
        for (const auto& ref : committee_->open_item_refs()) {
            if (!committee_->may_vote(id, ref)) continue;
            auto info_it = items_.find(ref);
            if (info_it == items_.end()) continue;
            const ValidationItem& item = info_it->second.item;
            const Ledger& l = ledger(item.chain_id);
            std::uint64_t k = static_cast<std::uint64_t>(l.config().confirmation_depth);
            bool satisfied = l.confirmed_amount(item.from, item.to, k) >= item.amount;
            std::optional<Verdict> honest;
            if (satisfied)
                honest = Verdict::Confirmed;
            else if (clock_ >= item.deadline_ms)
                honest = Verdict::Failed;
            if (!honest) continue;
            Verdict verdict = *honest;
            if (actor.spec.kind == BehaviorKind::ByzantineValidator) {
                auto memo = actor.lie_memo.find(ref);
                if (memo == actor.lie_memo.end())
                    memo = actor.lie_memo.emplace(ref, actor.rng.bernoulli(actor.spec.lie_probability)).first;
                if (memo->second)
                    verdict = verdict == Verdict::Confirmed ? Verdict::Failed : Verdict::Confirmed;
            }
            auto voted = committee_->submit_vote(id, ref, verdict);
            emit(id, voted ? "vote_ok" : "vote_rejected",
                 {{"member", id},
                  {"item", ref},
                  {"verdict", verdict_name(verdict)},
                  {"reason", voted ? "" : voted.reason()}});
            acted = true;
        }
        return acted;
    }

    bool sybil_step(ActorState& actor) {
        if (actor.spawned) return false;
        actor.spawned = true;
        // Flood the registry with fresh identities and the sessions with dust
        // requests; the selection filter is what must stop them.
        for (int i = 0; i < actor.spec.spawn_count; ++i) {
            std::string sybil = actor.spec.id + ".s" + std::to_string(i);
            IntermediaryRecord rec;
            rec.id = sybil;
            rec.eth_address = sybil + ".eth";
            auto registered = registry_->register_intermediary(rec);
            emit(actor.spec.id, registered ? "register_ok" : "register_rejected",
                 {{"id", sybil}, {"reason", registered ? "" : registered.reason()}});
        }
        emit(actor.spec.id, "sybil_spawned", {{"count", actor.spec.spawn_count}});
        for (std::size_t idx = 0; idx < sessions_.size(); ++idx) {
            TradeSession& session = *sessions_[idx];
            if (session.phase() != Phase::Collecting) continue;
            for (int i = 0; i < actor.spec.spawn_count; ++i) {
                std::string sybil = actor.spec.id + ".s" + std::to_string(i);
                TradeIntent intent;
                intent.payer = sybil;
                intent.payer_eth = sybil + ".eth";
                intent.payer_coin = sybil + ".coin";
                intent.payee = sybil;
                intent.payee_eth = sybil + ".eth";
                intent.payee_coin = sybil + ".coin2";
                intent.asset_in = session.asset_in();
                intent.asset_out = session.asset_out();
                intent.amount = actor.spec.dust_amount;
                intent.c1 = session.c1();
                intent.c2 = session.c2();
                auto prepared = session.prepare(intent, clock_);
                emit(actor.spec.id, prepared ? "prepare_ok" : "prepare_rejected",
                     {{"session", session.id()},
                      {"payer", sybil},
                      {"payee", sybil},
                      {"amount", actor.spec.dust_amount},
                      {"reason", prepared ? "" : prepared.reason()}});
            }
            note_session_activity(idx);
        }
        return true;
    }

    bool tally_pass() {
        bool progress = false;
        for (const auto& ref : committee_->open_item_refs()) {
            if (!committee_->ready_to_tally(ref, clock_)) continue;
            auto outcome = committee_->tally(ref);
            if (!outcome.finalized) {
                emit("engine", "tally_escalated",
                     {{"item", ref},
                      {"confirm", outcome.confirm_votes},
                      {"fail", outcome.fail_votes}});
                progress = true;
                continue;
            }
            emit("engine", "tally_finalized",
                 {{"item", ref},
                  {"verdict", verdict_name(outcome.verdict)},
                  {"confirm", outcome.confirm_votes},
                  {"fail", outcome.fail_votes},
                  {"dissenters", outcome.dissenters.size()}});
            auto slash_report = committee_->slash_and_distribute(outcome.dissenters);
            for (const auto& slashed : slash_report.slashed)
                emit(slashed.member, "slash", {{"member", slashed.member}, {"amount", slashed.amount}});
            for (const auto& payout : slash_report.payouts)
                emit(payout.member, "slash_payout", {{"member", payout.member}, {"amount", payout.amount}});
            if (slash_report.treasury_residue > 0)
                emit("engine", "treasury_residue", {{"amount", slash_report.treasury_residue}});
            auto& info = items_.at(ref);
            info.finalized = true;
            info.verdict = outcome.verdict;
            TradeSession& session = *sessions_[info.session_idx];
            auto recorded = session.record_final_verdict(ref, outcome.verdict, clock_);
            emit("engine", recorded ? "verdict_recorded" : "verdict_rejected",
                 {{"session", session.id()},
                  {"item", ref},
                  {"verdict", verdict_name(outcome.verdict)},
                  {"reason", recorded ? "" : recorded.reason()}});
            note_session_activity(info.session_idx);
            progress = true;
        }
        return progress;
    }

    bool session_pass() {
        bool progress = false;
        for (std::size_t idx = 0; idx < sessions_.size(); ++idx) {
            TradeSession& session = *sessions_[idx];
            Phase before = session.phase();
            auto ticked = session.tick(clock_);
            note_session_activity(idx);
            if (ticked.aborted) {
                emit("engine", "session_aborted", {{"session", session.id()}, {"reason", ticked.note}});
                check_conservation(false);
                progress = true;
            } else if (ticked.advanced) {
                emit("engine", "collect_closed", {{"session", session.id()}});
                progress = true;
            }
            if (session.ready_to_settle()) {
                auto settled = session.settle(clock_);
                if (!settled) throw InvariantViolation("settle refused: " + settled.reason());
                note_session_activity(idx);
                if (settled.value().terminal == Phase::Settled)
                    emit("engine", "session_settled",
                         {{"session", session.id()}, {"total", session.total()}});
                else
                    emit("engine", "session_aborted",
                         {{"session", session.id()}, {"reason", "no surviving intents"}});
                check_conservation(false);
                progress = true;
            }
            if (session.phase() != before) {
                progress = true;
                emit("engine", "session_advanced",
                     {{"session", session.id()}, {"phase", phase_name(session.phase())}});
                if (!session.terminal())
                    schedule(session.phase_deadline_ms(), EvKind::Deadline, session.id());
                if (session.phase() == Phase::AwaitPayerTransfers) register_items(idx, ItemLeg::Payer);
                if (session.phase() == Phase::AwaitPayeeTransfers) register_items(idx, ItemLeg::Payee);
            }
        }
        return progress;
    }

    void register_items(std::size_t idx, ItemLeg leg) {
        auto& made = leg == ItemLeg::Payer ? payer_items_made_[idx] : payee_items_made_[idx];
        if (made) return;
        made = true;
        TradeSession& session = *sessions_[idx];
        const auto& list = leg == ItemLeg::Payer ? session.payer_items() : session.payee_items();
        for (const auto& item : list) {
            committee_->assign_item(item.ref, item.excluded_voters, item.deadline_ms);
            items_[item.ref] = ItemInfo{item, idx, false, Verdict::Failed};
            emit("engine", "item_assigned",
                 {{"item", item.ref},
                  {"chain", item.chain_id},
                  {"amount", item.amount},
                  {"epoch", committee_->epoch_id()}});
            schedule(item.deadline_ms, EvKind::Deadline, item.ref);
        }
    }

    /// Emit any escrow movements a contract call just made.
    void note_session_activity(std::size_t idx) {
        TradeSession& session = *sessions_[idx];
        auto& cursor = session_moves_emitted_[idx];
        const auto& moves = session.escrow_moves();
        for (; cursor < moves.size(); ++cursor) {
            const EscrowMove& move = moves[cursor];
            emit("contract", "escrow_move",
                 {{"session", session.id()},
                  {"from", move.from},
                  {"to", move.to},
                  {"amount", move.amount},
                  {"kind", move.kind}});
        }
    }

    // ---- end-of-run ---------------------------------------------------------

    void drain() {
        // Let every chain clear its pending pool so final balances are settled.
        for (int round = 0; round < 64; ++round) {
            bool any = false;
            for (auto& [chain_id, l] : ledgers_) {
                if (l.pending().empty()) continue;
                std::size_t before = l.pending().size();
                const Block& block = l.mine();
                emit("engine", "block_mined",
                     {{"chain", chain_id}, {"height", block.height}, {"txs", block.transfers.size()}});
                any = any || l.pending().size() < before;
            }
            if (!any) break;
        }
        if (committee_->epoch_open()) close_epoch();
        mine_ether_on_demand();
        final_audit();
        emit("engine", "run_end", {});
    }

    void final_audit() {
        for (const auto& [ref, info] : items_) {
            const ValidationItem& item = info.item;
            bool satisfied = ledger(item.chain_id).confirmed_amount(item.from, item.to, 1) >= item.amount;
            bool wrong = false;
            std::string verdict = "none";
            if (info.finalized) {
                verdict = verdict_name(info.verdict);
                wrong = (info.verdict == Verdict::Confirmed && !satisfied) ||
                        (info.verdict == Verdict::Failed && satisfied);
            }
            emit("engine", "final_audit",
                 {{"item", ref}, {"verdict", verdict}, {"satisfied", satisfied}, {"wrong", wrong}});
        }
        check_conservation(true);
        audit_escrow_accounts();
    }

    void check_conservation(bool strict) {
        for (const auto& [chain_id, l] : ledgers_) {
            bool ok = l.balances_sum() == l.total_supply();
            emit("engine", "conservation_check", {{"chain", chain_id}, {"ok", ok}});
            if (!ok && strict) throw InvariantViolation("conservation violated on " + chain_id);
        }
    }

    void audit_escrow_accounts() {
        Amount outstanding = 0;
        for (const auto& session : sessions_) outstanding += session->escrow_in() - session->escrow_out();
        Amount tc_balance = ether().balance(kTcEscrow);
        if (tc_balance != outstanding)
            throw InvariantViolation("escrow zero-sum violated: contract holds " +
                                     std::to_string(tc_balance) + ", sessions expect " +
                                     std::to_string(outstanding));
        Amount stake_balance = ether().balance(kStakeEscrow);
        if (stake_balance != 0)
            throw InvariantViolation("stake escrow not emptied: " + std::to_string(stake_balance));
    }

    std::string target_str() const {
        std::ostringstream out;
        out << std::hex << committee_->target();
        return out.str();
    }

    static constexpr const char* kTcEscrow = "contract.escrow";
    static constexpr const char* kStakeEscrow = "contract.stake";
    static constexpr const char* kTreasury = "contract.treasury";

    Scenario sc_;
    std::int64_t duration_ms_ = 0;
    std::int64_t clock_ = 0;
    std::uint64_t seq_ = 0;
    std::priority_queue<QEvent, std::vector<QEvent>, std::greater<QEvent>> queue_;

    std::map<std::string, Ledger> ledgers_;
    GasLedger gas_;
    std::unique_ptr<IntermediaryRegistry> registry_;
    std::unique_ptr<CommitteeManager> committee_;
    std::vector<std::unique_ptr<TradeSession>> sessions_;
    std::vector<Phase> session_last_phase_;
    std::vector<std::size_t> session_moves_emitted_;
    std::vector<bool> payer_items_made_;
    std::vector<bool> payee_items_made_;
    std::map<std::string, std::vector<std::pair<std::size_t, TradeIntent>>> payer_jobs_;
    std::map<std::string, ItemInfo> items_;
    std::vector<ActorState> actors_;

    std::vector<TraceEvent> trace_;
    Metrics metrics_;
};

/// Convenience entry point mirroring the CLI's run subcommand.
inline RunResult run_scenario(Scenario scenario, std::optional<std::uint64_t> seed_override = std::nullopt) {
    Engine engine(std::move(scenario), seed_override);
    return engine.run();
}

}  // namespace xchx

#endif  // XCHX_ENGINE_HPP
