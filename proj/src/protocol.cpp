#include "lpos/protocol.hpp"

#include <algorithm>
#include <stdexcept>

#include "lpos/errors.hpp"

namespace lpos {

const char* decision_name(Decision d) {
    return d == Decision::Busy ? "busy" : "free";
}

uint32_t compute_lambda(uint32_t n_active, const LambdaPolicy& policy) {
    if (n_active == 0) throw NoQuorumError("lambda: no active reporters");
    if (policy.auto_half) return (n_active + 1) / 2;
    return std::clamp(policy.fixed, uint32_t(1), n_active);
}

void SensingConfig::validate() const {
    ope.validate();
    if (gamma < 1 || gamma > 63)
        throw std::invalid_argument("config: gamma out of range");
    if (ope.plain_bits < 2 * gamma + 1)
        throw std::invalid_argument("config: need plain_bits >= 2*gamma + 1");
    if (tau >> gamma) throw std::invalid_argument("config: tau wider than gamma bits");
    unsigned pad_bits = ope.plain_bits - gamma - 1;
    if (pad_bits < 64 && (padding >> pad_bits))
        throw std::invalid_argument("config: padding wider than its field");
    if (t_w < 1) throw std::invalid_argument("config: t_w must be positive");
    if (pi.has_value()) {
        pi->validate();
        if (pi->l != gamma)
            throw std::invalid_argument("config: comparison bit-length must equal gamma");
    }
}

PaddingBits SensingConfig::padding_bits() const {
    return {padding, ope.plain_bits - gamma - 1};
}

Decision oracle_decision(const std::vector<uint64_t>& rss, uint64_t tau,
                         uint32_t lambda) {
    if (rss.empty()) throw std::invalid_argument("oracle: empty report set");
    uint32_t above = 0;
    for (uint64_t r : rss)
        if (r > tau) above++;
    return above >= lambda ? Decision::Busy : Decision::Free;
}

// --- SuEngine ---

SuEngine::SuEngine(uint32_t id, SensingConfig config, ElGamalParams eg,
                   mpz_class fc_pk, ChannelState channel, DetRng rng,
                   ModExpMeter* meter)
    : id_(id),
      config_(std::move(config)),
      eg_(std::move(eg)),
      fc_pk_(std::move(fc_pk)),
      channel_(std::move(channel)),
      rng_(std::move(rng)),
      meter_(meter) {
    config_.validate();
    eg_.validate();
    if (eg_.l != config_.gamma)
        throw std::invalid_argument("su: comparison bit-length must equal gamma");
}

void SuEngine::set_group(const MemberView& view) {
    Bytes group_key = derive_group_key(view);
    ope_key_ = derive_ope_key(group_key, bytes_of("ope-v1"));
    epoch_ = view.epoch;
    has_group_ = true;
}

void SuEngine::set_rss(uint64_t r) {
    if (r >> config_.gamma) throw std::invalid_argument("su: rss wider than gamma");
    rss_ = r;
}

void SuEngine::set_params(ElGamalParams eg, mpz_class fc_pk) {
    eg_ = std::move(eg);
    fc_pk_ = std::move(fc_pk);
    if (eg_.l != config_.gamma)
        throw std::invalid_argument("su: comparison bit-length must equal gamma");
}

Outgoing SuEngine::start_round(uint64_t round) {
    if (!has_group_) throw ProtocolError("su: no group key established");
    uint64_t m = encode_report(config_.padding_bits(), rss_, config_.gamma,
                               config_.ope);
    OpeCiphertext ct = ope_encrypt(ope_key_, m, config_.ope);
    ope_encryptions_++;
    if (leak_rss_) ct.value = rss_;  // negative control: plaintext on the wire
    Frame f{FrameType::Report, round, epoch_,
            report_payload(id_, ct, config_.ope)};
    Outgoing out;
    out.src = id_;
    out.dst = kFcId;
    out.frame = f;
    out.wire = channel_.seal(frame_bytes(f));
    out.sealed = true;
    return out;
}

std::vector<Outgoing> SuEngine::handle_wire(const Bytes& wire) {
    Frame f = frame_from_bytes(channel_.open(wire));
    received_.push_back(f);
    if (f.type != FrameType::GtInit)
        throw ProtocolError("su: unexpected unicast frame");
    if (fail_comparisons_) return {};  // scripted mid-comparison fault

    GtInitMessage init = gt_init_from_payload(eg_, f.payload);
    GtResponse resp = gt_respond_exceeds(eg_, fc_pk_, rss_, init, rng_, meter_);
    Frame reply{FrameType::GtResp, f.round, epoch_, gt_resp_payload(eg_, resp)};
    Outgoing out;
    out.src = id_;
    out.dst = kFcId;
    out.frame = reply;
    out.wire = channel_.seal(frame_bytes(reply));
    out.sealed = true;
    return {out};
}

void SuEngine::handle_broadcast(const Frame& f) {
    received_.push_back(f);
    if (f.type == FrameType::Decision)
        last_decision_ = decision_from_payload(f.payload) ? Decision::Busy
                                                          : Decision::Free;
}

// --- FcEngine ---

FcEngine::FcEngine(SensingConfig config, DetRng rng, ModExpMeter* meter)
    : config_(std::move(config)), rng_(std::move(rng)), meter_(meter) {
    config_.validate();
    if (!config_.pi.has_value())
        throw std::invalid_argument("fc: config carries no comparison parameters");
    eg_ = *config_.pi;
    eg_.validate();
    if (eg_.l != config_.gamma)
        throw std::invalid_argument("fc: comparison bit-length must equal gamma");
    kp_ = elgamal_keygen(eg_, rng_, meter_);
    initiator_.emplace(eg_, kp_, config_.tau, rng_.fork("gt-init"), meter_);
}

void FcEngine::add_channel(uint32_t su_id, ChannelState ch) {
    channels_[su_id] = std::move(ch);
}

void FcEngine::remove_channel(uint32_t su_id) { channels_.erase(su_id); }

void FcEngine::observe_epoch(uint64_t epoch) {
    if (epoch > epoch_) epoch_ = epoch;
}

void FcEngine::handle_broadcast(const Frame& f) {
    received_.push_back(f);
    if (f.type == FrameType::EpochUpdate) observe_epoch(f.epoch);
}

void FcEngine::refresh_pi() {
    kp_ = elgamal_keygen(eg_, rng_, meter_);
    initiator_.emplace(eg_, kp_, config_.tau, rng_.fork("gt-init"), meter_);
}

void FcEngine::begin_round(uint64_t round) {
    if (phase_ != Phase::Idle && phase_ != Phase::Done)
        throw ProtocolError("fc: round already in flight");
    phase_ = Phase::Collecting;
    round_ = round;
    reports_.clear();
    distinct_.clear();
    probe_ = {};
    outcome_ = {};
    outcome_.round = round;
    outcome_.epoch = epoch_;
}

std::vector<Outgoing> FcEngine::handle_wire(uint32_t from, const Bytes& wire) {
    auto ch = channels_.find(from);
    if (ch == channels_.end()) throw ChannelError("fc: no channel for sender");
    Frame f = frame_from_bytes(ch->second.open(wire));
    received_.push_back(f);

    if (f.round != round_) return {};  // stale frame from an earlier round

    switch (f.type) {
        case FrameType::Report: {
            if (phase_ != Phase::Collecting) return {};  // past the deadline
            if (f.epoch != epoch_) {
                outcome_.fault += "epoch-mismatch report rejected;";
                return {};
            }
            ReportPayload rp = report_from_payload(f.payload, config_.ope);
            if (rp.user_id != from)
                throw ProtocolError("fc: report id does not match channel");
            reports_.emplace(rp.user_id, rp.ct);  // first report wins
            return {};
        }
        case FrameType::GtResp: {
            if (phase_ != Phase::Comparing || !probe_.outstanding)
                throw ProtocolError("fc: unsolicited comparison response");
            if (from != probe_.user)
                throw ProtocolError("fc: comparison response from wrong user");
            GtResponse resp = gt_resp_from_payload(eg_, f.payload);
            if (resp.session != probe_.session)
                throw ProtocolError("fc: comparison response for wrong session");
            probe_.outstanding = false;
            int b = initiator_->finalize(resp) ? 0 : 1;  // b = NOT GT(r, tau)
            return advance(b);
        }
        default:
            throw ProtocolError("fc: unexpected frame type");
    }
}

std::vector<Outgoing> FcEngine::on_idle() {
    switch (phase_) {
        case Phase::Collecting: {
            if (reports_.empty()) {
                outcome_.skipped = true;
                outcome_.fault += "no reports: no quorum;";
                phase_ = Phase::Done;
                return {};
            }
            rebuild_distinct();
            phase_ = Phase::Comparing;
            return {emit_probe(distinct_.size() - 1, Purpose::Max)};
        }
        case Phase::Comparing:
            if (probe_.outstanding) return handle_fault();
            return {};
        default:
            return {};
    }
}

void FcEngine::rebuild_distinct() {
    std::vector<std::pair<OpeCiphertext, uint32_t>> sorted;
    sorted.reserve(reports_.size());
    for (const auto& [user, ct] : reports_) sorted.emplace_back(ct, user);
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.first.value != b.first.value) return a.first.value < b.first.value;
        return a.second < b.second;
    });
    distinct_.clear();
    for (const auto& [ct, user] : sorted) {
        if (!distinct_.empty() && distinct_.back().ct == ct) {
            distinct_.back().multiplicity++;
        } else {
            distinct_.push_back({ct, 1, user});
        }
    }
    outcome_.n_active = uint32_t(reports_.size());
    outcome_.lambda = compute_lambda(outcome_.n_active, config_.lambda);
    outcome_.distinct_values = uint32_t(distinct_.size());
}

Outgoing FcEngine::emit_probe(size_t index, Purpose purpose) {
    GtInitMessage msg = initiator_->initiate();
    uint32_t user = distinct_[index].representative;
    probe_ = {msg.session, user, index, purpose, true};
    outcome_.ym_invocations++;
    Frame f{FrameType::GtInit, round_, epoch_, gt_init_payload(eg_, msg)};
    Outgoing out;
    out.src = kFcId;
    out.dst = user;
    out.frame = f;
    out.wire = channels_.at(user).seal(frame_bytes(f));
    out.sealed = true;
    return out;
}

std::vector<Outgoing> FcEngine::advance(int b) {
    size_t u = distinct_.size();
    switch (probe_.purpose) {
        case Purpose::Max:
            if (b == 1) return {emit_decision(Decision::Free, DecisionPath::MaxShortcut)};
            return {emit_probe(0, Purpose::Min)};
        case Purpose::Min:
            if (b == 0) return {emit_decision(Decision::Busy, DecisionPath::MinShortcut)};
            if (u < 2) throw ProtocolError("fc: inconsistent comparison results");
            lo_ = 0;
            hi_ = u - 1;
            break;
        case Purpose::Search:
            if (b == 1)
                lo_ = probe_.index;
            else
                hi_ = probe_.index;
            break;
    }
    if (hi_ - lo_ == 1) {
        // hi_ is the lowest distinct index whose value exceeds tau.
        uint64_t z = 0;
        for (size_t i = hi_; i < distinct_.size(); i++) z += distinct_[i].multiplicity;
        Decision d = z >= outcome_.lambda ? Decision::Busy : Decision::Free;
        return {emit_decision(d, DecisionPath::VoteCount)};
    }
    return {emit_probe(lo_ + (hi_ - lo_) / 2, Purpose::Search)};
}

Outgoing FcEngine::emit_decision(Decision d, DecisionPath path) {
    outcome_.decided = true;
    outcome_.decision = d;
    outcome_.path = path;
    phase_ = Phase::Done;
    Frame f{FrameType::Decision, round_, epoch_,
            decision_payload(d == Decision::Busy)};
    Outgoing out;
    out.src = kFcId;
    out.dst = kBroadcastId;
    out.frame = f;
    out.wire = frame_bytes(f);
    out.sealed = false;
    return out;
}

std::vector<Outgoing> FcEngine::handle_fault() {
    initiator_->abandon(probe_.session);
    uint32_t failed = probe_.user;
    probe_ = {};
    reports_.erase(failed);
    outcome_.dropped_mid_round.push_back(failed);
    if (!outcome_.restarted) {
        outcome_.restarted = true;
        outcome_.fault += "comparison fault, user dropped, round restarted;";
        if (reports_.empty()) {
            outcome_.skipped = true;
            outcome_.fault += "no reports left: no quorum;";
            phase_ = Phase::Done;
            return {};
        }
        rebuild_distinct();
        return {emit_probe(distinct_.size() - 1, Purpose::Max)};
    }
    outcome_.aborted = true;
    outcome_.fault += "second comparison fault, round aborted;";
    phase_ = Phase::Done;
    return {};
}

}  // namespace lpos
