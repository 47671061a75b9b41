#include "lpos/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "lpos/errors.hpp"

namespace lpos {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

uint64_t parse_u64(const std::string& s, const char* what) {
    try {
        size_t pos = 0;
        unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("scenario: bad ") + what + ": " + s);
    }
}

bool parse_bool(const std::string& s, const char* what) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::invalid_argument(std::string("scenario: bad ") + what + ": " + s);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace

void Scenario::validate() const {
    if (n < 1) throw std::invalid_argument("scenario: need at least one user");
    if (rounds < 1) throw std::invalid_argument("scenario: need at least one round");
    if (gamma < 1 || gamma > 63)
        throw std::invalid_argument("scenario: gamma out of range");
    ope.validate();
    if (ope.plain_bits < 2 * gamma + 1)
        throw std::invalid_argument("scenario: need plain_bits >= 2*gamma + 1");
    if (gamma < 64 && (tau >> gamma))
        throw std::invalid_argument("scenario: tau wider than gamma bits");
    if (!lambda.auto_half && lambda.fixed < 1)
        throw std::invalid_argument("scenario: fixed lambda must be positive");
    if (rss_sd_dbm < 0)
        throw std::invalid_argument("scenario: negative rss spread");
    if (rss_model == RssModel::Explicit && explicit_rss.size() != rounds)
        throw std::invalid_argument("scenario: explicit rss needs one row per round");
    if (rss_model == RssModel::Explicit) {
        for (const auto& row : explicit_rss)
            for (uint64_t v : row)
                if (v >> gamma)
                    throw std::invalid_argument("scenario: rss wider than gamma bits");
    }
    for (const auto& e : events) {
        if (e.round < 1)
            throw std::invalid_argument("scenario: event round must be >= 1");
        if (e.drop + e.join + e.leave + e.fail == 0)
            throw std::invalid_argument("scenario: empty event");
    }
}

Scenario scenario_from_text(const std::string& text) {
    Scenario s;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("scenario: expected key = value: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));

        if (key == "n") {
            s.n = uint32_t(parse_u64(val, "n"));
        } else if (key == "rounds") {
            s.rounds = uint32_t(parse_u64(val, "rounds"));
        } else if (key == "seed") {
            s.seed = parse_u64(val, "seed");
        } else if (key == "gamma") {
            s.gamma = unsigned(parse_u64(val, "gamma"));
        } else if (key == "tau") {
            s.tau = parse_u64(val, "tau");
        } else if (key == "lambda") {
            s.lambda = val == "auto"
                           ? LambdaPolicy::half_voting()
                           : LambdaPolicy::fixed_threshold(
                                 uint32_t(parse_u64(val, "lambda")));
        } else if (key == "profile") {
            if (val == "nist")
                s.nist_profile = true;
            else if (val == "test")
                s.nist_profile = false;
            else
                throw std::invalid_argument("scenario: unknown profile: " + val);
        } else if (key == "plain_bits") {
            s.ope.plain_bits = unsigned(parse_u64(val, "plain_bits"));
        } else if (key == "cipher_bits") {
            s.ope.cipher_bits = unsigned(parse_u64(val, "cipher_bits"));
        } else if (key == "rss") {
            if (val == "uniform")
                s.rss_model = RssModel::Uniform;
            else if (val == "normal")
                s.rss_model = RssModel::NormalDbm;
            else if (val == "explicit")
                s.rss_model = RssModel::Explicit;
            else
                throw std::invalid_argument("scenario: unknown rss model: " + val);
        } else if (key == "rss_mean") {
            s.rss_mean_dbm = std::stod(val);
        } else if (key == "rss_sd") {
            s.rss_sd_dbm = std::stod(val);
        } else if (key == "rss_row") {
            std::vector<uint64_t> row;
            for (const auto& tok : split_ws(val))
                row.push_back(parse_u64(tok, "rss_row entry"));
            s.explicit_rss.push_back(std::move(row));
        } else if (key == "parallel") {
            s.parallel_bus = parse_bool(val, "parallel");
        } else if (key == "channel") {
            if (val == "secure")
                s.channel_mode = ChannelMode::Secure;
            else if (val == "null")
                s.channel_mode = ChannelMode::Null;
            else
                throw std::invalid_argument("scenario: unknown channel mode: " + val);
        } else if (key == "refresh_pi") {
            s.refresh_pi_on_update = parse_bool(val, "refresh_pi");
        } else if (key == "leak_rss") {
            s.debug_leak_rss = parse_bool(val, "leak_rss");
        } else if (key == "event") {
            // event = ROUND op COUNT [op COUNT ...]  with op in drop|join|leave|fail
            auto toks = split_ws(val);
            if (toks.size() < 3 || toks.size() % 2 == 0)
                throw std::invalid_argument("scenario: bad event: " + val);
            ScenarioEvent e;
            e.round = uint32_t(parse_u64(toks[0], "event round"));
            for (size_t i = 1; i + 1 < toks.size(); i += 2) {
                uint32_t count = uint32_t(parse_u64(toks[i + 1], "event count"));
                if (toks[i] == "drop")
                    e.drop += count;
                else if (toks[i] == "join")
                    e.join += count;
                else if (toks[i] == "leave")
                    e.leave += count;
                else if (toks[i] == "fail")
                    e.fail += count;
                else
                    throw std::invalid_argument("scenario: unknown event op: " + toks[i]);
            }
            s.events.push_back(e);
        } else {
            throw std::invalid_argument("scenario: unknown key: " + key);
        }
    }
    s.validate();
    return s;
}

Scenario scenario_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scenario: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_text(buf.str());
}

uint64_t quantize_dbm(double dbm, unsigned gamma) {
    constexpr double kFloorDbm = -120.0;
    constexpr double kStepDb = 0.01;
    uint64_t top = (gamma >= 64) ? ~uint64_t(0) : ((uint64_t(1) << gamma) - 1);
    double steps = (dbm - kFloorDbm) / kStepDb;
    if (steps <= 0) return 0;
    if (steps >= double(top)) return top;
    return uint64_t(std::llround(steps));
}

const ElGamalParams& profile_group(bool nist, unsigned l) {
    static std::mutex mu;
    static std::map<std::pair<bool, unsigned>, ElGamalParams> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(nist, l);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    // The comparison group is public deployment material, so a fixed
    // generation seed per profile is fine and saves repeated prime searches.
    DetRng rng(uint64_t(0x1905C0DE), nist ? "group-nist" : "group-test");
    ElGamalParams params = nist ? elgamal_setup(1024, 160, rng, l)
                                : elgamal_setup(64, 32, rng, l);
    return cache.emplace(key, std::move(params)).first->second;
}

// --- Simulation ---

Simulation::Simulation(Scenario s)
    : s_(std::move(s)), rng_(0, ""), rss_rng_(0, "") {
    s_.validate();
    rng_ = DetRng(s_.seed, "sim");
    rss_rng_ = DetRng(s_.seed, "rss");
    setup();
}

void Simulation::setup() {
    config_.gamma = s_.gamma;
    config_.tau = s_.tau;
    config_.ope = s_.ope;
    config_.lambda = s_.lambda;
    config_.refresh_pi_on_update = s_.refresh_pi_on_update;
    config_.pi = profile_group(s_.nist_profile, s_.gamma);
    unsigned pad_bits = s_.ope.plain_bits - s_.gamma - 1;
    DetRng pad_rng = rng_.fork("padding");
    config_.padding = pad_bits >= 64 ? pad_rng.u64()
                                     : pad_rng.u64_below(uint64_t(1) << pad_bits);
    config_.validate();

    DetRng fc_ident_rng = rng_.fork("identity-0");
    registry_.add(make_identity(kFcId, fc_ident_rng));
    fc_.emplace(config_, rng_.fork("fc"), &fc_meter_);

    std::vector<uint32_t> ids;
    for (uint32_t i = 1; i <= s_.n; i++) ids.push_back(i);
    tree_.emplace(ids, rng_.fork("tree"));
    max_id_ = s_.n;

    for (uint32_t id : ids) add_member_engine(id);
}

void Simulation::add_member_engine(uint32_t id) {
    DetRng ident_rng = rng_.fork("identity-" + std::to_string(id));
    registry_.add(make_identity(id, ident_rng));
    auto [fc_end, su_end] = channel_establish(registry_, kFcId, id, s_.channel_mode);
    fc_->add_channel(id, std::move(fc_end));
    ModExpMeter* meter = &su_meters_[id];  // map nodes give stable addresses
    SuEngine eng(id, config_, fc_->params(), fc_->pk(), std::move(su_end),
                 rng_.fork("su-" + std::to_string(id)), meter);
    eng.set_group(tree_->view(id));
    if (s_.debug_leak_rss) eng.set_leak_rss(true);
    su_.emplace(id, std::move(eng));
}

std::vector<uint32_t> Simulation::members() const {
    std::vector<uint32_t> out;
    for (const auto& [id, eng] : su_) out.push_back(id);
    return out;
}

std::vector<uint32_t> Simulation::active_users() const {
    std::vector<uint32_t> out;
    for (const auto& [id, eng] : su_)
        if (!dropped_.count(id)) out.push_back(id);
    return out;
}

void Simulation::record(const Outgoing& out, RoundTranscript& t) {
    t.messages.push_back({out.src, out.dst, out.frame.type, out.sealed, out.wire});
    if (out.src == kFcId)
        t.metrics.bytes_fc_to_su += out.wire.size();
    else
        t.metrics.bytes_su_to_fc += out.wire.size();
    if (out.frame.type == FrameType::GtInit || out.frame.type == FrameType::GtResp)
        t.metrics.comparison_bytes += out.wire.size();
}

void Simulation::apply_events(RoundTranscript& t) {
    for (const auto& e : s_.events) {
        if (e.round != round_) continue;

        if (e.drop > 0) {
            std::vector<uint32_t> live = active_users();
            if (e.drop > live.size())
                throw std::invalid_argument("sim: drop count exceeds active users");
            for (size_t i = 0; i < e.drop; i++)
                dropped_.insert(live[live.size() - 1 - i]);
        }

        if (e.join > 0 || e.leave > 0) {
            std::vector<uint32_t> current = members();
            if (e.leave > current.size())
                throw std::invalid_argument("sim: leave count exceeds membership");
            std::vector<uint32_t> leavers(current.end() - e.leave, current.end());
            std::vector<uint32_t> joiners;
            for (uint32_t i = 0; i < e.join; i++) joiners.push_back(++max_id_);

            tree_->update(joiners, leavers);
            for (uint32_t id : leavers) {
                fc_->remove_channel(id);
                su_.erase(id);
                su_meters_.erase(id);
                dropped_.erase(id);
            }
            for (uint32_t id : joiners) add_member_engine(id);

            if (config_.refresh_pi_on_update) {
                fc_->refresh_pi();
                for (auto& [id, eng] : su_) eng.set_params(fc_->params(), fc_->pk());
            }
            for (auto& [id, eng] : su_) eng.set_group(tree_->view(id));

            // The sponsoring member broadcasts the refreshed blinded keys;
            // boundary traffic is delivered before the round starts.
            const auto& blinded = tree_->last_broadcast();
            Frame f{FrameType::EpochUpdate, round_, tree_->epoch(),
                    rekey_payload(blinded)};
            uint32_t src = members().front();
            Outgoing out{src, kBroadcastId, f, frame_bytes(f), false};
            record(out, t);
            t.metrics.rekey_messages += blinded.size();
            fc_->handle_broadcast(f);
            for (auto& [id, eng] : su_)
                if (id != src) eng.handle_broadcast(f);
        }

        if (e.fail > 0) {
            std::vector<uint32_t> live = active_users();
            if (e.fail > live.size())
                throw std::invalid_argument("sim: fail count exceeds active users");
            for (size_t i = 0; i < e.fail; i++) {
                uint32_t id = live[live.size() - 1 - i];
                su_.at(id).set_fail_comparisons(true);
                failers_.push_back(id);
            }
        }
    }
}

std::vector<uint64_t> Simulation::round_rss(size_t count) {
    std::vector<uint64_t> out;
    out.reserve(count);
    if (s_.rss_model == RssModel::Explicit) {
        const auto& row = s_.explicit_rss.at(size_t(round_ - 1));
        if (row.size() != count)
            throw std::invalid_argument("sim: explicit rss row does not match active users");
        return row;
    }
    DetRng rr = rss_rng_.fork("round-" + std::to_string(round_));
    uint64_t top = (s_.gamma >= 64) ? ~uint64_t(0) : (uint64_t(1) << s_.gamma);
    for (size_t i = 0; i < count; i++) {
        if (s_.rss_model == RssModel::Uniform) {
            out.push_back(rr.u64_below(top));
        } else {
            double u1 = std::max(rr.unit_double(), 1e-12);
            double u2 = rr.unit_double();
            double z = std::sqrt(-2.0 * std::log(u1)) *
                       std::cos(2.0 * 3.14159265358979323846 * u2);
            out.push_back(quantize_dbm(s_.rss_mean_dbm + s_.rss_sd_dbm * z, s_.gamma));
        }
    }
    return out;
}

RoundTranscript Simulation::run_round() {
    RoundTranscript t;
    uint64_t modexp_before = fc_meter_.count;
    for (const auto& [id, m] : su_meters_) modexp_before += m.count;
    uint64_t ope_before = 0;
    for (const auto& [id, eng] : su_) ope_before += eng.ope_encryptions();

    apply_events(t);

    std::vector<uint32_t> actives = active_users();
    std::vector<Outgoing> queue;
    std::vector<uint64_t> rss = round_rss(actives.size());
    t.active_users = actives;
    t.rss = rss;

    fc_->begin_round(round_);
    for (size_t i = 0; i < actives.size(); i++) {
        SuEngine& eng = su_.at(actives[i]);
        eng.set_rss(rss[i]);
        Outgoing out = eng.start_round(round_);
        t.report_payloads[actives[i]] = out.frame.payload;
        queue.push_back(std::move(out));
    }

    pump(std::move(queue), t);

    t.outcome = fc_->outcome();
    t.epoch = tree_->epoch();

    for (uint32_t id : actives) {
        bool dropped_mid = std::find(t.outcome.dropped_mid_round.begin(),
                                     t.outcome.dropped_mid_round.end(),
                                     id) != t.outcome.dropped_mid_round.end();
        if (!dropped_mid) t.survivors.push_back(id);
    }
    if (!t.survivors.empty()) {
        std::vector<uint64_t> srss;
        for (size_t i = 0; i < actives.size(); i++)
            if (std::find(t.survivors.begin(), t.survivors.end(), actives[i]) !=
                t.survivors.end())
                srss.push_back(rss[i]);
        uint32_t lam = compute_lambda(uint32_t(srss.size()), s_.lambda);
        t.oracle = oracle_decision(srss, s_.tau, lam);
        t.oracle_valid = true;
    }

    t.metrics.ym_invocations = t.outcome.ym_invocations;
    uint64_t modexp_after = fc_meter_.count;
    for (const auto& [id, m] : su_meters_) modexp_after += m.count;
    uint64_t ope_after = 0;
    for (const auto& [id, eng] : su_) ope_after += eng.ope_encryptions();
    t.metrics.modexp_count = modexp_after - modexp_before;
    t.metrics.ope_encryptions = ope_after - ope_before;

    t.fc_view = fc_->received();
    fc_->clear_received();
    for (auto& [id, eng] : su_) {
        t.su_views[id] = eng.received();
        eng.clear_received();
    }

    for (uint32_t id : failers_)
        if (su_.count(id)) su_.at(id).set_fail_comparisons(false);
    failers_.clear();

    round_++;
    return t;
}

void Simulation::pump(std::vector<Outgoing> queue, RoundTranscript& t) {
    while (true) {
        if (queue.empty()) {
            if (fc_->round_complete()) return;
            std::vector<Outgoing> idle = fc_->on_idle();
            if (idle.empty()) {
                if (fc_->round_complete()) return;
                throw ProtocolError("sim: bus deadlock");
            }
            queue = std::move(idle);
            continue;
        }

        for (const Outgoing& out : queue) record(out, t);

        // Broadcasts first (they carry no replies), then unicast waves
        // grouped by receiver: the fusion center drains before the users,
        // receivers in ascending id, messages per receiver in source order.
        std::vector<Outgoing> next;
        std::map<uint32_t, std::vector<const Outgoing*>> by_receiver;
        for (const Outgoing& out : queue) {
            if (out.dst == kBroadcastId) {
                Frame f = frame_from_bytes(out.wire);
                if (out.src != kFcId) fc_->handle_broadcast(f);
                for (auto& [id, eng] : su_)
                    if (id != out.src) eng.handle_broadcast(f);
            } else {
                by_receiver[out.dst].push_back(&out);
            }
        }
        for (auto& [dst, msgs] : by_receiver)
            std::stable_sort(msgs.begin(), msgs.end(),
                             [](const Outgoing* a, const Outgoing* b) {
                                 return a->src < b->src;
                             });

        auto deliver_group = [this](uint32_t dst,
                                    const std::vector<const Outgoing*>& msgs) {
            std::vector<Outgoing> outs;
            for (const Outgoing* m : msgs) {
                std::vector<Outgoing> r;
                if (dst == kFcId) {
                    r = fc_->handle_wire(m->src, m->wire);
                } else {
                    auto it = su_.find(dst);
                    if (it == su_.end())
                        throw ProtocolError("sim: message to unknown engine");
                    r = it->second.handle_wire(m->wire);
                }
                outs.insert(outs.end(), std::make_move_iterator(r.begin()),
                            std::make_move_iterator(r.end()));
            }
            return outs;
        };

        if (s_.parallel_bus) {
            // Receiver groups touch disjoint engines, so they can run
            // concurrently; merging in receiver order reproduces the
            // serial transcript byte for byte.
            std::vector<std::pair<uint32_t, std::future<std::vector<Outgoing>>>> futs;
            for (auto& [dst, msgs] : by_receiver)
                futs.emplace_back(dst, std::async(std::launch::async, deliver_group,
                                                  dst, std::cref(msgs)));
            for (auto& [dst, fut] : futs) {
                std::vector<Outgoing> outs = fut.get();
                next.insert(next.end(), std::make_move_iterator(outs.begin()),
                            std::make_move_iterator(outs.end()));
            }
        } else {
            for (auto& [dst, msgs] : by_receiver) {
                std::vector<Outgoing> outs = deliver_group(dst, msgs);
                next.insert(next.end(), std::make_move_iterator(outs.begin()),
                            std::make_move_iterator(outs.end()));
            }
        }
        queue = std::move(next);
    }
}

std::vector<RoundTranscript> Simulation::run_all() {
    std::vector<RoundTranscript> out;
    out.reserve(s_.rounds);
    for (uint32_t i = 0; i < s_.rounds; i++) out.push_back(run_round());
    return out;
}

std::vector<RoundTranscript> run_scenario(const Scenario& s) {
    Simulation sim(s);
    return sim.run_all();
}

// --- taint checking ---

std::string TaintHit::location_key() const {
    std::ostringstream os;
    os << "c" << clause << "|" << view << "|" << frame_type_name(type) << "|o"
       << owner << "|v" << viewer << "|+" << offset;
    return os.str();
}

std::string TaintHit::classwide_key() const {
    std::ostringstream os;
    os << "c" << clause << "|" << view << "|" << frame_type_name(type);
    return os.str();
}

namespace {

Bytes gamma_pattern(uint64_t value, unsigned gamma) {
    Bytes b;
    put_uint_be(b, value, (gamma + 7) / 8);
    return b;
}

void scan_into(std::vector<TaintHit>& hits, const Bytes& hay, const Bytes& needle,
               int clause, const std::string& view, FrameType type, uint32_t owner,
               uint32_t viewer) {
    for (size_t off : find_pattern_offsets(hay, needle))
        hits.push_back({clause, view, type, owner, viewer, off});
}

}  // namespace

std::vector<TaintHit> taint_scan(const RoundTranscript& t, const SensingConfig& cfg) {
    std::vector<TaintHit> hits;
    size_t enc_width = (cfg.ope.plain_bits + 7) / 8;

    // Clause 1: a raw reading (or its padded encoding) visible to the
    // fusion center or on the wire.
    for (size_t i = 0; i < t.active_users.size(); i++) {
        uint32_t user = t.active_users[i];
        Bytes raw = gamma_pattern(t.rss[i], cfg.gamma);
        Bytes enc;
        put_uint_be(enc,
                    encode_report(cfg.padding_bits(), t.rss[i], cfg.gamma, cfg.ope),
                    enc_width);
        for (const Frame& f : t.fc_view) {
            scan_into(hits, f.payload, raw, 1, "fc", f.type, user, kFcId);
            scan_into(hits, f.payload, enc, 1, "fc", f.type, user, kFcId);
        }
        for (const MessageRecord& m : t.messages) {
            scan_into(hits, m.wire, raw, 1, "attacker", m.type, user, kBroadcastId);
            scan_into(hits, m.wire, enc, 1, "attacker", m.type, user, kBroadcastId);
        }
    }

    // Clause 2: the threshold visible to any secondary user.
    Bytes tau_pat = gamma_pattern(cfg.tau, cfg.gamma);
    for (const auto& [viewer, frames] : t.su_views)
        for (const Frame& f : frames)
            scan_into(hits, f.payload, tau_pat, 2, "su", f.type, kFcId, viewer);

    // Clause 3: one user's report payload visible to another user.
    for (const auto& [viewer, frames] : t.su_views)
        for (const Frame& f : frames)
            for (const auto& [owner, payload] : t.report_payloads) {
                if (owner == viewer) continue;
                scan_into(hits, f.payload, payload, 3, "su", f.type, owner, viewer);
            }

    return hits;
}

TaintReport sentinel_taint_suite(const Scenario& base, int reruns) {
    if (base.channel_mode == ChannelMode::Null)
        throw std::invalid_argument("taint: refusing to scan null channels");
    if (reruns < 1) throw std::invalid_argument("taint: need at least one rerun");

    size_t runs = size_t(reruns) + 1;
    DetRng seeder(base.seed, "sentinel");

    // location key -> number of runs it appeared in (same round, same spot)
    std::map<std::string, size_t> location_runs;
    // classwide key -> number of runs where it was present in every round
    std::map<std::string, size_t> classwide_runs;

    TaintReport report;
    SensingConfig cfg;
    for (size_t k = 0; k < runs; k++) {
        Scenario s = base;
        s.seed = seeder.u64();
        // Fresh secret material per run: high-entropy readings and a fresh
        // threshold, so only structural leaks can recur.
        s.rss_model = RssModel::Uniform;
        s.explicit_rss.clear();
        uint64_t top = (s.gamma >= 64) ? ~uint64_t(0) : (uint64_t(1) << s.gamma);
        s.tau = seeder.u64_below(top);

        Simulation sim(s);
        cfg = sim.config();
        std::set<std::string> run_locations;
        std::map<std::string, size_t> class_round_counts;
        for (uint32_t r = 0; r < s.rounds; r++) {
            RoundTranscript t = sim.run_round();
            report.rounds_checked++;
            std::set<std::string> round_classes;
            for (const TaintHit& h : taint_scan(t, cfg)) {
                run_locations.insert(std::to_string(r) + "@" + h.location_key());
                round_classes.insert(h.classwide_key());
            }
            for (const std::string& c : round_classes) class_round_counts[c]++;
        }
        for (const std::string& loc : run_locations) location_runs[loc]++;
        for (const auto& [c, cnt] : class_round_counts)
            if (cnt == s.rounds) classwide_runs[c]++;
    }

    for (const auto& [loc, cnt] : location_runs)
        if (cnt == runs)
            report.leaks.push_back("persistent pattern at round " + loc);
    for (const auto& [c, cnt] : classwide_runs)
        if (cnt == runs)
            report.leaks.push_back("classwide pattern " + c);
    report.pass = report.leaks.empty();
    return report;
}

// --- CSV export ---

std::string metrics_csv(const std::vector<RoundTranscript>& rounds) {
    std::ostringstream os;
    os << "round,n_active,decision,ym_invocations,bytes_su_to_fc,bytes_fc_to_su,"
          "ope_encryptions,modexp_count,rekey_messages\n";
    for (const RoundTranscript& t : rounds) {
        const char* decision = t.outcome.aborted   ? "abort"
                               : t.outcome.skipped ? "skip"
                                                   : decision_name(t.outcome.decision);
        os << t.outcome.round << "," << t.outcome.n_active << "," << decision << ","
           << t.metrics.ym_invocations << "," << t.metrics.bytes_su_to_fc << ","
           << t.metrics.bytes_fc_to_su << "," << t.metrics.ope_encryptions << ","
           << t.metrics.modexp_count << "," << t.metrics.rekey_messages << "\n";
    }
    return os.str();
}

void write_metrics_csv(const std::string& path,
                       const std::vector<RoundTranscript>& rounds) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("csv: cannot open " + path);
    out << metrics_csv(rounds);
}

}  // namespace lpos
