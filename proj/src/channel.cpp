#include "lpos/channel.hpp"

#include <stdexcept>

#include <sodium.h>

#include "lpos/errors.hpp"
#include "lpos/hash.hpp"

namespace lpos {

namespace {

[[maybe_unused]] const int kSodiumReady = sodium_init();

constexpr size_t kTagBytes = crypto_aead_chacha20poly1305_ietf_ABYTES;

void counter_nonce(uint64_t ctr, uint8_t out[crypto_aead_chacha20poly1305_ietf_NPUBBYTES]) {
    std::fill(out, out + crypto_aead_chacha20poly1305_ietf_NPUBBYTES, uint8_t(0));
    for (int i = 0; i < 8; i++)
        out[crypto_aead_chacha20poly1305_ietf_NPUBBYTES - 1 - i] =
            uint8_t(ctr >> (8 * i));
}

std::array<uint8_t, 32> direction_key(const Bytes& pair_key, uint32_t from,
                                      uint32_t to) {
    Bytes ctx;
    put_u32(ctx, from);
    put_u32(ctx, to);
    Bytes out = kdf(pair_key, "lpos-chan-dir", ctx, 32);
    std::array<uint8_t, 32> k;
    std::copy(out.begin(), out.end(), k.begin());
    return k;
}

}  // namespace

Identity make_identity(uint32_t id, DetRng& rng) {
    Identity ident;
    ident.id = id;
    Bytes raw = rng.bytes(32);
    std::copy(raw.begin(), raw.end(), ident.sk.begin());
    crypto_scalarmult_base(ident.pk.data(), ident.sk.data());
    return ident;
}

void IdentityRegistry::add(const Identity& ident) {
    if (!table_.emplace(ident.id, ident).second)
        throw std::invalid_argument("registry: duplicate identity id");
}

const Identity& IdentityRegistry::get(uint32_t id) const {
    auto it = table_.find(id);
    if (it == table_.end()) throw ChannelError("registry: unknown identity");
    return it->second;
}

bool IdentityRegistry::has(uint32_t id) const { return table_.count(id) != 0; }

std::pair<ChannelState, ChannelState> channel_establish(
    const IdentityRegistry& registry, uint32_t a_id, uint32_t b_id,
    ChannelMode mode) {
    if (a_id == b_id) throw std::invalid_argument("channel: identical endpoints");
    const Identity& a = registry.get(a_id);
    const Identity& b = registry.get(b_id);

    std::array<uint8_t, 32> dh;
    if (crypto_scalarmult(dh.data(), a.sk.data(), b.pk.data()) != 0)
        throw ChannelError("channel: degenerate shared secret");

    // Bind the pair key to both identities, lower id first.
    const Identity& lo = a.id < b.id ? a : b;
    const Identity& hi = a.id < b.id ? b : a;
    Bytes ctx;
    put_u32(ctx, lo.id);
    ctx.insert(ctx.end(), lo.pk.begin(), lo.pk.end());
    put_u32(ctx, hi.id);
    ctx.insert(ctx.end(), hi.pk.begin(), hi.pk.end());
    Bytes pair_key =
        kdf(Bytes(dh.begin(), dh.end()), "lpos-pair-key", ctx, 32);

    ChannelState for_a, for_b;
    for_a.mode_ = mode;
    for_b.mode_ = mode;
    for_a.send_key_ = direction_key(pair_key, a_id, b_id);
    for_a.recv_key_ = direction_key(pair_key, b_id, a_id);
    for_b.send_key_ = for_a.recv_key_;
    for_b.recv_key_ = for_a.send_key_;
    return {for_a, for_b};
}

Bytes ChannelState::seal(const Bytes& plaintext) {
    Bytes wire;
    put_u64(wire, send_ctr_);
    if (mode_ == ChannelMode::Null) {
        wire.insert(wire.end(), plaintext.begin(), plaintext.end());
        send_ctr_++;
        return wire;
    }
    uint8_t nonce[crypto_aead_chacha20poly1305_ietf_NPUBBYTES];
    counter_nonce(send_ctr_, nonce);
    Bytes ct(plaintext.size() + kTagBytes);
    unsigned long long ct_len = 0;
    crypto_aead_chacha20poly1305_ietf_encrypt(
        ct.data(), &ct_len, plaintext.data(), plaintext.size(), nullptr, 0, nullptr,
        nonce, send_key_.data());
    ct.resize(size_t(ct_len));
    wire.insert(wire.end(), ct.begin(), ct.end());
    send_ctr_++;
    return wire;
}

Bytes ChannelState::open(const Bytes& wire) {
    if (wire.size() < 8) throw ChannelError("channel: truncated frame");
    ByteReader r(wire);
    uint64_t ctr = r.u64();
    if (ctr != recv_ctr_) throw ChannelError("channel: nonce out of sequence");
    Bytes body = r.take(r.remaining());
    if (mode_ == ChannelMode::Null) {
        recv_ctr_++;
        return body;
    }
    if (body.size() < kTagBytes) throw ChannelError("channel: truncated frame");
    uint8_t nonce[crypto_aead_chacha20poly1305_ietf_NPUBBYTES];
    counter_nonce(ctr, nonce);
    Bytes pt(body.size() - kTagBytes);
    unsigned long long pt_len = 0;
    if (crypto_aead_chacha20poly1305_ietf_decrypt(pt.data(), &pt_len, nullptr,
                                                  body.data(), body.size(), nullptr,
                                                  0, nonce, recv_key_.data()) != 0)
        throw ChannelError("channel: authentication failed");
    pt.resize(size_t(pt_len));
    recv_ctr_++;
    return pt;
}

}  // namespace lpos
