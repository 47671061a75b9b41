#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>

#include "lpos/bytes.hpp"
#include "lpos/rng.hpp"

namespace lpos {

// Static X25519 identity key pair.
struct Identity {
    uint32_t id = 0;
    std::array<uint8_t, 32> sk{};
    std::array<uint8_t, 32> pk{};
};

Identity make_identity(uint32_t id, DetRng& rng);

class IdentityRegistry {
  public:
    void add(const Identity& ident);        // duplicate id → parameter error
    const Identity& get(uint32_t id) const;  // unknown id → ChannelError
    bool has(uint32_t id) const;

  private:
    std::map<uint32_t, Identity> table_;
};

// Null mode passes plaintext through (debug only); the taint suites refuse
// to run under it.
enum class ChannelMode : uint8_t { Secure, Null };

// One endpoint of a pairwise channel. Wire layout:
//   8-byte big-endian nonce counter || ciphertext || 16-byte tag
// Counters are strictly sequential per direction; an out-of-sequence or
// forged frame raises ChannelError.
class ChannelState {
  public:
    ChannelState() = default;

    Bytes seal(const Bytes& plaintext);
    Bytes open(const Bytes& wire);

    ChannelMode mode() const { return mode_; }
    uint64_t sealed_count() const { return send_ctr_; }
    uint64_t opened_count() const { return recv_ctr_; }

  private:
    friend std::pair<ChannelState, ChannelState> channel_establish(
        const IdentityRegistry& registry, uint32_t a_id, uint32_t b_id,
        ChannelMode mode);

    ChannelMode mode_ = ChannelMode::Secure;
    std::array<uint8_t, 32> send_key_{};
    std::array<uint8_t, 32> recv_key_{};
    uint64_t send_ctr_ = 0;
    uint64_t recv_ctr_ = 0;
};

// Derives the pair key from the two static identities and returns the two
// endpoint states (first for a_id, second for b_id). Distinct pairs get
// independent keys; the two directions use separate subkeys.
std::pair<ChannelState, ChannelState> channel_establish(
    const IdentityRegistry& registry, uint32_t a_id, uint32_t b_id,
    ChannelMode mode = ChannelMode::Secure);

}  // namespace lpos
