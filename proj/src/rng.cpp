#include "lpos/rng.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

#include "lpos/hash.hpp"

namespace lpos {

namespace {

std::array<uint8_t, 32> derive_key(const Bytes& seed, std::string_view label) {
    Bytes out = kdf(seed, "lpos-rng", bytes_of(std::string(label)), 32);
    std::array<uint8_t, 32> key{};
    std::memcpy(key.data(), out.data(), 32);
    return key;
}

}  // namespace

DetRng::DetRng(uint64_t seed, std::string_view label) {
    Bytes s;
    put_u64(s, seed);
    key_ = derive_key(s, label);
}

DetRng::DetRng(const Bytes& seed, std::string_view label) {
    key_ = derive_key(seed, label);
}

void DetRng::refill() {
    uint8_t nonce[8];
    for (int i = 0; i < 8; i++)
        nonce[i] = static_cast<uint8_t>(counter_ >> (8 * (7 - i)));
    std::memset(block_.data(), 0, block_.size());
    crypto_stream_chacha20_xor(block_.data(), block_.data(), block_.size(),
                               nonce, key_.data());
    counter_++;
    pos_ = 0;
}

void DetRng::fill(uint8_t* out, size_t n) {
    while (n > 0) {
        if (pos_ == block_.size())
            refill();
        size_t take = std::min(n, block_.size() - pos_);
        std::memcpy(out, block_.data() + pos_, take);
        pos_ += take;
        out += take;
        n -= take;
    }
}

Bytes DetRng::bytes(size_t n) {
    Bytes out(n);
    fill(out.data(), n);
    return out;
}

uint64_t DetRng::u64() {
    uint8_t b[8];
    fill(b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; i++)
        v = (v << 8) | b[i];
    return v;
}

uint32_t DetRng::u32() { return static_cast<uint32_t>(u64() >> 32); }

uint64_t DetRng::u64_below(uint64_t bound) {
    if (bound == 0)
        throw std::invalid_argument("u64_below: zero bound");
    // rejection sampling on the top part of the range
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v;
    do {
        v = u64();
    } while (v >= limit);
    return v % bound;
}

double DetRng::unit_double() {
    return static_cast<double>(u64() >> 11) * 0x1.0p-53;
}

DetRng DetRng::fork(std::string_view label) {
    Bytes parent(key_.begin(), key_.end());
    return DetRng(derive_key(parent, label));
}

}  // namespace lpos
