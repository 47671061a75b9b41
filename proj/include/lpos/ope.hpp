#pragma once

#include <array>
#include <compare>
#include <cstdint>

#include "lpos/bytes.hpp"

namespace lpos {

// Plaintext domain [0, 2^plain_bits - 1], ciphertext range
// [0, 2^cipher_bits - 1]. The range must be strictly larger than the
// domain; cipher_bits tops out at 64 so ciphertexts stay machine words.
struct OpeParams {
    unsigned plain_bits = 40;
    unsigned cipher_bits = 64;

    void validate() const;
    uint64_t domain_max() const;  // 2^plain_bits - 1
    size_t ciphertext_bytes() const { return (cipher_bits + 7) / 8; }
};

struct OpeKey {
    std::array<uint8_t, 32> bytes{};
};

struct OpeCiphertext {
    uint64_t value = 0;
    auto operator<=>(const OpeCiphertext&) const = default;
};

// Binds a group key to the OPE primitive. Deterministic; the label
// separates uses of the same group key.
OpeKey derive_ope_key(const Bytes& group_key, const Bytes& context_label);

// The public padding block prepended to every report.
struct PaddingBits {
    uint64_t value = 0;
    unsigned bit_len = 0;
};

// Assembles the d-bit plaintext 0 || D || r: one leading zero bit, the
// padding D as high-order bits, the gamma-bit report r as low-order bits.
uint64_t encode_report(const PaddingBits& padding, uint64_t rss, unsigned gamma,
                       const OpeParams& params);

// Deterministic order-preserving encryption: recursive range halving with
// a keyed split at each level, then pseudorandom placement in the final
// range interval. Strictly monotone and injective over the domain.
OpeCiphertext ope_encrypt(const OpeKey& key, uint64_t plaintext,
                          const OpeParams& params);

// Inverse walk. Throws DecodeError if the ciphertext is not in the image
// of the keyed function.
uint64_t ope_decrypt(const OpeKey& key, OpeCiphertext ct, const OpeParams& params);

// Wire encoding: unsigned big-endian, fixed width ceil(cipher_bits/8).
Bytes ope_ciphertext_bytes(OpeCiphertext ct, const OpeParams& params);
OpeCiphertext ope_ciphertext_from_bytes(const Bytes& b, const OpeParams& params);

}  // namespace lpos
