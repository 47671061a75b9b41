#pragma once

#include <cstdint>

#include <gmpxx.h>

#include "lpos/bytes.hpp"
#include "lpos/rng.hpp"

namespace lpos {

// Counts modular exponentiations so the harness can report computation
// cost. Pass nullptr when metering is not needed.
struct ModExpMeter {
    uint64_t count = 0;
};

mpz_class pow_mod(const mpz_class& base, const mpz_class& exp, const mpz_class& mod,
                  ModExpMeter* meter = nullptr);

// Schnorr-group parameters: prime modulus p, prime q dividing p-1, and a
// generator alpha of the order-q subgroup G of Z_p^*. l is the comparison
// bit-length carried alongside for the greater-than protocol.
struct ElGamalParams {
    mpz_class p;
    mpz_class q;
    mpz_class alpha;
    unsigned l = 16;

    void validate() const;  // throws std::invalid_argument
    size_t element_bytes() const;
};

struct ElGamalKeyPair {
    mpz_class sk;  // in [1, q-1]
    mpz_class pk;  // alpha^sk mod p
};

struct ElGamalCiphertext {
    mpz_class c1;
    mpz_class c2;
    bool operator==(const ElGamalCiphertext&) const = default;
};

// Generates fresh parameters: a q_bits prime q, then p = k*q + 1 prime of
// exactly p_bits, then a generator of the order-q subgroup. Deterministic
// given the rng state. Throws SetupError when the retry budget runs out.
ElGamalParams elgamal_setup(unsigned p_bits, unsigned q_bits, DetRng& rng,
                            unsigned l = 16);

ElGamalKeyPair elgamal_keygen(const ElGamalParams& params, DetRng& rng,
                              ModExpMeter* meter = nullptr);

// Uniform exponent in [1, q-1].
mpz_class rand_exponent(const ElGamalParams& params, DetRng& rng);

// alpha^e for uniform e in [1, q-1]; never the identity.
mpz_class random_group_element(const ElGamalParams& params, DetRng& rng,
                               ModExpMeter* meter = nullptr);

// m must be an element of G.
ElGamalCiphertext elgamal_encrypt(const ElGamalParams& params, const mpz_class& pk,
                                  const mpz_class& m, DetRng& rng,
                                  ModExpMeter* meter = nullptr);

mpz_class elgamal_decrypt(const ElGamalParams& params, const ElGamalKeyPair& kp,
                          const ElGamalCiphertext& ct, ModExpMeter* meter = nullptr);

// Componentwise product: encrypts the product of the two plaintexts.
ElGamalCiphertext ct_mul(const ElGamalParams& params, const ElGamalCiphertext& a,
                         const ElGamalCiphertext& b);

// Componentwise power: encrypts the plaintext raised to e.
ElGamalCiphertext ct_pow(const ElGamalParams& params, const ElGamalCiphertext& ct,
                         const mpz_class& e, ModExpMeter* meter = nullptr);

// Fresh encryption of the identity folded in; same plaintext, new randomness.
ElGamalCiphertext rerandomize(const ElGamalParams& params, const mpz_class& pk,
                              const ElGamalCiphertext& ct, DetRng& rng,
                              ModExpMeter* meter = nullptr);

bool is_group_element(const ElGamalParams& params, const mpz_class& x,
                      ModExpMeter* meter = nullptr);

// Fixed-width big-endian encodings, width = element_bytes().
Bytes element_to_bytes(const ElGamalParams& params, const mpz_class& x);
mpz_class element_from_bytes(const ElGamalParams& params, const Bytes& b,
                             size_t offset = 0);

Bytes mpz_to_bytes_fixed(const mpz_class& x, size_t width);
mpz_class mpz_from_bytes(const uint8_t* data, size_t len);

// Uniform integer in [0, bound) by rejection sampling from rng.
mpz_class mpz_below(DetRng& rng, const mpz_class& bound);

}  // namespace lpos
