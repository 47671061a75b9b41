#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lpos {

enum class Scheme : uint8_t { Lpos, Eceg, Pdaft, Ppss };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);  // throws invalid_argument

// Closed-form per-round communication model, in bits.
struct CostParams {
    unsigned gamma = 16;     // reading bit width
    unsigned p_bits = 1024;  // comparison group modulus
    unsigned q_bits = 160;   // EC-group element size
    unsigned n_bits = 1024;  // Paillier-style modulus
    unsigned eps_ope = 128;  // order-preserving ciphertext size
};

unsigned ceil_log2(uint64_t n);  // n >= 1; ceil_log2(1) == 0

uint64_t comm_cost(Scheme s, uint64_t n, const CostParams& params = {});

// "scheme,n,bits" rows for every scheme over n in [n_min, n_max].
std::string cost_csv(const std::vector<Scheme>& schemes, uint64_t n_min,
                     uint64_t n_max, const CostParams& params = {});

}  // namespace lpos
