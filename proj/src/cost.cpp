#include "lpos/cost.hpp"

#include <sstream>
#include <stdexcept>

namespace lpos {

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Lpos: return "lpos";
        case Scheme::Eceg: return "eceg";
        case Scheme::Pdaft: return "pdaft";
        case Scheme::Ppss: return "ppss";
    }
    throw std::invalid_argument("cost: unknown scheme");
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "lpos") return Scheme::Lpos;
    if (name == "eceg") return Scheme::Eceg;
    if (name == "pdaft") return Scheme::Pdaft;
    if (name == "ppss") return Scheme::Ppss;
    throw std::invalid_argument("cost: unknown scheme: " + name);
}

unsigned ceil_log2(uint64_t n) {
    if (n == 0) throw std::invalid_argument("ceil_log2: zero");
    unsigned bits = 0;
    uint64_t v = n - 1;
    while (v) {
        bits++;
        v >>= 1;
    }
    return bits;
}

uint64_t comm_cost(Scheme s, uint64_t n, const CostParams& params) {
    if (n == 0) throw std::invalid_argument("cost: need at least one user");
    uint64_t logn = ceil_log2(n);
    switch (s) {
        case Scheme::Lpos:
            // Comparison phase (two ciphertext elements per table row across
            // 2 + ceil(log2 n) sessions) plus the report batch and the
            // session-index bookkeeping.
            return 2 * uint64_t(params.gamma) * params.p_bits * (2 + logn) +
                   n * uint64_t(params.eps_ope) + uint64_t(params.q_bits) * logn;
        case Scheme::Eceg:
            return 4 * uint64_t(params.q_bits) * n;
        case Scheme::Pdaft:
            return 2 * uint64_t(params.n_bits) * (n + 1);
        case Scheme::Ppss:
            return uint64_t(params.p_bits) * n;
    }
    throw std::invalid_argument("cost: unknown scheme");
}

std::string cost_csv(const std::vector<Scheme>& schemes, uint64_t n_min,
                     uint64_t n_max, const CostParams& params) {
    if (n_min < 1 || n_max < n_min)
        throw std::invalid_argument("cost: bad n range");
    std::ostringstream os;
    os << "scheme,n,bits\n";
    for (Scheme s : schemes)
        for (uint64_t n = n_min; n <= n_max; n++)
            os << scheme_name(s) << "," << n << "," << comm_cost(s, n, params)
               << "\n";
    return os.str();
}

}  // namespace lpos
