#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "lpos/bytes.hpp"

namespace lpos {

// Deterministic random generator: ChaCha20 keystream under a key derived
// from (seed, label). Forking with a label yields an independent stream,
// so every engine in a simulation gets its own generator and the schedule
// of draws in one engine never perturbs another.
class DetRng {
  public:
    explicit DetRng(uint64_t seed, std::string_view label = "");
    DetRng(const Bytes& seed, std::string_view label = "");

    void fill(uint8_t* out, size_t n);
    Bytes bytes(size_t n);

    uint64_t u64();
    uint32_t u32();

    // Uniform in [0, bound); bound must be nonzero.
    uint64_t u64_below(uint64_t bound);

    // Uniform in [0, 1).
    double unit_double();

    DetRng fork(std::string_view label);

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; i--) {
            size_t j = static_cast<size_t>(u64_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    explicit DetRng(const std::array<uint8_t, 32>& key) : key_(key) {}

    void refill();

    std::array<uint8_t, 32> key_{};
    std::array<uint8_t, 64> block_{};
    uint64_t counter_ = 0;
    size_t pos_ = 64;  // forces refill on first draw
};

}  // namespace lpos
