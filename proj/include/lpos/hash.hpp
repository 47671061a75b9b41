#pragma once

#include <cstdint>
#include <string_view>

#include "lpos/bytes.hpp"

namespace lpos {

// Keyed BLAKE2b. The key may be any length; out-of-range keys are
// pre-hashed to 32 bytes. out_len in [16, 64].
Bytes keyed_hash(const Bytes& key, const Bytes& message, size_t out_len = 32);

// Domain-separated KDF: keyed_hash(key, label || 0x00 || context).
Bytes kdf(const Bytes& key, std::string_view label, const Bytes& context = {},
          size_t out_len = 32);

// Unkeyed BLAKE2b.
Bytes hash(const Bytes& message, size_t out_len = 32);

}  // namespace lpos
