#include "lpos/hash.hpp"

#include <sodium.h>

#include <stdexcept>

namespace lpos {

Bytes keyed_hash(const Bytes& key, const Bytes& message, size_t out_len) {
    if (out_len < crypto_generichash_BYTES_MIN || out_len > crypto_generichash_BYTES_MAX)
        throw std::invalid_argument("keyed_hash: bad output length");
    const Bytes* k = &key;
    Bytes reduced;
    if (key.size() < crypto_generichash_KEYBYTES_MIN ||
        key.size() > crypto_generichash_KEYBYTES_MAX) {
        reduced = hash(key, 32);
        k = &reduced;
    }
    Bytes out(out_len);
    crypto_generichash(out.data(), out.size(), message.data(), message.size(),
                       k->data(), k->size());
    return out;
}

Bytes kdf(const Bytes& key, std::string_view label, const Bytes& context,
          size_t out_len) {
    Bytes msg;
    msg.reserve(label.size() + 1 + context.size());
    msg.insert(msg.end(), label.begin(), label.end());
    msg.push_back(0x00);
    msg.insert(msg.end(), context.begin(), context.end());
    return keyed_hash(key, msg, out_len);
}

Bytes hash(const Bytes& message, size_t out_len) {
    if (out_len < crypto_generichash_BYTES_MIN || out_len > crypto_generichash_BYTES_MAX)
        throw std::invalid_argument("hash: bad output length");
    Bytes out(out_len);
    crypto_generichash(out.data(), out.size(), message.data(), message.size(),
                       nullptr, 0);
    return out;
}

}  // namespace lpos
