#pragma once

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpos/errors.hpp"

namespace lpos {

using Bytes = std::vector<uint8_t>;

inline void put_u8(Bytes& out, uint8_t v) { out.push_back(v); }

inline void put_u16(Bytes& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void put_u32(Bytes& out, uint32_t v) {
    for (int s = 24; s >= 0; s -= 8)
        out.push_back(static_cast<uint8_t>(v >> s));
}

inline void put_u64(Bytes& out, uint64_t v) {
    for (int s = 56; s >= 0; s -= 8)
        out.push_back(static_cast<uint8_t>(v >> s));
}

// Big-endian, fixed width. Throws if the value does not fit.
inline void put_uint_be(Bytes& out, uint64_t v, size_t width) {
    if (width < 8 && width > 0 && (v >> (8 * width)) != 0)
        throw std::invalid_argument("put_uint_be: value too wide");
    for (size_t i = 0; i < width; i++)
        out.push_back(static_cast<uint8_t>(v >> (8 * (width - 1 - i))));
}

// Bounds-checked big-endian reader.
class ByteReader {
  public:
    explicit ByteReader(const Bytes& data) : data_(data) {}

    uint8_t u8() { return next(); }
    uint16_t u16() { return static_cast<uint16_t>(u64_width(2)); }
    uint32_t u32() { return static_cast<uint32_t>(u64_width(4)); }
    uint64_t u64() { return u64_width(8); }

    uint64_t u64_width(size_t width) {
        uint64_t v = 0;
        for (size_t i = 0; i < width; i++)
            v = (v << 8) | next();
        return v;
    }

    Bytes take(size_t n) {
        require(n);
        Bytes out(data_.begin() + static_cast<long>(pos_),
                  data_.begin() + static_cast<long>(pos_ + n));
        pos_ += n;
        return out;
    }

    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

  private:
    uint8_t next() {
        require(1);
        return data_[pos_++];
    }
    void require(size_t n) const {
        if (data_.size() - pos_ < n)
            throw DecodeError("ByteReader: truncated input");
    }
    const Bytes& data_;
    size_t pos_ = 0;
};

inline std::string to_hex(const Bytes& b) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (uint8_t c : b) {
        s.push_back(digits[c >> 4]);
        s.push_back(digits[c & 0xf]);
    }
    return s;
}

inline Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

// True if `needle` occurs as a contiguous byte-aligned substring of `hay`.
inline bool contains_pattern(const Bytes& hay, const Bytes& needle) {
    if (needle.empty() || needle.size() > hay.size())
        return false;
    for (size_t i = 0; i + needle.size() <= hay.size(); i++) {
        size_t j = 0;
        while (j < needle.size() && hay[i + j] == needle[j])
            j++;
        if (j == needle.size())
            return true;
    }
    return false;
}

// All byte offsets at which `needle` occurs in `hay`.
inline std::vector<size_t> find_pattern_offsets(const Bytes& hay, const Bytes& needle) {
    std::vector<size_t> offs;
    if (needle.empty() || needle.size() > hay.size())
        return offs;
    for (size_t i = 0; i + needle.size() <= hay.size(); i++) {
        size_t j = 0;
        while (j < needle.size() && hay[i + j] == needle[j])
            j++;
        if (j == needle.size())
            offs.push_back(i);
    }
    return offs;
}

}  // namespace lpos
