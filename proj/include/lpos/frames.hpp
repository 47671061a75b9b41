#pragma once

#include <cstdint>

#include "lpos/bytes.hpp"
#include "lpos/ope.hpp"

namespace lpos {

enum class FrameType : uint8_t {
    Report = 1,
    GtInit = 2,
    GtResp = 3,
    Decision = 4,
    EpochUpdate = 5,
};

const char* frame_type_name(FrameType t);

// Common framing: 1-byte type, 8-byte big-endian round, 8-byte epoch,
// 4-byte payload length, payload.
struct Frame {
    FrameType type = FrameType::Report;
    uint64_t round = 0;
    uint64_t epoch = 0;
    Bytes payload;
};

Bytes frame_bytes(const Frame& f);
Frame frame_from_bytes(const Bytes& b);  // throws DecodeError

struct ReportPayload {
    uint32_t user_id = 0;
    OpeCiphertext ct;
};

Bytes report_payload(uint32_t user_id, OpeCiphertext ct, const OpeParams& params);
ReportPayload report_from_payload(const Bytes& b, const OpeParams& params);

Bytes decision_payload(bool busy);
bool decision_from_payload(const Bytes& b);

}  // namespace lpos
