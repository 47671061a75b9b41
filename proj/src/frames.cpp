#include "lpos/frames.hpp"

#include "lpos/errors.hpp"

namespace lpos {

const char* frame_type_name(FrameType t) {
    switch (t) {
        case FrameType::Report: return "report";
        case FrameType::GtInit: return "gt_init";
        case FrameType::GtResp: return "gt_resp";
        case FrameType::Decision: return "decision";
        case FrameType::EpochUpdate: return "epoch_update";
    }
    return "unknown";
}

Bytes frame_bytes(const Frame& f) {
    Bytes out;
    put_u8(out, uint8_t(f.type));
    put_u64(out, f.round);
    put_u64(out, f.epoch);
    put_u32(out, uint32_t(f.payload.size()));
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    return out;
}

Frame frame_from_bytes(const Bytes& b) {
    ByteReader r(b);
    Frame f;
    uint8_t type = r.u8();
    if (type < 1 || type > 5) throw DecodeError("frame: unknown type tag");
    f.type = FrameType(type);
    f.round = r.u64();
    f.epoch = r.u64();
    size_t len = r.u32();
    if (len != r.remaining()) throw DecodeError("frame: payload length mismatch");
    f.payload = r.take(len);
    return f;
}

Bytes report_payload(uint32_t user_id, OpeCiphertext ct, const OpeParams& params) {
    Bytes out;
    put_u32(out, user_id);
    Bytes enc = ope_ciphertext_bytes(ct, params);
    out.insert(out.end(), enc.begin(), enc.end());
    return out;
}

ReportPayload report_from_payload(const Bytes& b, const OpeParams& params) {
    ByteReader r(b);
    ReportPayload p;
    p.user_id = r.u32();
    Bytes enc = r.take(params.ciphertext_bytes());
    if (!r.done()) throw DecodeError("report: trailing bytes");
    p.ct = ope_ciphertext_from_bytes(enc, params);
    return p;
}

Bytes decision_payload(bool busy) { return Bytes{uint8_t(busy ? 1 : 0)}; }

bool decision_from_payload(const Bytes& b) {
    if (b.size() != 1 || b[0] > 1) throw DecodeError("decision: bad payload");
    return b[0] == 1;
}

}  // namespace lpos
