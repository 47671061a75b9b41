#pragma once

#include <stdexcept>
#include <string>

namespace lpos {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed serialized data (frames, payloads, ciphertexts).
struct DecodeError : Error {
    using Error::Error;
};

// Authenticated-channel failure: bad tag, nonce replay, wrong pair.
struct ChannelError : Error {
    using Error::Error;
};

// Protocol-state violation: bad session id, malformed comparison table,
// stale epoch.
struct ProtocolError : Error {
    using Error::Error;
};

// A secure-comparison session failed mid-flight (peer unresponsive).
struct ComparisonError : Error {
    using Error::Error;
};

// No reports arrived before the collection deadline.
struct NoQuorumError : Error {
    using Error::Error;
};

// Parameter generation (prime search) exhausted its retry budget.
struct SetupError : Error {
    using Error::Error;
};

}  // namespace lpos
