#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "lpos/bytes.hpp"
#include "lpos/rng.hpp"

namespace lpos {

// Curve25519 points and scalars (the group is a build-time constant).
using EcScalar = std::array<uint8_t, 32>;
using EcPoint = std::array<uint8_t, 32>;

EcPoint ec_base_mul(const EcScalar& k);
EcPoint ec_mul(const EcScalar& k, const EcPoint& p);  // throws SetupError on degenerate result

// Public blinded-key broadcast entry.
struct BlindedKeyMsg {
    uint64_t epoch = 0;
    uint64_t node_index = 0;  // heap path index: root 1, children 2i and 2i+1
    EcPoint point{};
};

Bytes rekey_payload(const std::vector<BlindedKeyMsg>& msgs);
std::vector<BlindedKeyMsg> rekey_from_payload(const Bytes& b);

// What one member actually holds: its own leaf secret plus the blinded keys
// of the siblings along its path to the root. Enough to derive the group
// key; nothing else.
struct MemberView {
    uint32_t id = 0;
    uint64_t epoch = 0;
    EcScalar leaf_secret{};
    std::vector<EcPoint> copath;  // leaf level first, root level last
};

// Root secret as derived by walking the copath upward.
EcScalar derive_root_secret(const MemberView& view);

// Group key bytes for a given root secret and epoch.
Bytes group_key_from_root(const EcScalar& root, uint64_t epoch);

// Convenience: full derivation from a view, optionally overriding the epoch
// (used by exclusion tests probing stale views against newer epochs).
Bytes derive_group_key(const MemberView& view);
Bytes derive_group_key(const MemberView& view, uint64_t epoch);

// The group Diffie-Hellman tree. The harness owns the whole tree (it plays
// every member); per-member knowledge is exported through view(). Joins go
// to the shallowest rightmost leaf, which sponsors the change with a fresh
// leaf secret; a leave promotes the sibling subtree and the rightmost leaf
// beneath it sponsors. A batch of changes bumps the epoch exactly once.
class KeyTree {
  public:
    KeyTree(const std::vector<uint32_t>& member_ids, DetRng rng);
    ~KeyTree();
    KeyTree(KeyTree&&) noexcept;
    KeyTree& operator=(KeyTree&&) noexcept;

    void update(const std::vector<uint32_t>& joins,
                const std::vector<uint32_t>& leaves);
    void join(const std::vector<uint32_t>& ids) { update(ids, {}); }
    void leave(const std::vector<uint32_t>& ids) { update({}, ids); }

    uint64_t epoch() const { return epoch_; }
    Bytes group_key() const;
    MemberView view(uint32_t id) const;
    std::vector<uint32_t> members() const;
    size_t size() const;
    unsigned height() const;  // edges on the longest root-leaf path

    // Blinded keys refreshed by the last update, and their count (the
    // number of tree nodes whose secrets changed).
    const std::vector<BlindedKeyMsg>& last_broadcast() const { return broadcast_; }
    size_t last_touched() const { return broadcast_.size(); }

    struct Node;  // defined in the implementation file

  private:
    std::unique_ptr<Node> root_;
    DetRng rng_;
    uint64_t epoch_ = 1;
    std::vector<BlindedKeyMsg> broadcast_;

    void refresh_leaf(Node* leaf);
    void structural_join(uint32_t id);
    // Returns the sponsor member id for the promoted subtree.
    uint32_t structural_leave(uint32_t id);
};

}  // namespace lpos
