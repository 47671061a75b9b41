#include "lpos/keytree.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <sodium.h>

#include "lpos/errors.hpp"
#include "lpos/hash.hpp"

namespace lpos {

namespace {

Bytes arr_bytes(const std::array<uint8_t, 32>& a) {
    return Bytes(a.begin(), a.end());
}

EcScalar node_secret_from_dh(const EcPoint& shared) {
    Bytes out = kdf(arr_bytes(shared), "lpos-tree-node", {}, 32);
    EcScalar s;
    std::copy(out.begin(), out.end(), s.begin());
    return s;
}

}  // namespace

EcPoint ec_base_mul(const EcScalar& k) {
    EcPoint p;
    crypto_scalarmult_base(p.data(), k.data());
    return p;
}

EcPoint ec_mul(const EcScalar& k, const EcPoint& p) {
    EcPoint out;
    if (crypto_scalarmult(out.data(), k.data(), p.data()) != 0)
        throw SetupError("keytree: degenerate shared point");
    return out;
}

Bytes rekey_payload(const std::vector<BlindedKeyMsg>& msgs) {
    Bytes out;
    put_u16(out, uint16_t(msgs.size()));
    for (const auto& m : msgs) {
        put_u64(out, m.epoch);
        put_u64(out, m.node_index);
        out.insert(out.end(), m.point.begin(), m.point.end());
    }
    return out;
}

std::vector<BlindedKeyMsg> rekey_from_payload(const Bytes& b) {
    ByteReader r(b);
    size_t count = r.u16();
    std::vector<BlindedKeyMsg> msgs(count);
    for (auto& m : msgs) {
        m.epoch = r.u64();
        m.node_index = r.u64();
        Bytes p = r.take(32);
        std::copy(p.begin(), p.end(), m.point.begin());
    }
    if (!r.done()) throw DecodeError("keytree: trailing rekey bytes");
    return msgs;
}

EcScalar derive_root_secret(const MemberView& view) {
    EcScalar s = view.leaf_secret;
    for (const auto& sibling : view.copath)
        s = node_secret_from_dh(ec_mul(s, sibling));
    return s;
}

Bytes group_key_from_root(const EcScalar& root, uint64_t epoch) {
    Bytes ctx;
    put_u64(ctx, epoch);
    return kdf(arr_bytes(root), "lpos-group-key", ctx, 32);
}

Bytes derive_group_key(const MemberView& view) {
    return derive_group_key(view, view.epoch);
}

Bytes derive_group_key(const MemberView& view, uint64_t epoch) {
    return group_key_from_root(derive_root_secret(view), epoch);
}

struct KeyTree::Node {
    int64_t member = -1;  // leaf member id, or -1 for internal nodes
    bool dirty = false;
    EcScalar secret{};
    EcPoint blinded{};
    std::unique_ptr<Node> left, right;

    bool is_leaf() const { return !left; }
};

namespace {

using Node = KeyTree::Node;

}  // namespace

// Out-of-line members that need the complete Node type.
KeyTree::~KeyTree() = default;
KeyTree::KeyTree(KeyTree&&) noexcept = default;
KeyTree& KeyTree::operator=(KeyTree&&) noexcept = default;

namespace {

std::unique_ptr<Node> build_balanced(const std::vector<uint32_t>& ids, size_t lo,
                                     size_t hi) {
    auto node = std::make_unique<Node>();
    if (hi - lo == 1) {
        node->member = ids[lo];
        return node;
    }
    size_t mid = lo + (hi - lo + 1) / 2;
    node->left = build_balanced(ids, lo, mid);
    node->right = build_balanced(ids, mid, hi);
    return node;
}

// Recompute internal secrets above dirty descendants; mark recomputed
// nodes dirty so the broadcast pass can find them.
void recompute(Node* n) {
    if (n->is_leaf()) return;
    recompute(n->left.get());
    recompute(n->right.get());
    if (n->left->dirty || n->right->dirty) {
        n->secret = node_secret_from_dh(ec_mul(n->left->secret, n->right->blinded));
        n->blinded = ec_base_mul(n->secret);
        n->dirty = true;
    }
}

void collect_dirty(const Node* n, uint64_t index, uint64_t epoch,
                   std::vector<BlindedKeyMsg>& out) {
    if (n->dirty) out.push_back({epoch, index, n->blinded});
    if (!n->is_leaf()) {
        collect_dirty(n->left.get(), index * 2, epoch, out);
        collect_dirty(n->right.get(), index * 2 + 1, epoch, out);
    }
}

void clear_dirty(Node* n) {
    n->dirty = false;
    if (!n->is_leaf()) {
        clear_dirty(n->left.get());
        clear_dirty(n->right.get());
    }
}

Node* find_leaf(Node* n, uint32_t id) {
    if (n->is_leaf()) return n->member == int64_t(id) ? n : nullptr;
    if (Node* hit = find_leaf(n->left.get(), id)) return hit;
    return find_leaf(n->right.get(), id);
}

// Shallowest leaf; rightmost among ties.
Node* shallowest_leaf(Node* n, unsigned depth, unsigned& best_depth, Node*& best) {
    if (n->is_leaf()) {
        if (best == nullptr || depth < best_depth) {
            best = n;
            best_depth = depth;
        }
        return best;
    }
    shallowest_leaf(n->right.get(), depth + 1, best_depth, best);
    shallowest_leaf(n->left.get(), depth + 1, best_depth, best);
    return best;
}

Node* rightmost_leaf(Node* n) {
    while (!n->is_leaf()) n = n->right.get();
    return n;
}

void collect_members(const Node* n, std::vector<uint32_t>& out) {
    if (n->is_leaf()) {
        out.push_back(uint32_t(n->member));
        return;
    }
    collect_members(n->left.get(), out);
    collect_members(n->right.get(), out);
}

unsigned edge_height(const Node* n) {
    if (n->is_leaf()) return 0;
    return 1 + std::max(edge_height(n->left.get()), edge_height(n->right.get()));
}

bool copath_to(const Node* n, uint32_t id, std::vector<EcPoint>& out) {
    if (n->is_leaf()) return n->member == int64_t(id);
    if (copath_to(n->left.get(), id, out)) {
        out.push_back(n->right->blinded);
        return true;
    }
    if (copath_to(n->right.get(), id, out)) {
        out.push_back(n->left->blinded);
        return true;
    }
    return false;
}

}  // namespace

KeyTree::KeyTree(const std::vector<uint32_t>& member_ids, DetRng rng)
    : rng_(std::move(rng)) {
    if (member_ids.empty())
        throw std::invalid_argument("keytree: need at least one member");
    std::set<uint32_t> uniq(member_ids.begin(), member_ids.end());
    if (uniq.size() != member_ids.size())
        throw std::invalid_argument("keytree: duplicate member id");
    root_ = build_balanced(member_ids, 0, member_ids.size());
    std::vector<Node*> stack{root_.get()};
    while (!stack.empty()) {
        Node* n = stack.back();
        stack.pop_back();
        if (n->is_leaf()) {
            refresh_leaf(n);
        } else {
            stack.push_back(n->left.get());
            stack.push_back(n->right.get());
        }
    }
    recompute(root_.get());
    broadcast_.clear();
    collect_dirty(root_.get(), 1, epoch_, broadcast_);
    clear_dirty(root_.get());
}

void KeyTree::refresh_leaf(Node* leaf) {
    Bytes raw = rng_.bytes(32);
    std::copy(raw.begin(), raw.end(), leaf->secret.begin());
    leaf->blinded = ec_base_mul(leaf->secret);
    leaf->dirty = true;
}

void KeyTree::structural_join(uint32_t id) {
    unsigned best_depth = 0;
    Node* site = nullptr;
    shallowest_leaf(root_.get(), 0, best_depth, site);

    auto displaced = std::make_unique<Node>();
    displaced->member = site->member;
    displaced->secret = site->secret;
    displaced->blinded = site->blinded;

    auto joiner = std::make_unique<Node>();
    joiner->member = id;

    site->member = -1;
    site->left = std::move(displaced);
    site->right = std::move(joiner);

    refresh_leaf(site->left.get());  // sponsor: the displaced member
    refresh_leaf(site->right.get());
}

uint32_t KeyTree::structural_leave(uint32_t id) {
    struct Frame {
        Node* node;
        Node* parent;
    };
    // Locate the leaf and its parent.
    std::vector<Frame> stack{{root_.get(), nullptr}};
    Node* leaf = nullptr;
    Node* leaf_parent = nullptr;
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.node->is_leaf()) {
            if (f.node->member == int64_t(id)) {
                leaf = f.node;
                leaf_parent = f.parent;
                break;
            }
            continue;
        }
        stack.push_back({f.node->left.get(), f.node});
        stack.push_back({f.node->right.get(), f.node});
    }
    if (!leaf) throw std::invalid_argument("keytree: unknown member");

    if (!leaf_parent) throw std::invalid_argument("keytree: cannot empty the group");

    std::unique_ptr<Node>& sib = (leaf_parent->left.get() == leaf)
                                     ? leaf_parent->right
                                     : leaf_parent->left;
    std::unique_ptr<Node> promoted = std::move(sib);
    *leaf_parent = std::move(*promoted);
    return uint32_t(rightmost_leaf(leaf_parent)->member);
}

void KeyTree::update(const std::vector<uint32_t>& joins,
                     const std::vector<uint32_t>& leaves) {
    if (joins.empty() && leaves.empty())
        throw std::invalid_argument("keytree: empty membership update");

    std::vector<uint32_t> current = members();
    std::set<uint32_t> member_set(current.begin(), current.end());
    std::set<uint32_t> join_set(joins.begin(), joins.end());
    std::set<uint32_t> leave_set(leaves.begin(), leaves.end());
    if (join_set.size() != joins.size() || leave_set.size() != leaves.size())
        throw std::invalid_argument("keytree: duplicate id in batch");
    for (uint32_t id : joins) {
        if (member_set.count(id)) throw std::invalid_argument("keytree: id already a member");
        if (leave_set.count(id)) throw std::invalid_argument("keytree: id both joins and leaves");
    }
    for (uint32_t id : leaves)
        if (!member_set.count(id)) throw std::invalid_argument("keytree: unknown member");
    // Leaves are applied before joins, so the pre-batch membership must
    // survive the removals.
    if (leave_set.size() == member_set.size())
        throw std::invalid_argument("keytree: cannot empty the group");

    std::vector<uint32_t> sponsors;
    for (uint32_t id : leaves) sponsors.push_back(structural_leave(id));
    for (uint32_t id : joins) structural_join(id);

    // A leave's sponsor may itself have left later in the batch; its own
    // departure appointed a replacement covering the same path.
    std::set<uint32_t> final_members;
    {
        std::vector<uint32_t> m = members();
        final_members.insert(m.begin(), m.end());
    }
    std::set<uint32_t> refreshed;
    for (uint32_t id : sponsors) {
        if (!final_members.count(id) || refreshed.count(id)) continue;
        refreshed.insert(id);
        refresh_leaf(find_leaf(root_.get(), id));
    }

    epoch_++;
    recompute(root_.get());
    broadcast_.clear();
    collect_dirty(root_.get(), 1, epoch_, broadcast_);
    clear_dirty(root_.get());
}

Bytes KeyTree::group_key() const {
    return group_key_from_root(root_->secret, epoch_);
}

MemberView KeyTree::view(uint32_t id) const {
    const Node* leaf = find_leaf(root_.get(), id);
    if (!leaf) throw std::invalid_argument("keytree: unknown member");
    MemberView v;
    v.id = id;
    v.epoch = epoch_;
    v.leaf_secret = leaf->secret;
    copath_to(root_.get(), id, v.copath);
    return v;
}

std::vector<uint32_t> KeyTree::members() const {
    std::vector<uint32_t> out;
    collect_members(root_.get(), out);
    return out;
}

size_t KeyTree::size() const { return members().size(); }

unsigned KeyTree::height() const { return edge_height(root_.get()); }

}  // namespace lpos
