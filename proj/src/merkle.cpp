#include "por/merkle.hpp"

#include <optional>

#include "por/error.hpp"

namespace por {

namespace {
constexpr std::uint8_t kLeafTag = 0x00;
constexpr std::uint8_t kNodeTag = 0x01;

Digest node_hash(const Digest& left, const Digest& right, std::size_t level) {
    const std::uint8_t tag[2] = {kNodeTag, static_cast<std::uint8_t>(level)};
    return sha256({left, right, ByteView(tag, 2)});
}
}  // namespace

Digest merkle_leaf_hash(ByteView leaf) {
    const std::uint8_t tag = kLeafTag;
    return sha256({leaf, ByteView(&tag, 1)});
}

void MerklePath::write(ByteWriter& w) const {
    w.u64_be(index);
    w.u32_be(static_cast<std::uint32_t>(steps.size()));
    for (const auto& s : steps) {
        w.u8(static_cast<std::uint8_t>(s.position));
        w.raw(s.sibling);
    }
}

MerklePath MerklePath::read(ByteReader& r) {
    using Sibling = MerklePath::Sibling;
    MerklePath p;
    p.index = r.u64_be();
    auto count = r.u32_be();
    if (count > 64) throw DecodeError("merkle path too long");
    for (std::uint32_t i = 0; i < count; ++i) {
        Step s;
        auto flag = r.u8();
        if (flag > 2) throw DecodeError("bad merkle direction flag");
        s.position = static_cast<Sibling>(flag);
        auto d = r.raw(s.sibling.size());
        std::copy(d.begin(), d.end(), s.sibling.begin());
        p.steps.push_back(s);
    }
    return p;
}

MerkleTree::MerkleTree(const std::vector<Bytes>& leaves) {
    if (leaves.empty()) throw UsageError("merkle tree needs at least one leaf");
    std::vector<Digest> hashes;
    hashes.reserve(leaves.size());
    for (const auto& l : leaves) hashes.push_back(merkle_leaf_hash(l));
    build_from(std::move(hashes));
}

MerkleTree MerkleTree::from_leaf_hashes(std::vector<Digest> hashes) {
    if (hashes.empty()) throw UsageError("merkle tree needs at least one leaf");
    MerkleTree t;
    t.build_from(std::move(hashes));
    return t;
}

void MerkleTree::build_from(std::vector<Digest> hashes) {
    levels_.clear();
    levels_.push_back(std::move(hashes));
    while (levels_.back().size() > 1) {
        const auto& below = levels_.back();
        std::vector<Digest> up;
        up.reserve((below.size() + 1) / 2);
        for (std::size_t i = 0; i < below.size(); i += 2) {
            const auto& right = i + 1 < below.size() ? below[i + 1] : below[i];
            up.push_back(node_hash(below[i], right, levels_.size()));
        }
        levels_.push_back(std::move(up));
    }
}

MerklePath MerkleTree::prove(std::size_t i) const {
    if (i >= leaf_count()) throw UsageError("merkle leaf index out of range");
    MerklePath path;
    path.index = i;
    std::size_t pos = i;
    for (std::size_t lvl = 0; lvl + 1 < levels_.size(); ++lvl) {
        const auto& nodes = levels_[lvl];
        MerklePath::Step step;
        if (pos % 2 == 1) {
            step.position = MerklePath::Sibling::left;
            step.sibling = nodes[pos - 1];
        } else if (pos + 1 < nodes.size()) {
            step.position = MerklePath::Sibling::right;
            step.sibling = nodes[pos + 1];
        } else {
            step.position = MerklePath::Sibling::duplicate;
        }
        path.steps.push_back(step);
        pos /= 2;
    }
    return path;
}

void MerkleTree::update(std::size_t i, ByteView leaf) {
    if (i >= leaf_count()) throw UsageError("merkle leaf index out of range");
    levels_[0][i] = merkle_leaf_hash(leaf);
    std::size_t pos = i;
    for (std::size_t lvl = 0; lvl + 1 < levels_.size(); ++lvl) {
        const auto& nodes = levels_[lvl];
        std::size_t left = pos & ~std::size_t{1};
        const auto& right = left + 1 < nodes.size() ? nodes[left + 1] : nodes[left];
        levels_[lvl + 1][pos / 2] = node_hash(nodes[left], right, lvl + 1);
        pos /= 2;
    }
}

std::optional<Digest> merkle_root_from_path(std::size_t i, ByteView leaf, const MerklePath& path) {
    if (path.index != i) return std::nullopt;
    auto acc = merkle_leaf_hash(leaf);
    std::size_t pos = i;
    for (std::size_t lvl = 0; lvl < path.steps.size(); ++lvl) {
        const auto& s = path.steps[lvl];
        const bool is_right_child = pos % 2 == 1;
        switch (s.position) {
            case MerklePath::Sibling::left:
                if (!is_right_child) return std::nullopt;
                acc = node_hash(s.sibling, acc, lvl + 1);
                break;
            case MerklePath::Sibling::right:
                if (is_right_child) return std::nullopt;
                acc = node_hash(acc, s.sibling, lvl + 1);
                break;
            case MerklePath::Sibling::duplicate:
                if (is_right_child) return std::nullopt;
                acc = node_hash(acc, acc, lvl + 1);
                break;
        }
        pos /= 2;
    }
    if (pos != 0) return std::nullopt;
    return acc;
}

bool merkle_verify(const Digest& root, std::size_t i, ByteView leaf, const MerklePath& path) {
    auto r = merkle_root_from_path(i, leaf, path);
    return r && *r == root;
}

}  // namespace por
