#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "por/bytes.hpp"
#include "por/hash.hpp"

namespace por {

/// Sibling digests from the leaf level upward. A node that is the odd last
/// one on its level is paired with itself (`duplicate`); its digest field is
/// zero and ignored.
struct MerklePath {
    enum class Sibling : std::uint8_t { right = 0, left = 1, duplicate = 2 };
    struct Step {
        Sibling position = Sibling::right;
        Digest sibling{};
        bool operator==(const Step&) const = default;
    };

    std::uint64_t index = 0;
    std::vector<Step> steps;

    bool operator==(const MerklePath&) const = default;

    /// index u64 | step count u32 | per step: flag u8, digest (32 bytes).
    /// Integers big-endian.
    void write(ByteWriter& w) const;
    static MerklePath read(ByteReader& r);
};

Digest merkle_leaf_hash(ByteView leaf);

/// Binary hash tree over ordered leaves. Levels with an odd node count pair
/// their last node with itself. Internal nodes hash left | right | level tag.
class MerkleTree {
public:
    /// Throws UsageError for an empty leaf list.
    explicit MerkleTree(const std::vector<Bytes>& leaves);
    static MerkleTree from_leaf_hashes(std::vector<Digest> hashes);

    const Digest& root() const { return levels_.back().front(); }
    std::size_t leaf_count() const { return levels_.front().size(); }
    /// ceil(log2(leaf_count))
    std::size_t depth() const { return levels_.size() - 1; }

    /// `i` is 0-based; throws UsageError when out of range.
    MerklePath prove(std::size_t i) const;
    /// Replaces leaf `i` and rehashes its path to the root.
    void update(std::size_t i, ByteView leaf);

private:
    MerkleTree() = default;
    void build_from(std::vector<Digest> hashes);

    std::vector<std::vector<Digest>> levels_;
};

/// Root implied by `leaf` at position `i` with `path`, or nullopt when the
/// path's direction flags disagree with `i`. Also valid for deriving the new
/// root after replacing leaf `i` using its pre-update path.
std::optional<Digest> merkle_root_from_path(std::size_t i, ByteView leaf, const MerklePath& path);

bool merkle_verify(const Digest& root, std::size_t i, ByteView leaf, const MerklePath& path);

}  // namespace por
