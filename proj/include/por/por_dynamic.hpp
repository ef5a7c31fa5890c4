#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "por/algebra.hpp"
#include "por/erasure.hpp"
#include "por/merkle.hpp"

namespace por {

/// A block of U: beta field elements.
using DynBlock = std::vector<FieldElement>;

struct DynParams {
    std::uint64_t n = 0;       // blocks in U
    std::size_t beta = 1;      // field elements per block
    CodeParams c_code;         // stripe code for C; default (2k, k) with k = min(64, n * beta)

    /// ceil(log2 n) + 2
    std::size_t levels() const;
    CodeParams c_code_or_default() const;
    std::uint64_t c_stripes() const;
    std::uint64_t c_symbols() const { return c_stripes() * c_code_or_default().n; }
};

enum class DynRegion : std::uint8_t { u = 0, c = 1, h = 2 };

/// One stored symbol with its authentication path.
struct DynSymbol {
    Bytes leaf;
    MerklePath path;
};

/// H record: the write of `value` to 1-based block `index`, `seq`-th write overall.
struct WriteRecord {
    std::uint64_t index = 0;
    DynBlock value;
    std::uint64_t seq = 0;
};

/// The server as the client sees it. Every answer is untrusted.
class DynStore {
public:
    virtual ~DynStore() = default;

    /// Symbols at 0-based `positions` of U, C or H level `level`; nullopt
    /// for symbols the server does not produce.
    virtual std::vector<std::optional<DynSymbol>> fetch(DynRegion region, std::size_t level,
                                                        std::span<const std::uint64_t> positions) = 0;
    /// Every leaf of U or of one H level.
    virtual std::vector<Bytes> fetch_all(DynRegion region, std::size_t level) = 0;
    /// Replaces U[i] (0-based) and returns the previous symbol with its path.
    virtual DynSymbol write_u(std::uint64_t i, const Bytes& leaf) = 0;
    /// Stores H level `level` and empties every level below it.
    virtual void put_level(std::size_t level, const std::vector<Bytes>& symbols) = 0;
    /// Replaces C and empties H.
    virtual void put_c(const std::vector<Bytes>& symbols) = 0;
};

/// Honest server state: U, C and H with their Merkle trees.
class DynServerState : public DynStore {
public:
    DynServerState(FieldPtr field, DynParams params, std::vector<Bytes> u, std::vector<Bytes> c);

    const FieldPtr& field() const { return field_; }
    const DynParams& params() const { return params_; }
    std::uint64_t writes_since_rebuild() const { return w_; }
    /// Bit l set iff level l holds records.
    std::uint64_t occupancy() const;
    bool level_full(std::size_t l) const { return l < h_.size() && h_[l].has_value(); }

    std::vector<std::optional<DynSymbol>> fetch(DynRegion region, std::size_t level,
                                                std::span<const std::uint64_t> positions) override;
    std::vector<Bytes> fetch_all(DynRegion region, std::size_t level) override;
    DynSymbol write_u(std::uint64_t i, const Bytes& leaf) override;
    void put_level(std::size_t level, const std::vector<Bytes>& symbols) override;
    void put_c(const std::vector<Bytes>& symbols) override;

    /// Direct access for damage injection; the Merkle trees are left as they
    /// were, so altered or emptied leaves no longer authenticate.
    std::vector<Bytes>& raw(DynRegion region, std::size_t level = 0);

    /// Directory layout: U.dat, C.dat, H/level-<l>.dat, meta.
    void save(const std::filesystem::path& dir) const;
    static DynServerState load(const std::filesystem::path& dir);

private:
    struct Structure {
        std::vector<Bytes> leaves;
        MerkleTree tree;
    };
    Structure& structure(DynRegion region, std::size_t level);
    static Structure build(std::vector<Bytes> leaves);

    FieldPtr field_;
    DynParams params_;
    Structure u_;
    Structure c_;
    std::vector<std::optional<Structure>> h_;
    std::uint64_t w_ = 0;
};

/// Everything the client keeps between operations.
struct DynClientState {
    DynParams params;
    std::uint64_t original_length = 0;  // bytes of the initial file
    Digest u_root{};
    Digest c_root{};
    std::vector<std::optional<Digest>> level_roots;
    std::uint64_t w = 0;
    std::uint64_t seq = 0;
    // Counters.
    std::uint64_t writes = 0;
    std::uint64_t c_rebuilds = 0;
    std::uint64_t reencoded_symbols = 0;  // symbols written by H level rebuilds
};

struct DynDeficit {
    DynRegion region;
    std::size_t level;   // H level; 0 otherwise
    std::size_t stripe;  // C stripe; 0 otherwise
    std::size_t valid;
    std::size_t required;
};

struct DynExtraction {
    std::optional<std::vector<DynBlock>> blocks;
    std::vector<DynDeficit> deficient;
    bool ok() const { return blocks.has_value(); }
    std::string report() const;
};

class DynClient {
public:
    DynClient(FieldPtr field, DynClientState state);

    /// Splits `file` into n blocks (zero padded) and builds the initial server
    /// state. Throws UsageError for an empty or oversized file.
    static std::pair<DynClient, DynServerState> init(ByteView file, const FieldPtr& field, DynParams params);

    const DynClientState& state() const { return state_; }
    const FieldPtr& field() const { return field_; }
    /// U, C and one per H level.
    std::size_t root_count() const { return 2 + state_.level_roots.size(); }
    /// Bit l set iff the client holds a root for level l.
    std::uint64_t occupancy() const;

    /// U[i], 1-based. Throws IntegrityError when the path does not verify.
    DynBlock read(DynStore& server, std::uint64_t i);
    /// Throws UsageError for a bad index or block width, IntegrityError when
    /// the server's answers do not verify.
    void write(DynStore& server, std::uint64_t i, const DynBlock& value);
    /// Samples `samples` positions of C, of each full H level and of U.
    bool audit(DynStore& server, std::size_t samples, Rng& rng) const;
    /// Decodes C and every full level from authenticated symbols and replays
    /// the records over the snapshot.
    DynExtraction extract(DynStore& server) const;
    /// extract() as the original byte layout; block values written later are
    /// packed back as payload bytes.
    std::optional<Bytes> extract_bytes(DynStore& server) const;

    /// Leaf encodings.
    Bytes encode_block(const DynBlock& b) const;
    DynBlock decode_block(ByteView leaf) const;

private:
    void cascade(DynStore& server, WriteRecord record);
    void rebuild_c(DynStore& server);
    const ReedSolomon<PrimeCodeField>& level_code(std::size_t l) const;
    std::vector<Bytes> encode_level(std::size_t l, const std::vector<WriteRecord>& records) const;
    std::vector<WriteRecord> decode_level(std::size_t l, const std::vector<std::optional<Bytes>>& symbols,
                                          std::size_t& valid) const;

    FieldPtr field_;
    DynClientState state_;
    mutable std::map<std::size_t, std::shared_ptr<ReedSolomon<PrimeCodeField>>> level_codes_;
};

/// C symbols for the given U blocks.
std::vector<Bytes> dyn_encode_c(const FieldPtr& field, const DynParams& params, const std::vector<DynBlock>& u);

}  // namespace por
