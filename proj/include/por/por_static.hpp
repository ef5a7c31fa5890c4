#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "por/algebra.hpp"
#include "por/authenticators.hpp"
#include "por/erasure.hpp"

namespace por {

enum class Scheme : std::uint8_t {
    jk_mac = 1,      // per-block MAC_k(i || F[i])
    jk_bls = 2,      // jk_mac with BLS signatures in place of MACs
    sentinel = 3,    // encrypted blocks plus hidden sentinels
    sw_private = 4,  // sigma_i = h_k(i) + alpha F[i]
    sw_public = 5,   // sigma_i = (H(i) alpha^F[i])^x
};

std::string scheme_name(Scheme s);
/// Throws UsageError for unknown names.
Scheme parse_scheme(std::string_view name);
bool is_jk(Scheme s);

// ---------------------------------------------------------------------------
// Keys

struct JkMacKeys {
    MacKey mac;
};

struct JkBlsKeys {
    BlsKeyPair keys;
};

struct SwPrivateKeys {
    FieldElement alpha;
    PrfKey prf;
};

/// Everything needed to verify a public-scheme proof. Holds no secret.
struct SwPublicParams {
    GroupElement v;      // g^x
    GroupElement alpha;  // second generator of G
};

struct SwPublicKeys {
    FieldElement x;
    SwPublicParams pub;
};

struct SentinelKeys {
    PrfKey values;   // sentinel contents
    PrfKey layout;   // store permutation
    PrfKey pads;     // block encryption
};

using ClientKeys = std::variant<JkMacKeys, JkBlsKeys, SwPrivateKeys, SwPublicKeys, SentinelKeys>;

/// What a verifier needs: the secret keys for private schemes, only the
/// public key for public ones.
struct BlsPublicKey {
    GroupElement pk;
};
using VerifierKey = std::variant<JkMacKeys, BlsPublicKey, SwPrivateKeys, SwPublicParams>;

Scheme key_scheme(const ClientKeys& k);
ClientKeys generate_keys(Scheme s, const GroupPtr& group, Rng& rng);
/// Throws UsageError for sentinel keys, which are audited with sentinel_audit.
VerifierKey verifier_key(const ClientKeys& k);

// ---------------------------------------------------------------------------
// Stored file

using TagList = std::variant<std::vector<Bytes>, std::vector<FieldElement>, std::vector<GroupElement>>;

/// Client-side record of an outsourced file: everything needed to audit and
/// extract it apart from the keys.
struct FileManifest {
    std::string file_id;
    Scheme scheme = Scheme::sw_private;
    ContainerHeader header;

    std::uint64_t block_count() const { return header.stripes * header.n + header.extra_symbols; }
    CodeParams code() const { return {header.n, header.f}; }
};

/// Encoded blocks F[1..n] and their authenticators. Serialized as the
/// erasure container followed by a tag section:
///   scheme u8 | tag width u16 | tag count u64 | tags
/// (little-endian). JK tags are opaque bytes (MAC or serialized signature).
struct TaggedFile {
    Scheme scheme = Scheme::sw_private;
    Container container;
    GroupPtr group;
    TagList tags;
    std::string file_id;

    std::uint64_t size() const { return container.elements.size(); }
    const FieldPtr& field() const { return container.field; }
    const FieldElement& block(std::uint64_t index) const { return container.elements.at(index - 1); }
    FileManifest manifest() const { return {file_id, scheme, container.header}; }
    /// Serialized tag of block `index` (1-based), as sent in a fetch reply.
    Bytes tag_bytes(std::uint64_t index) const;
    std::size_t tag_width() const;

    /// Container followed by the tag section.
    Bytes serialize() const;
    Bytes serialize_tags() const;
    /// Strict parse. The file id is recomputed from content.
    static TaggedFile parse(ByteView data);
    /// Server-side load of a possibly damaged file kept as two parts:
    /// missing or malformed blocks and tags become zeros, as a bluffing
    /// server would answer. Only the container header must be intact.
    static TaggedFile parse_lenient(ByteView container, ByteView tags, std::string file_id);

    /// Digest-derived identifier over the serialized content.
    std::string compute_id() const;
};

/// Encodes `file` with `code` over the keys' field and tags every block.
/// Throws UsageError for an empty file or sentinel keys.
TaggedFile por_setup(ByteView file, const ClientKeys& keys, const GroupPtr& group, CodeParams code);

// ---------------------------------------------------------------------------
// Audit protocol

struct ChallengeEntry {
    std::uint64_t index;  // 1-based block position
    FieldElement coeff;   // nu_i; 1 for JK challenges
    bool operator==(const ChallengeEntry&) const = default;
};

struct Challenge {
    std::string file_id;
    std::uint64_t nonce = 0;
    std::vector<ChallengeEntry> entries;

    /// file id (u32 length + bytes) | nonce u64 | element width u16 |
    /// count u32 | per entry: index u64, coefficient. Big-endian.
    void write(ByteWriter& w) const;
    static Challenge read(const FieldPtr& field, ByteReader& r);
    bool operator==(const Challenge&) const = default;
};

/// `l` distinct indices from [1, n] without replacement, in ascending order.
/// Coefficients are uniform in Z_p when `with_coefficients`, else 1.
Challenge gen_challenge(const FieldPtr& field, std::string file_id, std::uint64_t n, std::uint64_t l, Rng& rng,
                        bool with_coefficients = true);

struct BlockWithTag {
    FieldElement block;
    Bytes tag;
    bool operator==(const BlockWithTag&) const = default;
};

struct JkProof {
    std::vector<BlockWithTag> items;
    bool operator==(const JkProof&) const = default;
};
struct SwPrivateProof {
    FieldElement sigma;
    FieldElement mu;
    bool operator==(const SwPrivateProof&) const = default;
};
struct SwPublicProof {
    GroupElement sigma;
    FieldElement mu;
    bool operator==(const SwPublicProof&) const = default;
};
using Proof = std::variant<JkProof, SwPrivateProof, SwPublicProof>;

/// kind u8 (1 JK, 2 SW-private, 3 SW-public) followed by the body.
void write_proof(ByteWriter& w, const Proof& p);
Proof read_proof(const GroupPtr& group, ByteReader& r);
Bytes encode_proof(const Proof& p);

/// Honest prover. Throws UsageError for out-of-range indices.
Proof por_prove(const TaggedFile& store, const Challenge& ch);

struct VerifyResult {
    bool ok = false;
    std::string diagnostic;
    explicit operator bool() const { return ok; }
};

VerifyResult por_verify(const VerifierKey& key, const GroupPtr& group, const Challenge& ch, const Proof& proof);

/// Public verification for the BLS-based scheme; takes no secret.
VerifyResult verify_public(const SwPublicParams& pub, const GroupPtr& group, const Challenge& ch,
                           const SwPublicProof& proof);

/// Per-index values shared by tagging and verification; injectable so the
/// algebra can be checked against hand-computed instances.
using IndexToField = std::function<FieldElement(std::uint64_t)>;
using IndexToGroup = std::function<GroupElement(std::uint64_t)>;

namespace sw {
FieldElement private_tag(const FieldElement& alpha, const FieldElement& h_i, const FieldElement& block);
bool private_check(const FieldElement& alpha, const IndexToField& h, const Challenge& ch, const SwPrivateProof& pr);
GroupElement public_tag(const FieldElement& x, const GroupElement& alpha, const GroupElement& h_i,
                        const FieldElement& block);
bool public_check(const SwPublicParams& pub, const GroupPtr& group, const IndexToGroup& h, const Challenge& ch,
                  const SwPublicProof& pr);
/// The default full-domain hash of a block index.
GroupElement index_hash(const GroupPtr& group, std::uint64_t index);
}  // namespace sw

/// Bytes authenticated by JK tags: encode_index(i) || F[i].
Bytes jk_message(std::uint64_t index, const FieldElement& block);

// ---------------------------------------------------------------------------
// Provers

/// The server side of an audit as the client sees it.
class Prover {
public:
    virtual ~Prover() = default;
    virtual Proof prove(const Challenge& ch) = 0;
    /// Raw blocks and tags at 1-based `indices`.
    virtual std::vector<BlockWithTag> fetch(std::span<const std::uint64_t> indices) = 0;
};

/// Answers from a (possibly damaged) in-memory store.
class StoreProver : public Prover {
public:
    explicit StoreProver(std::shared_ptr<const TaggedFile> store) : store_(std::move(store)) {}
    Proof prove(const Challenge& ch) override { return por_prove(*store_, ch); }
    std::vector<BlockWithTag> fetch(std::span<const std::uint64_t> indices) override;
    const TaggedFile& store() const { return *store_; }

private:
    std::shared_ptr<const TaggedFile> store_;
};

// ---------------------------------------------------------------------------
// Sentinels

/// Verifier state: which sentinels are spent. Positions and values are
/// recomputed from keys.
struct SentinelLedger {
    std::string file_id;
    std::uint64_t sentinels = 0;
    std::uint64_t next_unspent = 0;
    std::uint64_t file_blocks = 0;  // encoded blocks, excluding sentinels

    std::uint64_t store_size() const { return file_blocks + sentinels; }
    std::uint64_t audits_remaining(std::uint64_t q) const { return q == 0 ? 0 : (sentinels - next_unspent) / q; }
};

/// Sentinel counts at or above this are rejected.
inline constexpr std::uint64_t kSentinelCapacity = std::uint64_t{1} << 24;

struct SentinelSetup {
    TaggedFile store;
    SentinelLedger ledger;
};

/// Keyed layout of a sentinel store: position of sentinel j and of encrypted
/// block i (both 0-based), derived from the layout key.
class SentinelLayout {
public:
    SentinelLayout(const SentinelKeys& keys, std::uint64_t file_blocks, std::uint64_t sentinels);
    std::uint64_t sentinel_position(std::uint64_t j) const { return perm_.at(j); }
    std::uint64_t block_position(std::uint64_t i) const { return perm_.at(sentinels_ + i); }
    std::uint64_t size() const { return perm_.size(); }

private:
    std::uint64_t sentinels_;
    std::vector<std::uint64_t> perm_;
};

FieldElement sentinel_value(const SentinelKeys& keys, const FieldPtr& field, std::uint64_t j);
FieldElement sentinel_encrypt(const SentinelKeys& keys, const FieldElement& block, std::uint64_t i);
FieldElement sentinel_decrypt(const SentinelKeys& keys, const FieldElement& stored, std::uint64_t i);

SentinelSetup sentinel_setup(ByteView file, const SentinelKeys& keys, const FieldPtr& field, CodeParams code,
                             std::uint64_t sentinels);

/// Spends the next `q` sentinels: fetches their positions and compares
/// values. Throws BudgetExhausted when fewer than `q` remain.
bool sentinel_audit(SentinelLedger& ledger, const SentinelKeys& keys, const FieldPtr& field, std::uint64_t q,
                    Prover& prover);

// ---------------------------------------------------------------------------
// Extraction

struct ExtractionPolicy {
    std::size_t batch_size = 64;
    std::size_t max_retries = 3;
    /// Required fraction of valid symbols per stripe; at least f/n.
    double rho = 0.5;
};

struct StripeDeficit {
    std::size_t stripe;
    std::size_t valid;
    std::size_t required;
    /// Sentinel files carry no per-block tags; a stripe whose symbols do not
    /// lie on one codeword is reported with this flag instead of a count.
    bool inconsistent = false;
};

struct ExtractionResult {
    std::optional<Bytes> data;
    std::vector<StripeDeficit> deficient;
    std::size_t invalid_blocks = 0;
    std::size_t checks = 0;
    bool ok() const { return data.has_value(); }
    std::string report() const;
};

/// Fetches every block in batches, authenticates them (per block for JK,
/// by aggregated batch checks with bisection for SW), treats failures as
/// erasures and decodes each stripe.
ExtractionResult extract(Prover& prover, const ClientKeys& keys, const GroupPtr& group, const FileManifest& manifest,
                         const ExtractionPolicy& policy, Rng& rng);

}  // namespace por
