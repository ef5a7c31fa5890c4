#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "por/bytes.hpp"
#include "por/merkle.hpp"
#include "por/por_dynamic.hpp"

namespace por::wire {

enum class MsgType : std::uint8_t {
    store = 1,
    challenge = 2,
    proof = 3,
    read = 4,
    write = 5,
    audit = 6,
    error = 7,
    ok = 8,
};

bool is_known_type(std::uint8_t t);

inline constexpr std::uint32_t kDefaultMaxFrame = 64u << 20;

/// length u32 (type byte plus payload) | type u8 | payload. Big-endian.
struct Frame {
    MsgType type = MsgType::ok;
    Bytes payload;
    bool operator==(const Frame&) const = default;
};

Bytes encode_frame(const Frame& f);
/// Parses exactly one frame; throws DecodeError on a short, oversized or
/// trailing-garbage buffer, or an unknown type.
Frame decode_frame(ByteView data, std::uint32_t max_frame = kDefaultMaxFrame);

// ---------------------------------------------------------------------------
// Payloads. Every codec is canonical: decode(encode(x)) == x and decoding
// rejects trailing bytes.

enum class StoreKind : std::uint8_t { tagged = 1, dynamic = 2 };

/// STORE. `body` is a serialized TaggedFile or a DynUpload.
struct StoreRequest {
    StoreKind kind = StoreKind::tagged;
    Bytes body;
    bool operator==(const StoreRequest&) const = default;
};
Bytes encode(const StoreRequest& m);
StoreRequest decode_store(ByteView data);

/// Initial dynamic server state: U and C leaves plus shape.
struct DynUpload {
    Bytes nonce;  // client-chosen, makes ids of equal files distinct
    Bytes prime;  // big-endian modulus
    std::uint64_t n = 0;
    std::uint32_t beta = 0;
    std::uint32_t c_n = 0;
    std::uint32_t c_f = 0;
    std::vector<Bytes> u;
    std::vector<Bytes> c;
    bool operator==(const DynUpload&) const = default;
};
Bytes encode(const DynUpload& m);
DynUpload decode_dyn_upload(ByteView data);

/// Id under which a dynamic upload is stored.
std::string dynamic_file_id(ByteView nonce, const Digest& u_root, const Digest& c_root);

enum class ReadKind : std::uint8_t { blocks = 1, leaves = 2 };

/// READ: raw blocks with tags of a tagged file (1-based indices), or every
/// leaf of one dynamic region.
struct ReadRequest {
    std::string file_id;
    ReadKind kind = ReadKind::blocks;
    std::vector<std::uint64_t> indices;
    DynRegion region = DynRegion::u;
    std::uint32_t level = 0;
    bool operator==(const ReadRequest&) const = default;
};
Bytes encode(const ReadRequest& m);
ReadRequest decode_read(ByteView data);

struct RawBlock {
    Bytes block;
    Bytes tag;
    bool operator==(const RawBlock&) const = default;
};
struct BlocksReply {
    std::vector<RawBlock> items;
    bool operator==(const BlocksReply&) const = default;
};
Bytes encode(const BlocksReply& m);
BlocksReply decode_blocks(ByteView data);

struct LeavesReply {
    std::vector<Bytes> leaves;
    bool operator==(const LeavesReply&) const = default;
};
Bytes encode(const LeavesReply& m);
LeavesReply decode_leaves(ByteView data);

/// AUDIT: dynamic symbols at 0-based positions, with authentication paths.
struct AuditRequest {
    std::string file_id;
    DynRegion region = DynRegion::c;
    std::uint32_t level = 0;
    std::vector<std::uint64_t> positions;
    bool operator==(const AuditRequest&) const = default;
};
Bytes encode(const AuditRequest& m);
AuditRequest decode_audit(ByteView data);

struct SymbolsReply {
    std::vector<std::optional<DynSymbol>> symbols;
};
bool operator==(const SymbolsReply& a, const SymbolsReply& b);
Bytes encode(const SymbolsReply& m);
SymbolsReply decode_symbols(ByteView data);

enum class WriteKind : std::uint8_t { u = 1, level = 2, c = 3 };

/// WRITE: replace U[index] (reply: previous symbol), store H level `level`,
/// or replace C.
struct WriteRequest {
    std::string file_id;
    WriteKind kind = WriteKind::u;
    std::uint64_t index = 0;
    std::uint32_t level = 0;
    std::vector<Bytes> leaves;
    bool operator==(const WriteRequest&) const = default;
};
Bytes encode(const WriteRequest& m);
WriteRequest decode_write(ByteView data);

enum class ErrorCode : std::uint8_t {
    malformed = 1,
    unknown_type = 2,
    unknown_file = 3,
    bad_request = 4,
    conflict = 5,
    internal = 6,
};

struct ErrorReply {
    ErrorCode code = ErrorCode::internal;
    std::string message;
    bool operator==(const ErrorReply&) const = default;
};
Bytes encode(const ErrorReply& m);
ErrorReply decode_error(ByteView data);

/// OK reply to STORE.
struct StoredReply {
    std::string file_id;
    bool operator==(const StoredReply&) const = default;
};
Bytes encode(const StoredReply& m);
StoredReply decode_stored(ByteView data);

/// File id at the front of a serialized Challenge.
std::string peek_file_id(ByteView challenge);

}  // namespace por::wire
