#include "por/wire.hpp"

#include "por/error.hpp"
#include "por/hash.hpp"

namespace por::wire {

namespace {

void write_list(ByteWriter& w, const std::vector<Bytes>& xs) {
    w.u32_be(static_cast<std::uint32_t>(xs.size()));
    for (const auto& x : xs) w.blob(x);
}

std::vector<Bytes> read_list(ByteReader& r) {
    const auto count = r.u32_be();
    std::vector<Bytes> out;
    for (std::uint32_t k = 0; k < count; ++k) out.push_back(r.blob());
    return out;
}

void write_u64s(ByteWriter& w, const std::vector<std::uint64_t>& xs) {
    w.u32_be(static_cast<std::uint32_t>(xs.size()));
    for (auto x : xs) w.u64_be(x);
}

std::vector<std::uint64_t> read_u64s(ByteReader& r) {
    const auto count = r.u32_be();
    if (count > r.remaining() / 8) throw DecodeError("index list longer than payload");
    std::vector<std::uint64_t> out(count);
    for (auto& x : out) x = r.u64_be();
    return out;
}

DynRegion read_region(ByteReader& r) {
    const auto v = r.u8();
    if (v > 2) throw DecodeError("unknown region " + std::to_string(v));
    return static_cast<DynRegion>(v);
}

template <class F>
auto decode_all(ByteView data, F&& body) {
    ByteReader r(data);
    auto out = body(r);
    r.expect_end();
    return out;
}

}  // namespace

bool is_known_type(std::uint8_t t) { return t >= 1 && t <= 8; }

Bytes encode_frame(const Frame& f) {
    ByteWriter w;
    w.u32_be(static_cast<std::uint32_t>(f.payload.size() + 1));
    w.u8(static_cast<std::uint8_t>(f.type));
    w.raw(f.payload);
    return std::move(w).take();
}

Frame decode_frame(ByteView data, std::uint32_t max_frame) {
    ByteReader r(data);
    const auto length = r.u32_be();
    if (length == 0) throw DecodeError("empty frame");
    if (length > max_frame) throw DecodeError("frame exceeds size limit");
    const auto type = r.u8();
    if (!is_known_type(type)) throw DecodeError("unknown message type " + std::to_string(type));
    auto body = r.raw(length - 1);
    r.expect_end();
    return {static_cast<MsgType>(type), Bytes(body.begin(), body.end())};
}

Bytes encode(const StoreRequest& m) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(m.kind));
    w.raw(m.body);
    return std::move(w).take();
}

StoreRequest decode_store(ByteView data) {
    ByteReader r(data);
    const auto kind = r.u8();
    if (kind != 1 && kind != 2) throw DecodeError("unknown store kind");
    auto rest = r.raw(r.remaining());
    return {static_cast<StoreKind>(kind), Bytes(rest.begin(), rest.end())};
}

Bytes encode(const DynUpload& m) {
    ByteWriter w;
    w.blob(m.nonce);
    w.blob(m.prime);
    w.u64_be(m.n);
    w.u32_be(m.beta);
    w.u32_be(m.c_n);
    w.u32_be(m.c_f);
    write_list(w, m.u);
    write_list(w, m.c);
    return std::move(w).take();
}

DynUpload decode_dyn_upload(ByteView data) {
    return decode_all(data, [](ByteReader& r) {
        DynUpload m;
        m.nonce = r.blob();
        m.prime = r.blob();
        m.n = r.u64_be();
        m.beta = r.u32_be();
        m.c_n = r.u32_be();
        m.c_f = r.u32_be();
        m.u = read_list(r);
        m.c = read_list(r);
        return m;
    });
}

std::string dynamic_file_id(ByteView nonce, const Digest& u_root, const Digest& c_root) {
    const auto d = sha256({as_bytes("dynamic"), nonce, u_root, c_root});
    return "d" + to_hex(ByteView(d).first(16));
}

Bytes encode(const ReadRequest& m) {
    ByteWriter w;
    w.str(m.file_id);
    w.u8(static_cast<std::uint8_t>(m.kind));
    if (m.kind == ReadKind::blocks) {
        write_u64s(w, m.indices);
    } else {
        w.u8(static_cast<std::uint8_t>(m.region));
        w.u32_be(m.level);
    }
    return std::move(w).take();
}

ReadRequest decode_read(ByteView data) {
    return decode_all(data, [](ByteReader& r) {
        ReadRequest m;
        m.file_id = r.str();
        const auto kind = r.u8();
        if (kind == 1) {
            m.kind = ReadKind::blocks;
            m.indices = read_u64s(r);
        } else if (kind == 2) {
            m.kind = ReadKind::leaves;
            m.region = read_region(r);
            m.level = r.u32_be();
        } else {
            throw DecodeError("unknown read kind");
        }
        return m;
    });
}

Bytes encode(const BlocksReply& m) {
    ByteWriter w;
    w.u32_be(static_cast<std::uint32_t>(m.items.size()));
    for (const auto& it : m.items) {
        w.blob(it.block);
        w.blob(it.tag);
    }
    return std::move(w).take();
}

BlocksReply decode_blocks(ByteView data) {
    return decode_all(data, [](ByteReader& r) {
        BlocksReply m;
        const auto count = r.u32_be();
        for (std::uint32_t k = 0; k < count; ++k) {
            RawBlock b;
            b.block = r.blob();
            b.tag = r.blob();
            m.items.push_back(std::move(b));
        }
        return m;
    });
}

Bytes encode(const LeavesReply& m) {
    ByteWriter w;
    write_list(w, m.leaves);
    return std::move(w).take();
}

LeavesReply decode_leaves(ByteView data) {
    return decode_all(data, [](ByteReader& r) { return LeavesReply{read_list(r)}; });
}

Bytes encode(const AuditRequest& m) {
    ByteWriter w;
    w.str(m.file_id);
    w.u8(static_cast<std::uint8_t>(m.region));
    w.u32_be(m.level);
    write_u64s(w, m.positions);
    return std::move(w).take();
}

AuditRequest decode_audit(ByteView data) {
    return decode_all(data, [](ByteReader& r) {
        AuditRequest m;
        m.file_id = r.str();
        m.region = read_region(r);
        m.level = r.u32_be();
        m.positions = read_u64s(r);
        return m;
    });
}

bool operator==(const SymbolsReply& a, const SymbolsReply& b) {
    if (a.symbols.size() != b.symbols.size()) return false;
    for (std::size_t k = 0; k < a.symbols.size(); ++k) {
        const auto& x = a.symbols[k];
        const auto& y = b.symbols[k];
        if (x.has_value() != y.has_value()) return false;
        if (x && (x->leaf != y->leaf || !(x->path == y->path))) return false;
    }
    return true;
}

Bytes encode(const SymbolsReply& m) {
    ByteWriter w;
    w.u32_be(static_cast<std::uint32_t>(m.symbols.size()));
    for (const auto& s : m.symbols) {
        w.u8(s ? 1 : 0);
        if (!s) continue;
        w.blob(s->leaf);
        s->path.write(w);
    }
    return std::move(w).take();
}

SymbolsReply decode_symbols(ByteView data) {
    return decode_all(data, [](ByteReader& r) {
        SymbolsReply m;
        const auto count = r.u32_be();
        for (std::uint32_t k = 0; k < count; ++k) {
            const auto present = r.u8();
            if (present > 1) throw DecodeError("bad presence flag");
            if (present == 0) {
                m.symbols.emplace_back();
                continue;
            }
            DynSymbol s;
            s.leaf = r.blob();
            s.path = MerklePath::read(r);
            m.symbols.emplace_back(std::move(s));
        }
        return m;
    });
}

Bytes encode(const WriteRequest& m) {
    ByteWriter w;
    w.str(m.file_id);
    w.u8(static_cast<std::uint8_t>(m.kind));
    switch (m.kind) {
        case WriteKind::u:
            w.u64_be(m.index);
            w.blob(m.leaves.empty() ? Bytes{} : m.leaves.front());
            break;
        case WriteKind::level:
            w.u32_be(m.level);
            write_list(w, m.leaves);
            break;
        case WriteKind::c: write_list(w, m.leaves); break;
    }
    return std::move(w).take();
}

WriteRequest decode_write(ByteView data) {
    return decode_all(data, [](ByteReader& r) {
        WriteRequest m;
        m.file_id = r.str();
        const auto kind = r.u8();
        switch (kind) {
            case 1:
                m.kind = WriteKind::u;
                m.index = r.u64_be();
                m.leaves.push_back(r.blob());
                break;
            case 2:
                m.kind = WriteKind::level;
                m.level = r.u32_be();
                m.leaves = read_list(r);
                break;
            case 3:
                m.kind = WriteKind::c;
                m.leaves = read_list(r);
                break;
            default: throw DecodeError("unknown write kind");
        }
        return m;
    });
}

Bytes encode(const ErrorReply& m) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(m.code));
    w.str(m.message);
    return std::move(w).take();
}

ErrorReply decode_error(ByteView data) {
    return decode_all(data, [](ByteReader& r) {
        ErrorReply m;
        const auto code = r.u8();
        if (code < 1 || code > 6) throw DecodeError("unknown error code");
        m.code = static_cast<ErrorCode>(code);
        m.message = r.str();
        return m;
    });
}

Bytes encode(const StoredReply& m) {
    ByteWriter w;
    w.str(m.file_id);
    return std::move(w).take();
}

StoredReply decode_stored(ByteView data) {
    return decode_all(data, [](ByteReader& r) { return StoredReply{r.str()}; });
}

std::string peek_file_id(ByteView challenge) {
    ByteReader r(challenge);
    return r.str();
}

}  // namespace por::wire
