#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cstring>

#include "por/error.hpp"
#include "por/service.hpp"
#include "socket_io.hpp"

namespace por {

using wire::Frame;
using wire::MsgType;

Connection::Connection(const Address& address, std::chrono::milliseconds timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const auto port = std::to_string(address.port);
    if (int rc = getaddrinfo(address.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        throw TransportError("cannot resolve " + address.host + ": " + gai_strerror(rc));
    }
    std::string last = "no usable address";
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    for (auto* ai = res; ai; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
        setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            fd_ = fd;
            break;
        }
        last = std::strerror(errno);
        ::close(fd);
    }
    freeaddrinfo(res);
    if (fd_ < 0) throw TransportError("cannot connect to " + address.str() + ": " + last);
}

Connection::~Connection() {
    if (fd_ >= 0) ::close(fd_);
}

Connection::Connection(Connection&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

Frame Connection::exchange(const Frame& request) {
    if (fd_ < 0) throw TransportError("connection is closed");
    net::write_all(fd_, wire::encode_frame(request));
    std::uint8_t prefix[4];
    net::read_exact(fd_, prefix, 4, false);
    const std::uint32_t length = (std::uint32_t{prefix[0]} << 24) | (std::uint32_t{prefix[1]} << 16) |
                                 (std::uint32_t{prefix[2]} << 8) | prefix[3];
    if (length == 0 || length > wire::kDefaultMaxFrame) throw TransportError("bad reply frame length");
    Bytes body(length);
    net::read_exact(fd_, body.data(), length, false);
    if (!wire::is_known_type(body[0])) throw TransportError("unknown reply type");
    return {static_cast<MsgType>(body[0]), Bytes(body.begin() + 1, body.end())};
}

Bytes Connection::call(MsgType type, Bytes payload, MsgType expected) {
    auto reply = exchange({type, std::move(payload)});
    if (reply.type == MsgType::error) {
        const auto err = wire::decode_error(reply.payload);
        throw RemoteError(err.message);
    }
    if (reply.type != expected) throw DecodeError("unexpected reply type");
    return std::move(reply.payload);
}

Bytes Session::call(MsgType type, Bytes payload, MsgType expected) {
    try {
        if (!conn_) conn_ = std::make_unique<Connection>(address_, timeout_);
        return conn_->call(type, std::move(payload), expected);
    } catch (const TransportError&) {
        conn_.reset();
        throw;
    }
}

// ---------------------------------------------------------------------------

Proof RemoteProver::prove(const Challenge& ch) {
    ByteWriter w;
    ch.write(w);
    last_ = session_.call(MsgType::challenge, std::move(w).take(), MsgType::proof);
    ByteReader r(last_);
    auto proof = read_proof(group_, r);
    r.expect_end();
    return proof;
}

std::vector<BlockWithTag> RemoteProver::fetch(std::span<const std::uint64_t> indices) {
    wire::ReadRequest req;
    req.file_id = file_id_;
    req.kind = wire::ReadKind::blocks;
    req.indices.assign(indices.begin(), indices.end());
    const auto& field = group_->scalars();
    wire::BlocksReply reply;
    try {
        reply = wire::decode_blocks(session_.call(MsgType::read, wire::encode(req)));
    } catch (const DecodeError&) {
    }
    std::vector<BlockWithTag> out;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        BlockWithTag b{FieldElement::zero(field), {}};
        if (k < reply.items.size()) {
            try {
                b.block = FieldElement::from_bytes(field, reply.items[k].block);
                b.tag = reply.items[k].tag;
            } catch (const DecodeError&) {
            }
        }
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<std::optional<DynSymbol>> RemoteDynStore::fetch(DynRegion region, std::size_t level,
                                                            std::span<const std::uint64_t> positions) {
    wire::AuditRequest req{file_id_, region, static_cast<std::uint32_t>(level), {positions.begin(), positions.end()}};
    wire::SymbolsReply reply;
    try {
        reply = wire::decode_symbols(session_.call(MsgType::audit, wire::encode(req)));
    } catch (const DecodeError&) {
    }
    reply.symbols.resize(positions.size());
    return std::move(reply.symbols);
}

std::vector<Bytes> RemoteDynStore::fetch_all(DynRegion region, std::size_t level) {
    wire::ReadRequest req;
    req.file_id = file_id_;
    req.kind = wire::ReadKind::leaves;
    req.region = region;
    req.level = static_cast<std::uint32_t>(level);
    try {
        return wire::decode_leaves(session_.call(MsgType::read, wire::encode(req))).leaves;
    } catch (const DecodeError&) {
        return {};
    }
}

DynSymbol RemoteDynStore::write_u(std::uint64_t i, const Bytes& leaf) {
    wire::WriteRequest req;
    req.file_id = file_id_;
    req.kind = wire::WriteKind::u;
    req.index = i;
    req.leaves = {leaf};
    try {
        auto reply = wire::decode_symbols(session_.call(MsgType::write, wire::encode(req)));
        if (reply.symbols.size() == 1 && reply.symbols[0]) return std::move(*reply.symbols[0]);
    } catch (const DecodeError&) {
    }
    throw IntegrityError("server returned no previous block");
}

void RemoteDynStore::put_level(std::size_t level, const std::vector<Bytes>& symbols) {
    wire::WriteRequest req;
    req.file_id = file_id_;
    req.kind = wire::WriteKind::level;
    req.level = static_cast<std::uint32_t>(level);
    req.leaves = symbols;
    session_.call(MsgType::write, wire::encode(req));
}

void RemoteDynStore::put_c(const std::vector<Bytes>& symbols) {
    wire::WriteRequest req;
    req.file_id = file_id_;
    req.kind = wire::WriteKind::c;
    req.leaves = symbols;
    session_.call(MsgType::write, wire::encode(req));
}

// ---------------------------------------------------------------------------

namespace {

std::string expect_stored(Session& s, const wire::StoreRequest& req) {
    return wire::decode_stored(s.call(MsgType::store, wire::encode(req))).file_id;
}

Bytes prime_bytes(const FieldPtr& field) {
    const auto& p = field->modulus();
    Bytes out((mpz_sizeinbase(p.get_mpz_t(), 2) + 7) / 8);
    std::size_t written = 0;
    mpz_export(out.data(), &written, 1, 1, 1, 0, p.get_mpz_t());
    out.resize(written);
    return out;
}

}  // namespace

std::string client_upload(const Address& address, const TaggedFile& store) {
    Session s(address);
    const auto id = expect_stored(s, {wire::StoreKind::tagged, store.serialize()});
    if (id != store.file_id) throw IntegrityError("server stored the file under an unexpected id");
    return id;
}

std::string client_upload_dynamic(const Address& address, const DynClient& client, DynServerState& state, Rng& rng) {
    const auto& st = client.state();
    const auto code = st.params.c_code_or_default();
    wire::DynUpload up;
    up.nonce.resize(16);
    rng.fill(up.nonce);
    up.prime = prime_bytes(client.field());
    up.n = st.params.n;
    up.beta = static_cast<std::uint32_t>(st.params.beta);
    up.c_n = static_cast<std::uint32_t>(code.n);
    up.c_f = static_cast<std::uint32_t>(code.f);
    up.u = state.fetch_all(DynRegion::u, 0);
    up.c = state.fetch_all(DynRegion::c, 0);
    Session s(address);
    const auto id = expect_stored(s, {wire::StoreKind::dynamic, wire::encode(up)});
    if (id != wire::dynamic_file_id(up.nonce, st.u_root, st.c_root)) {
        throw IntegrityError("server stored the file under an unexpected id");
    }
    return id;
}

VerifyResult client_audit(const Address& address, const FileManifest& manifest, const VerifierKey& key,
                          const GroupPtr& group, std::uint64_t l, Rng& rng) {
    Session s(address);
    RemoteProver prover(s, manifest.file_id, group);
    const auto ch = gen_challenge(group->scalars(), manifest.file_id, manifest.block_count(), l, rng,
                                  !is_jk(manifest.scheme));
    Proof proof;
    try {
        proof = prover.prove(ch);
    } catch (const DecodeError& e) {
        return {false, std::string("malformed proof: ") + e.what()};
    }
    return por_verify(key, group, ch, proof);
}

bool client_sentinel_audit(const Address& address, SentinelLedger& ledger, const SentinelKeys& keys,
                           const FieldPtr& field, std::uint64_t q) {
    Session s(address);
    RemoteProver prover(s, ledger.file_id, BilinearGroup::transparent(field));
    return sentinel_audit(ledger, keys, field, q, prover);
}

ExtractionResult client_extract(const Address& address, const FileManifest& manifest, const ClientKeys& keys,
                                const GroupPtr& group, const ExtractionPolicy& policy, Rng& rng) {
    Session s(address);
    RemoteProver prover(s, manifest.file_id, group);
    return extract(prover, keys, group, manifest, policy, rng);
}

DynBlock client_read(const Address& address, const std::string& file_id, DynClient& client, std::uint64_t i) {
    Session s(address);
    RemoteDynStore store(s, file_id);
    return client.read(store, i);
}

void client_write(const Address& address, const std::string& file_id, DynClient& client, std::uint64_t i,
                  const DynBlock& value) {
    Session s(address);
    RemoteDynStore store(s, file_id);
    client.write(store, i, value);
}

bool client_dyn_audit(const Address& address, const std::string& file_id, const DynClient& client,
                      std::size_t samples, Rng& rng) {
    Session s(address);
    RemoteDynStore store(s, file_id);
    return client.audit(store, samples, rng);
}

DynExtraction client_dyn_extract(const Address& address, const std::string& file_id, const DynClient& client) {
    Session s(address);
    RemoteDynStore store(s, file_id);
    return client.extract(store);
}

}  // namespace por
