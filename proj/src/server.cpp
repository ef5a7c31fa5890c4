#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <shared_mutex>

#include <json.hpp>

#include "por/error.hpp"
#include "por/service.hpp"
#include "socket_io.hpp"

namespace por {

namespace fs = std::filesystem;
using json = nlohmann::json;
using wire::ErrorCode;
using wire::Frame;
using wire::MsgType;

namespace {

class UnknownFile : public Error {
public:
    UnknownFile() : Error("unknown file") {}
};

class Conflict : public Error {
public:
    using Error::Error;
};

Frame error_frame(ErrorCode code, const std::string& message) {
    return {MsgType::error, wire::encode(wire::ErrorReply{code, message})};
}

Frame ok_frame(Bytes payload = {}) { return {MsgType::ok, std::move(payload)}; }

Bytes read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& p, ByteView data) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        if (!out) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, p);
}

mpz_class mpz_from_bytes(ByteView b) {
    mpz_class v;
    if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
    return v;
}

// Files are replaced by rename, so the inode changes on every rewrite even
// when the timestamp tick does not.
struct FileStamp {
    ino_t inode = 0;
    std::int64_t mtime_ns = 0;
    off_t size = 0;
    bool operator==(const FileStamp&) const = default;
};

FileStamp stamp(const fs::path& p) {
    struct stat st {};
    if (::stat(p.c_str(), &st) != 0) return {};
    return {st.st_ino, std::int64_t{st.st_mtim.tv_sec} * 1000000000 + st.st_mtim.tv_nsec, st.st_size};
}

}  // namespace

fs::path store_directory(const fs::path& dir) {
    if (const char* env = std::getenv("POR_STORE_DIR"); env && *env) return env;
    return dir;
}

Address Address::parse(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0) throw UsageError("address must be host:port");
    unsigned port = 0;
    const auto digits = text.substr(colon + 1);
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc() || end != digits.data() + digits.size() || port > 65535) {
        throw UsageError("bad port in address " + std::string(text));
    }
    return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

struct StorageServer::Entry {
    CatalogEntry meta;
    std::shared_mutex rw;  // reads shared, writes exclusive
    std::mutex cache_mu;
    std::shared_ptr<const TaggedFile> cached;
    FileStamp blocks_stamp, tags_stamp;
    std::shared_ptr<DynServerState> dyn;
    FileStamp dyn_stamp;
};

StorageServer::StorageServer(fs::path dir, ServerOptions options) : dir_(std::move(dir)), options_(options) {
    fs::create_directories(dir_ / "files");
    load_catalog();
}

StorageServer::~StorageServer() { stop(); }

void StorageServer::load_catalog() {
    const auto path = dir_ / "catalog.json";
    if (!fs::exists(path)) return;
    json j;
    try {
        const auto text = read_file(path);
        j = json::parse(text.begin(), text.end());
        for (const auto& e : j.at("files")) {
            auto entry = std::make_shared<Entry>();
            auto& m = entry->meta;
            m.file_id = e.at("id").get<std::string>();
            m.kind = e.at("kind").get<std::string>();
            m.scheme = e.at("scheme").get<std::uint8_t>();
            m.n = e.at("n").get<std::uint64_t>();
            m.f = e.at("f").get<std::uint32_t>();
            m.created = e.at("created").get<std::int64_t>();
            m.path = e.at("path").get<std::string>();
            if (m.kind == "dynamic") {
                entry->dyn = std::make_shared<DynServerState>(DynServerState::load(dir_ / m.path));
                entry->dyn_stamp = stamp(dir_ / m.path / "meta");
            }
            entries_[m.file_id] = std::move(entry);
        }
    } catch (const json::exception& e) {
        throw DecodeError(std::string("bad catalog: ") + e.what());
    }
}

void StorageServer::save_catalog() const {
    json files = json::array();
    for (const auto& [id, e] : entries_) {
        const auto& m = e->meta;
        files.push_back({{"id", m.file_id},
                         {"kind", m.kind},
                         {"scheme", m.scheme},
                         {"n", m.n},
                         {"f", m.f},
                         {"created", m.created},
                         {"path", m.path}});
    }
    const auto text = json{{"files", files}}.dump(2);
    write_file(dir_ / "catalog.json", as_bytes(text));
}

std::vector<CatalogEntry> StorageServer::catalog() const {
    std::lock_guard lock(catalog_mu_);
    std::vector<CatalogEntry> out;
    for (const auto& [id, e] : entries_) out.push_back(e->meta);
    return out;
}

std::shared_ptr<StorageServer::Entry> StorageServer::find(const std::string& file_id) const {
    std::lock_guard lock(catalog_mu_);
    auto it = entries_.find(file_id);
    if (it == entries_.end()) throw UnknownFile();
    return it->second;
}

std::shared_ptr<const TaggedFile> StorageServer::tagged(Entry& e) const {
    if (e.meta.kind != "tagged") throw UsageError("file is not a tagged file");
    const auto base = dir_ / e.meta.path;
    std::lock_guard lock(e.cache_mu);
    const auto bs = stamp(base / "blocks.dat");
    const auto ts = stamp(base / "tags.dat");
    if (!e.cached || !(bs == e.blocks_stamp) || !(ts == e.tags_stamp)) {
        Bytes tags;
        if (fs::exists(base / "tags.dat")) tags = read_file(base / "tags.dat");
        e.cached = std::make_shared<TaggedFile>(
            TaggedFile::parse_lenient(read_file(base / "blocks.dat"), tags, e.meta.file_id));
        e.blocks_stamp = bs;
        e.tags_stamp = ts;
    }
    return e.cached;
}

std::shared_ptr<DynServerState> StorageServer::dynamic(Entry& e) const {
    if (e.meta.kind != "dynamic") throw UsageError("file is not dynamic");
    const auto base = dir_ / e.meta.path;
    std::lock_guard lock(e.cache_mu);
    // Picks up state changed on disk by another process.
    const auto s = stamp(base / "meta");
    if (!(s == e.dyn_stamp)) {
        e.dyn = std::make_shared<DynServerState>(DynServerState::load(base));
        e.dyn_stamp = s;
    }
    return e.dyn;
}

Frame StorageServer::handle(const Frame& request) {
    try {
        switch (request.type) {
            case MsgType::store: return store(request.payload);
            case MsgType::challenge: return challenge(request.payload);
            case MsgType::read: return read(request.payload);
            case MsgType::audit: return audit(request.payload);
            case MsgType::write: return write(request.payload);
            default: return error_frame(ErrorCode::bad_request, "not a request type");
        }
    } catch (const UnknownFile& e) {
        return error_frame(ErrorCode::unknown_file, e.what());
    } catch (const Conflict& e) {
        return error_frame(ErrorCode::conflict, e.what());
    } catch (const DecodeError& e) {
        return error_frame(ErrorCode::malformed, e.what());
    } catch (const UsageError& e) {
        return error_frame(ErrorCode::bad_request, e.what());
    } catch (const std::exception& e) {
        return error_frame(ErrorCode::internal, e.what());
    }
}

Frame StorageServer::store(ByteView payload) {
    const auto req = wire::decode_store(payload);
    auto entry = std::make_shared<Entry>();
    auto& m = entry->meta;
    m.created = static_cast<std::int64_t>(std::time(nullptr));
    if (req.kind == wire::StoreKind::tagged) {
        const auto t = TaggedFile::parse(req.body);
        m.file_id = t.file_id;
        m.kind = "tagged";
        m.scheme = static_cast<std::uint8_t>(t.scheme);
        m.n = t.size();
        m.f = t.container.header.f;
        m.path = "files/" + m.file_id;
        {
            std::lock_guard lock(catalog_mu_);
            if (entries_.count(m.file_id)) return ok_frame(wire::encode(wire::StoredReply{m.file_id}));
        }
        const auto base = dir_ / m.path;
        fs::create_directories(base);
        write_file(base / "blocks.dat", t.container.serialize());
        write_file(base / "tags.dat", t.serialize_tags());
    } else {
        const auto up = wire::decode_dyn_upload(req.body);
        const auto field = PrimeField::create(mpz_from_bytes(up.prime));
        DynParams params{up.n, up.beta, CodeParams(up.c_n, up.c_f)};
        if (params.n == 0 || params.beta == 0) throw UsageError("n and beta must be positive");
        if (up.c.size() != params.c_symbols()) throw UsageError("C has wrong symbol count");
        const auto u_root = MerkleTree(up.u).root();
        const auto c_root = MerkleTree(up.c).root();
        m.file_id = wire::dynamic_file_id(up.nonce, u_root, c_root);
        m.kind = "dynamic";
        m.n = params.n;
        m.f = up.c_f;
        m.path = "files/" + m.file_id;
        {
            std::lock_guard lock(catalog_mu_);
            if (entries_.count(m.file_id)) throw Conflict("file id already stored");
        }
        entry->dyn = std::make_shared<DynServerState>(field, params, up.u, up.c);
        entry->dyn->save(dir_ / m.path);
        entry->dyn_stamp = stamp(dir_ / m.path / "meta");
    }
    std::lock_guard lock(catalog_mu_);
    entries_.emplace(m.file_id, entry);
    save_catalog();
    return ok_frame(wire::encode(wire::StoredReply{m.file_id}));
}

Frame StorageServer::challenge(ByteView payload) {
    auto e = find(wire::peek_file_id(payload));
    std::shared_lock lock(e->rw);
    const auto t = tagged(*e);
    ByteReader r(payload);
    const auto ch = Challenge::read(t->field(), r);
    r.expect_end();
    return {MsgType::proof, encode_proof(por_prove(*t, ch))};
}

Frame StorageServer::read(ByteView payload) {
    const auto req = wire::decode_read(payload);
    auto e = find(req.file_id);
    std::shared_lock lock(e->rw);
    if (req.kind == wire::ReadKind::blocks) {
        const auto t = tagged(*e);
        wire::BlocksReply reply;
        for (auto i : req.indices) {
            if (i == 0 || i > t->size()) throw UsageError("block index " + std::to_string(i) + " out of range");
            reply.items.push_back({t->block(i).to_bytes(), t->tag_bytes(i)});
        }
        return ok_frame(wire::encode(reply));
    }
    return ok_frame(wire::encode(wire::LeavesReply{dynamic(*e)->fetch_all(req.region, req.level)}));
}

Frame StorageServer::audit(ByteView payload) {
    const auto req = wire::decode_audit(payload);
    auto e = find(req.file_id);
    std::shared_lock lock(e->rw);
    return ok_frame(wire::encode(wire::SymbolsReply{dynamic(*e)->fetch(req.region, req.level, req.positions)}));
}

Frame StorageServer::write(ByteView payload) {
    const auto req = wire::decode_write(payload);
    auto e = find(req.file_id);
    std::unique_lock lock(e->rw);
    const auto dyn = dynamic(*e);
    Bytes reply;
    switch (req.kind) {
        case wire::WriteKind::u: {
            if (req.index >= dyn->params().n) throw UsageError("U index out of range");
            auto old = dyn->write_u(req.index, req.leaves.at(0));
            reply = wire::encode(wire::SymbolsReply{{std::move(old)}});
            break;
        }
        case wire::WriteKind::level: dyn->put_level(req.level, req.leaves); break;
        case wire::WriteKind::c: dyn->put_c(req.leaves); break;
    }
    dyn->save(dir_ / e->meta.path);
    std::lock_guard cache(e->cache_mu);
    e->dyn_stamp = stamp(dir_ / e->meta.path / "meta");
    return ok_frame(std::move(reply));
}

// ---------------------------------------------------------------------------
// Network loop

void StorageServer::bind(const Address& address) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const auto port = std::to_string(address.port);
    if (int rc = getaddrinfo(address.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        throw TransportError("cannot resolve " + address.host + ": " + gai_strerror(rc));
    }
    std::string last = "no usable address";
    for (auto* ai = res; ai; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        int one = 1;
        setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
            listen_fd_ = fd;
            break;
        }
        last = std::strerror(errno);
        ::close(fd);
    }
    freeaddrinfo(res);
    if (listen_fd_ < 0) throw TransportError("cannot listen on " + address.str() + ": " + last);
    sockaddr_storage ss{};
    socklen_t len = sizeof ss;
    getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&ss), &len);
    port_ = ntohs(ss.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port
                                           : reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
}

void StorageServer::run() {
    if (listen_fd_ < 0) throw UsageError("bind before run");
    while (!stopping_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (stopping_) break;
            if (errno == EINTR || errno == ECONNABORTED) continue;
            break;
        }
        std::vector<std::thread> done;
        {
            std::lock_guard lock(conn_mu_);
            done.swap(finished_);
            connections_.emplace(fd, std::thread([this, fd] { serve_connection(fd); }));
        }
        for (auto& t : done) t.join();
    }
}

void StorageServer::start() {
    accept_thread_ = std::thread([this] { run(); });
}

void StorageServer::request_stop() noexcept {
    stopping_ = true;
    if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
}

void StorageServer::stop() {
    if (stopped_.exchange(true)) return;
    stopping_ = true;
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(conn_mu_);
        for (auto& [fd, t] : connections_) {
            ::shutdown(fd, SHUT_RDWR);
            threads.push_back(std::move(t));
        }
        connections_.clear();
        for (auto& t : finished_) threads.push_back(std::move(t));
        finished_.clear();
    }
    for (auto& t : threads) t.join();
}

void StorageServer::serve_connection(int fd) {
    try {
        for (;;) {
            std::uint8_t prefix[4];
            if (!net::read_exact(fd, prefix, 4, true)) break;
            const std::uint32_t length = (std::uint32_t{prefix[0]} << 24) | (std::uint32_t{prefix[1]} << 16) |
                                         (std::uint32_t{prefix[2]} << 8) | prefix[3];
            if (length == 0 || length > options_.max_frame) {
                net::write_all(fd, wire::encode_frame(error_frame(ErrorCode::malformed, "bad frame length")));
                break;
            }
            Bytes body(length);
            net::read_exact(fd, body.data(), length, false);
            const auto type = body[0];
            Frame reply;
            if (!wire::is_known_type(type)) {
                reply = error_frame(ErrorCode::unknown_type, "unknown message type " + std::to_string(type));
            } else {
                reply = handle({static_cast<MsgType>(type), Bytes(body.begin() + 1, body.end())});
            }
            net::write_all(fd, wire::encode_frame(reply));
        }
    } catch (const TransportError&) {
    }
    std::lock_guard lock(conn_mu_);
    if (auto it = connections_.find(fd); it != connections_.end()) {
        finished_.push_back(std::move(it->second));
        connections_.erase(it);
    }
    ::close(fd);
}

}  // namespace por
