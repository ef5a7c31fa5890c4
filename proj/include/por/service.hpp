#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "por/por_dynamic.hpp"
#include "por/por_static.hpp"
#include "por/wire.hpp"

namespace por {

struct Address {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;

    /// "host:port"; throws UsageError otherwise.
    static Address parse(std::string_view text);
    std::string str() const { return host + ":" + std::to_string(port); }
};

/// Store directory: `dir` unless POR_STORE_DIR is set.
std::filesystem::path store_directory(const std::filesystem::path& dir);

struct CatalogEntry {
    std::string file_id;
    std::string kind;  // "tagged" or "dynamic"
    std::uint8_t scheme = 0;  // Scheme id; 0 for dynamic files
    std::uint64_t n = 0;      // stored blocks
    std::uint32_t f = 0;      // code dimension
    std::int64_t created = 0; // unix seconds
    std::string path;         // relative to the store directory
};

struct ServerOptions {
    std::uint32_t max_frame = wire::kDefaultMaxFrame;
};

/// Untrusted storage server. Holds no keys; every reply is checked by the
/// client. Tagged files are kept as two files (blocks, tags) and reloaded
/// leniently when they change on disk; dynamic files are reloaded likewise.
class StorageServer {
public:
    explicit StorageServer(std::filesystem::path dir, ServerOptions options = {});
    ~StorageServer();
    StorageServer(const StorageServer&) = delete;
    StorageServer& operator=(const StorageServer&) = delete;

    /// Port 0 picks a free port. Throws TransportError when binding fails.
    void bind(const Address& address);
    std::uint16_t port() const { return port_; }
    /// Accept loop; returns after stop().
    void run();
    /// run() on a background thread.
    void start();
    /// Stops accepting, closes live connections and joins their threads.
    void stop();
    /// Makes run() return; async-signal-safe. Call stop() afterwards.
    void request_stop() noexcept;

    /// Dispatches one request and returns the reply.
    wire::Frame handle(const wire::Frame& request);

    const std::filesystem::path& directory() const { return dir_; }
    std::vector<CatalogEntry> catalog() const;

private:
    struct Entry;

    void serve_connection(int fd);
    std::shared_ptr<Entry> find(const std::string& file_id) const;
    wire::Frame store(ByteView payload);
    wire::Frame challenge(ByteView payload);
    wire::Frame read(ByteView payload);
    wire::Frame audit(ByteView payload);
    wire::Frame write(ByteView payload);
    std::shared_ptr<const TaggedFile> tagged(Entry& e) const;
    std::shared_ptr<DynServerState> dynamic(Entry& e) const;
    void save_catalog() const;
    void load_catalog();

    std::filesystem::path dir_;
    ServerOptions options_;
    mutable std::mutex catalog_mu_;
    std::map<std::string, std::shared_ptr<Entry>> entries_;

    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::atomic<bool> stopped_{false};
    std::thread accept_thread_;
    std::mutex conn_mu_;
    std::map<int, std::thread> connections_;
    std::vector<std::thread> finished_;
};

// ---------------------------------------------------------------------------
// Client

/// One TCP connection, one request in flight. Socket failures, timeouts and
/// unparseable reply frames raise TransportError; ERROR replies raise
/// RemoteError.
class Connection {
public:
    explicit Connection(const Address& address, std::chrono::milliseconds timeout = std::chrono::seconds(60));
    ~Connection();
    Connection(Connection&& other) noexcept;
    Connection& operator=(Connection&&) = delete;
    Connection(const Connection&) = delete;

    /// Sends `request` and returns the reply frame as received.
    wire::Frame exchange(const wire::Frame& request);
    /// exchange(), then RemoteError for ERROR replies and DecodeError for any
    /// type other than `expected`.
    Bytes call(wire::MsgType type, Bytes payload, wire::MsgType expected = wire::MsgType::ok);

private:
    int fd_ = -1;
};

/// Lazily connected Connection that reconnects after a transport failure,
/// so callers can retry.
class Session {
public:
    explicit Session(Address address, std::chrono::milliseconds timeout = std::chrono::seconds(60))
        : address_(std::move(address)), timeout_(timeout) {}
    Bytes call(wire::MsgType type, Bytes payload, wire::MsgType expected = wire::MsgType::ok);
    const Address& address() const { return address_; }

private:
    Address address_;
    std::chrono::milliseconds timeout_;
    std::unique_ptr<Connection> conn_;
};

/// Prover behind the wire.
class RemoteProver : public Prover {
public:
    RemoteProver(Session& session, std::string file_id, GroupPtr group)
        : session_(session), file_id_(std::move(file_id)), group_(std::move(group)) {}
    /// Throws DecodeError when the reply is not a well-formed proof.
    Proof prove(const Challenge& ch) override;
    /// Missing or undecodable blocks come back as zero so authentication
    /// rejects them.
    std::vector<BlockWithTag> fetch(std::span<const std::uint64_t> indices) override;
    /// Raw proof bytes of the last prove() call.
    const Bytes& last_proof_bytes() const { return last_; }

private:
    Session& session_;
    std::string file_id_;
    GroupPtr group_;
    Bytes last_;
};

/// Dynamic server behind the wire. Malformed replies count as missing data.
class RemoteDynStore : public DynStore {
public:
    RemoteDynStore(Session& session, std::string file_id) : session_(session), file_id_(std::move(file_id)) {}
    std::vector<std::optional<DynSymbol>> fetch(DynRegion region, std::size_t level,
                                                std::span<const std::uint64_t> positions) override;
    std::vector<Bytes> fetch_all(DynRegion region, std::size_t level) override;
    DynSymbol write_u(std::uint64_t i, const Bytes& leaf) override;
    void put_level(std::size_t level, const std::vector<Bytes>& symbols) override;
    void put_c(const std::vector<Bytes>& symbols) override;

private:
    Session& session_;
    std::string file_id_;
};

/// Sends a set-up file; returns the id the server stored it under.
std::string client_upload(const Address& address, const TaggedFile& store);
/// Sends an initialized dynamic state; returns its id.
std::string client_upload_dynamic(const Address& address, const DynClient& client, DynServerState& state, Rng& rng);

/// gen_challenge, send, verify. Transport problems throw; only the server's
/// answer decides the result. A malformed proof is a failed verification.
VerifyResult client_audit(const Address& address, const FileManifest& manifest, const VerifierKey& key,
                          const GroupPtr& group, std::uint64_t l, Rng& rng);
bool client_sentinel_audit(const Address& address, SentinelLedger& ledger, const SentinelKeys& keys,
                           const FieldPtr& field, std::uint64_t q);
ExtractionResult client_extract(const Address& address, const FileManifest& manifest, const ClientKeys& keys,
                                const GroupPtr& group, const ExtractionPolicy& policy, Rng& rng);

DynBlock client_read(const Address& address, const std::string& file_id, DynClient& client, std::uint64_t i);
void client_write(const Address& address, const std::string& file_id, DynClient& client, std::uint64_t i,
                  const DynBlock& value);
bool client_dyn_audit(const Address& address, const std::string& file_id, const DynClient& client,
                      std::size_t samples, Rng& rng);
DynExtraction client_dyn_extract(const Address& address, const std::string& file_id, const DynClient& client);

}  // namespace por
