#include "por/error.hpp"
#include "por/service.hpp"

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <thread>

using namespace por;
namespace fs = std::filesystem;

namespace {

/// Fresh store directory removed on scope exit.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("por-svc-" + name)) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Running {
    std::unique_ptr<StorageServer> server;
    Address address;
    explicit Running(const fs::path& dir) : server(std::make_unique<StorageServer>(dir)) {
        server->bind({"127.0.0.1", 0});
        address = {"127.0.0.1", server->port()};
        server->start();
    }
};

Bytes random_bytes(Rng& rng, std::size_t n) {
    Bytes b(n);
    rng.fill(b);
    return b;
}

struct Uploaded {
    GroupPtr group;
    ClientKeys keys;
    TaggedFile store;
    Bytes file;
};

Uploaded setup_file(Scheme s, Rng& rng, std::size_t bytes = 4000, CodeParams code = {16, 8}) {
    Uploaded u;
    u.group = BilinearGroup::transparent(PrimeField::default_field());
    u.keys = generate_keys(s, u.group, rng);
    u.file = random_bytes(rng, bytes);
    u.store = por_setup(u.file, u.keys, u.group, code);
    return u;
}

}  // namespace

TEST_CASE("address parsing and store directory override") {
    auto a = Address::parse("localhost:7000");
    CHECK(a.host == "localhost");
    CHECK(a.port == 7000);
    CHECK(Address::parse("[::1]:80").port == 80);
    CHECK_THROWS_AS(Address::parse("nocolon"), UsageError);
    CHECK_THROWS_AS(Address::parse("h:99999"), UsageError);
    CHECK_THROWS_AS(Address::parse("h:12x"), UsageError);
    unsetenv("POR_STORE_DIR");
    CHECK(store_directory("/a") == "/a");
    setenv("POR_STORE_DIR", "/b", 1);
    CHECK(store_directory("/a") == "/b");
    unsetenv("POR_STORE_DIR");
}

TEST_CASE("upload, audit, unknown file, unknown type") {
    TempDir dir("basic");
    Running srv(dir.path);
    Rng rng(1);
    for (auto s : {Scheme::jk_mac, Scheme::jk_bls, Scheme::sw_private, Scheme::sw_public}) {
        auto u = setup_file(s, rng);
        CHECK(client_upload(srv.address, u.store) == u.store.file_id);
        CHECK(client_upload(srv.address, u.store) == u.store.file_id);
        CHECK(client_audit(srv.address, u.store.manifest(), verifier_key(u.keys), u.group, 20, rng).ok);
    }
    auto u = setup_file(Scheme::sw_private, rng);
    auto manifest = u.store.manifest();
    manifest.file_id = "nope";
    try {
        client_audit(srv.address, manifest, verifier_key(u.keys), u.group, 5, rng);
        FAIL("expected an error reply");
    } catch (const RemoteError& e) {
        CHECK(std::string(e.what()) == "unknown file");
    }
    Connection conn(srv.address);
    auto reply = conn.exchange({static_cast<wire::MsgType>(42), {1, 2}});
    REQUIRE(reply.type == wire::MsgType::error);
    CHECK(wire::decode_error(reply.payload).code == wire::ErrorCode::unknown_type);
    auto bad = conn.exchange({wire::MsgType::read, {0xff}});
    CHECK(bad.type == wire::MsgType::error);
    CHECK(wire::decode_error(bad.payload).code == wire::ErrorCode::malformed);
    auto again = conn.exchange({wire::MsgType::ok, {}});
    CHECK(again.type == wire::MsgType::error);
    CHECK(srv.server->catalog().size() == 4);
}

TEST_CASE("oversized frame is refused") {
    TempDir dir("oversize");
    StorageServer server(dir.path, ServerOptions{1024});
    server.bind({"127.0.0.1", 0});
    server.start();
    Connection conn({"127.0.0.1", server.port()});
    auto reply = conn.exchange({wire::MsgType::store, Bytes(2000)});
    CHECK(reply.type == wire::MsgType::error);
    CHECK_THROWS_AS(conn.exchange({wire::MsgType::store, {}}), TransportError);
}

TEST_CASE("proofs are byte-identical in-process and over the wire; restart keeps files") {
    TempDir dir("transparent");
    Rng rng(2);
    auto u = setup_file(Scheme::sw_public, rng);
    std::vector<CatalogEntry> before;
    {
        Running srv(dir.path);
        client_upload(srv.address, u.store);
        before = srv.server->catalog();
        Session s(srv.address);
        RemoteProver remote(s, u.store.file_id, u.group);
        for (int k = 0; k < 10; ++k) {
            auto ch = gen_challenge(u.group->scalars(), u.store.file_id, u.store.size(), 10, rng);
            const auto local = encode_proof(por_prove(u.store, ch));
            auto p = remote.prove(ch);
            CHECK(remote.last_proof_bytes() == local);
            CHECK(por_verify(verifier_key(u.keys), u.group, ch, p).ok);
        }
    }
    Running again(dir.path);
    auto after = again.server->catalog();
    REQUIRE(after.size() == before.size());
    CHECK(after[0].file_id == before[0].file_id);
    CHECK(after[0].created == before[0].created);
    CHECK(client_audit(again.address, u.store.manifest(), verifier_key(u.keys), u.group, 20, rng).ok);
}

TEST_CASE("truncated storage fails audits; extraction matches local") {
    TempDir dir("truncate");
    Running srv(dir.path);
    Rng rng(3);
    auto u = setup_file(Scheme::jk_mac, rng, 20000);
    client_upload(srv.address, u.store);
    auto r = client_extract(srv.address, u.store.manifest(), u.keys, u.group, {}, rng);
    REQUIRE(r.ok());
    CHECK(*r.data == u.file);

    const auto blocks = dir.path / "files" / u.store.file_id / "blocks.dat";
    fs::resize_file(blocks, fs::file_size(blocks) - (fs::file_size(blocks) / 10));
    int failed = 0;
    for (int k = 0; k < 20; ++k) {
        failed += client_audit(srv.address, u.store.manifest(), verifier_key(u.keys), u.group, 44, rng).ok ? 0 : 1;
    }
    CHECK(failed >= 16);
    // Truncation wipes whole trailing stripes, so they cannot be rebuilt.
    auto after = client_extract(srv.address, u.store.manifest(), u.keys, u.group, {}, rng);
    CHECK_FALSE(after.ok());
    CHECK_FALSE(after.deficient.empty());
}

TEST_CASE("sentinel audits over the wire") {
    TempDir dir("sentinel");
    Running srv(dir.path);
    Rng rng(4);
    const auto field = PrimeField::default_field();
    const auto group = BilinearGroup::transparent(field);
    const auto keys = std::get<SentinelKeys>(generate_keys(Scheme::sentinel, group, rng));
    auto s = sentinel_setup(random_bytes(rng, 3000), keys, field, {16, 8}, 30);
    client_upload(srv.address, s.store);
    for (int k = 0; k < 3; ++k) CHECK(client_sentinel_audit(srv.address, s.ledger, keys, field, 10));
    CHECK_THROWS_AS(client_sentinel_audit(srv.address, s.ledger, keys, field, 10), BudgetExhausted);
}

TEST_CASE("dynamic file over the wire survives a restart") {
    TempDir dir("dynamic");
    Rng rng(5);
    const auto field = PrimeField::default_field();
    auto file = random_bytes(rng, 31 * 32);
    auto [client, state] = DynClient::init(file, field, {32, 1, {}});
    std::string id;
    std::map<std::uint64_t, DynBlock> ref;
    {
        Running srv(dir.path);
        id = client_upload_dynamic(srv.address, client, state, rng);
        for (int k = 0; k < 40; ++k) {
            const auto i = 1 + rng.uniform(32);
            ref[i] = DynBlock{FieldElement::random(field, rng)};
            client_write(srv.address, id, client, i, ref[i]);
        }
        CHECK(client.state().c_rebuilds == 1);
        CHECK(client_dyn_audit(srv.address, id, client, 10, rng));
    }
    Running srv(dir.path);
    for (auto& [i, v] : ref) CHECK(client_read(srv.address, id, client, i) == v);
    CHECK(client_dyn_audit(srv.address, id, client, 10, rng));
    auto x = client_dyn_extract(srv.address, id, client);
    REQUIRE(x.ok());
    for (auto& [i, v] : ref) CHECK((*x.blocks)[i - 1] == v);
    CHECK_THROWS_AS(client_upload_dynamic(srv.address, client, state, rng), IntegrityError);
}

TEST_CASE("a running server picks up dynamic state changed on disk") {
    TempDir dir("dynreload");
    Rng rng(6);
    const auto field = PrimeField::default_field();
    auto file = random_bytes(rng, 31 * 16);
    auto [client, state] = DynClient::init(file, field, {16, 1, {}});
    Running srv(dir.path);
    const auto id = client_upload_dynamic(srv.address, client, state, rng);
    CHECK(client_read(srv.address, id, client, 1).size() == 1);
    const auto base = dir.path / "files" / id;
    auto disk = DynServerState::load(base);
    disk.raw(DynRegion::u)[0] = client.encode_block({FieldElement(field, 12345)});
    disk.save(base);
    CHECK_THROWS_AS(client_read(srv.address, id, client, 1), IntegrityError);
    CHECK_FALSE(client_dyn_audit(srv.address, id, client, 4, rng));
}

TEST_CASE("a dead server is a transport error, never a failed audit") {
    TempDir dir("dead");
    Rng rng(6);
    auto u = setup_file(Scheme::sw_private, rng);
    Address address;
    {
        Running srv(dir.path);
        address = srv.address;
        client_upload(address, u.store);
    }
    CHECK_THROWS_AS(client_audit(address, u.store.manifest(), verifier_key(u.keys), u.group, 10, rng),
                    TransportError);
    CHECK_THROWS_AS(client_extract(address, u.store.manifest(), u.keys, u.group, {}, rng), TransportError);
}

TEST_CASE("bind failure is reported") {
    TempDir dir("bind");
    StorageServer a(dir.path);
    a.bind({"127.0.0.1", 0});
    StorageServer b(dir.path);
    CHECK_THROWS_AS(b.bind({"127.0.0.1", a.port()}), TransportError);
}

TEST_CASE("concurrent audits") {
    TempDir dir("concurrent");
    Running srv(dir.path);
    Rng rng(7);
    auto u = setup_file(Scheme::sw_private, rng);
    client_upload(srv.address, u.store);
    std::atomic<int> ok{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] {
            Rng r(100 + t);
            for (int k = 0; k < 5; ++k) {
                ok += client_audit(srv.address, u.store.manifest(), verifier_key(u.keys), u.group, 10, r).ok ? 1 : 0;
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK(ok == 40);
}
