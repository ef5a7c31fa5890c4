#include "por/client_files.hpp"
#include "por/error.hpp"

#include "doctest.h"

#include <sys/stat.h>

#include <cstdlib>

using namespace por;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("por-files-" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Bytes sample_file(std::size_t size, std::uint64_t seed) {
    Rng rng(seed);
    Bytes b(size);
    rng.fill(b);
    return b;
}

}  // namespace

TEST_CASE("field sizes") {
    CHECK(field_for_bits(256) == PrimeField::default_field());
    const auto f = field_for_bits(64);
    CHECK(mpz_sizeinbase(f->modulus().get_mpz_t(), 2) == 64);
    CHECK(mpz_probab_prime_p(f->modulus().get_mpz_t(), 30) > 0);
    CHECK_THROWS_AS(field_for_bits(15), UsageError);
    CHECK_THROWS_AS(field_for_bits(4097), UsageError);
}

TEST_CASE("key files round-trip and prove the same file") {
    TempDir dir("keys");
    const auto data = sample_file(3000, 1);
    for (auto s : {Scheme::jk_mac, Scheme::jk_bls, Scheme::sw_private, Scheme::sw_public}) {
        CAPTURE(scheme_name(s));
        Rng rng(7);
        KeyMaterial k;
        k.group = BilinearGroup::transparent(field_for_bits(128));
        k.keys = generate_keys(s, k.group, rng);
        const auto path = dir.path / (scheme_name(s) + ".json");
        save_key_file(path, k);

        struct stat st {};
        REQUIRE(::stat(path.c_str(), &st) == 0);
        CHECK((st.st_mode & 0777) == 0600);

        const auto back = load_key_file(path);
        CHECK(keys_to_json(back) == keys_to_json(k));
        // Keys from the file verify proofs over tags made with the originals.
        const auto store = por_setup(data, k.keys, k.group, {16, 8});
        Rng crng(9);
        const auto ch = gen_challenge(back.group->scalars(), store.file_id, store.size(), 20, crng, !is_jk(s));
        CHECK(por_verify(verifier_key(back.keys), back.group, ch, por_prove(store, ch)).ok);
    }
}

TEST_CASE("sentinel keys round-trip") {
    TempDir dir("sentinel");
    Rng rng(3);
    KeyMaterial k;
    k.group = BilinearGroup::transparent(PrimeField::default_field());
    k.keys = generate_keys(Scheme::sentinel, k.group, rng);
    save_key_file(dir.path / "k", k);
    CHECK(keys_to_json(load_key_file(dir.path / "k")) == keys_to_json(k));
}

TEST_CASE("key file environment override") {
    ::unsetenv("POR_KEY_FILE");
    CHECK(key_file_path("a.key") == fs::path("a.key"));
    ::setenv("POR_KEY_FILE", "/tmp/other.key", 1);
    CHECK(key_file_path("a.key") == fs::path("/tmp/other.key"));
    ::unsetenv("POR_KEY_FILE");
}

TEST_CASE("malformed key files") {
    CHECK_THROWS_AS(keys_from_json("not json"), DecodeError);
    CHECK_THROWS_AS(keys_from_json(R"({"scheme":"sw-private","prime":"101"})"), DecodeError);
    CHECK_THROWS_AS(load_key_file("/nonexistent/key"), UsageError);
}

TEST_CASE("tagged and sentinel records round-trip") {
    TempDir dir("records");
    const auto field = PrimeField::default_field();
    const auto group = BilinearGroup::transparent(field);
    Rng rng(11);
    const auto data = sample_file(5000, 2);

    const auto keys = generate_keys(Scheme::sw_public, group, rng);
    const auto store = por_setup(data, keys, group, {16, 8});
    ClientRecord r{store.file_id, store.manifest(), std::nullopt, std::nullopt, field};
    save_record(dir.path / "t.json", r);
    const auto back = load_record(dir.path / "t.json");
    CHECK(back.file_id == r.file_id);
    REQUIRE(back.manifest);
    CHECK(back.manifest->scheme == Scheme::sw_public);
    CHECK(back.manifest->block_count() == store.size());
    CHECK(record_to_json(back) == record_to_json(r));

    const auto sk = std::get<SentinelKeys>(generate_keys(Scheme::sentinel, group, rng));
    auto setup = sentinel_setup(data, sk, field, {16, 8}, 40);
    ClientRecord s{setup.store.file_id, setup.store.manifest(), setup.ledger, std::nullopt, field};
    s.ledger->next_unspent = 20;
    const auto sback = record_from_json(record_to_json(s));
    REQUIRE(sback.ledger);
    CHECK(sback.ledger->next_unspent == 20);
    CHECK(sback.ledger->sentinels == 40);
    CHECK(sback.ledger->file_blocks == setup.ledger.file_blocks);
}

TEST_CASE("dynamic records round-trip and keep working") {
    const auto field = PrimeField::default_field();
    const auto data = sample_file(1900, 4);
    auto [client, server] = DynClient::init(data, field, {64, 1, {}});
    Rng rng(5);
    for (std::uint64_t i = 1; i <= 9; ++i) client.write(server, i, {FieldElement(field, i)});

    ClientRecord r;
    r.file_id = "dtest";
    r.field = field;
    r.dynamic = client.state();
    const auto back = record_from_json(record_to_json(r));
    REQUIRE(back.dynamic);
    DynClient again(back.field, *back.dynamic);
    CHECK(again.occupancy() == client.occupancy());
    CHECK(again.state().w == 9);
    CHECK(again.audit(server, 16, rng));
    CHECK(again.read(server, 4) == DynBlock{FieldElement(field, 4)});
    again.write(server, 10, {FieldElement(field, 100)});
    CHECK(again.read(server, 10) == DynBlock{FieldElement(field, 100)});
}

TEST_CASE("malformed records") {
    CHECK_THROWS_AS(record_from_json("{}"), DecodeError);
    CHECK_THROWS_AS(record_from_json(R"({"file_id":"x","prime":"101","kind":"other"})"), DecodeError);
}
