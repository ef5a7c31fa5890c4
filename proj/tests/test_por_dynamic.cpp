#include "por/error.hpp"
#include "por/por_dynamic.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

using namespace por;

namespace {

Bytes random_bytes(Rng& rng, std::size_t n) {
    Bytes b(n);
    rng.fill(b);
    return b;
}

DynBlock random_block(const FieldPtr& f, std::size_t beta, Rng& rng) {
    DynBlock b;
    for (std::size_t k = 0; k < beta; ++k) b.push_back(FieldElement::random(f, rng));
    return b;
}

/// Fresh client and server over random contents filling every block.
std::pair<DynClient, DynServerState> fresh(std::uint64_t n, std::size_t beta, Rng& rng, Bytes* file = nullptr) {
    auto field = PrimeField::default_field();
    const auto bytes = random_bytes(rng, n * beta * field->payload_bytes());
    if (file) *file = bytes;
    return DynClient::init(bytes, field, {n, beta, {}});
}

/// Leaves every symbol in place but blanks out `count` of them starting at `first`.
void erase(std::vector<Bytes>& leaves, std::size_t first, std::size_t count) {
    for (std::size_t k = first; k < first + count; ++k) leaves[k].clear();
}

}  // namespace

TEST_CASE("level count and default C code") {
    DynParams p{256, 1, {}};
    CHECK(p.levels() == 10);
    CHECK(p.c_code_or_default().n == 128);
    CHECK(p.c_code_or_default().f == 64);
    CHECK(p.c_stripes() == 4);
    DynParams small{5, 2, {}};
    CHECK(small.levels() == 5);
    CHECK(small.c_code_or_default().f == 10);
    CHECK(small.c_stripes() == 1);
}

TEST_CASE("init: audit passes, C decodes to U, roots") {
    Rng rng(1);
    Bytes file;
    auto [client, server] = fresh(64, 2, rng, &file);
    CHECK(client.root_count() == 2 + client.state().params.levels());
    CHECK(client.occupancy() == 0);
    CHECK(client.audit(server, 20, rng));
    auto x = client.extract(server);
    REQUIRE(x.ok());
    CHECK(x.blocks->size() == 64);
    for (std::uint64_t i = 1; i <= 64; ++i) CHECK(client.read(server, i) == (*x.blocks)[i - 1]);
    CHECK(client.extract_bytes(server) == file);
}

TEST_CASE("init rejects bad input") {
    auto field = PrimeField::default_field();
    CHECK_THROWS_AS(DynClient::init(Bytes{}, field, {4, 1, {}}), UsageError);
    CHECK_THROWS_AS(DynClient::init(Bytes(1), field, {0, 1, {}}), UsageError);
    CHECK_THROWS_AS(DynClient::init(Bytes(1000), field, {4, 1, {}}), UsageError);
}

TEST_CASE("read after write and argument checks") {
    Rng rng(2);
    auto [client, server] = fresh(16, 1, rng);
    auto f = client.field();
    auto v = random_block(f, 1, rng);
    client.write(server, 7, v);
    CHECK(client.read(server, 7) == v);
    CHECK_THROWS_AS(client.read(server, 0), UsageError);
    CHECK_THROWS_AS(client.read(server, 17), UsageError);
    CHECK_THROWS_AS(client.write(server, 17, v), UsageError);
    CHECK_THROWS_AS(client.write(server, 1, DynBlock{}), UsageError);
    auto other = PrimeField::create(std::uint64_t{65537});
    CHECK_THROWS_AS(client.write(server, 1, DynBlock(1, FieldElement(other, std::uint64_t{3}))), UsageError);
    CHECK_THROWS_AS(client.audit(server, 0, rng), UsageError);
}

TEST_CASE("tampered U leaves are rejected at every position") {
    Rng rng(3);
    auto [client, server] = fresh(64, 1, rng);
    for (std::uint64_t p = 0; p < 64; ++p) {
        auto& leaf = server.raw(DynRegion::u)[p];
        const auto saved = leaf;
        leaf[leaf.size() - 1] ^= 1;
        CHECK_THROWS_AS(client.read(server, p + 1), IntegrityError);
        leaf = saved;
        CHECK_NOTHROW(client.read(server, p + 1));
    }
}

TEST_CASE("tampered old block during write is rejected") {
    Rng rng(4);
    auto [client, server] = fresh(8, 1, rng);
    server.raw(DynRegion::u)[2][0] ^= 1;
    CHECK_THROWS_AS(client.write(server, 3, random_block(client.field(), 1, rng)), IntegrityError);
}

TEST_CASE("six writes leave levels 1 and 2 full") {
    Rng rng(5);
    auto [client, server] = fresh(64, 1, rng);
    for (int k = 0; k < 6; ++k) client.write(server, 1 + rng.uniform(64), random_block(client.field(), 1, rng));
    CHECK(client.occupancy() == 0b110);
    CHECK(server.occupancy() == 0b110);
}

TEST_CASE("occupancy equals the write count in binary up to 2^12") {
    Rng rng(6);
    auto [client, server] = fresh(8192, 1, rng);
    bool all = true;
    for (std::uint64_t w = 1; w <= 4096; ++w) {
        client.write(server, 1 + rng.uniform(8192), random_block(client.field(), 1, rng));
        all = all && client.occupancy() == w && server.occupancy() == w;
    }
    CHECK(all);
    CHECK(client.state().c_rebuilds == 0);
    CHECK(client.audit(server, 10, rng));
}

TEST_CASE("random operations against a reference map") {
    Rng rng(7);
    const std::uint64_t n = 64;
    auto [client, server] = fresh(n, 1, rng);
    std::map<std::uint64_t, DynBlock> ref;
    for (std::uint64_t i = 1; i <= n; ++i) ref[i] = client.read(server, i);
    auto c_before = server.raw(DynRegion::c);
    std::uint64_t rebuilds = 0;
    bool reads_ok = true, occupancy_ok = true, c_ok = true;
    for (int op = 0; op < 2000; ++op) {
        const auto i = 1 + rng.uniform(n);
        if (rng.uniform(2) == 0) {
            reads_ok = reads_ok && client.read(server, i) == ref[i];
            continue;
        }
        auto v = random_block(client.field(), 1, rng);
        client.write(server, i, v);
        ref[i] = v;
        const auto w = client.state().writes;
        occupancy_ok = occupancy_ok && client.occupancy() == w % n && client.state().w == w % n;
        if (client.state().c_rebuilds != rebuilds) {
            rebuilds = client.state().c_rebuilds;
            c_ok = c_ok && w % n == 0 && rebuilds == w / n && server.occupancy() == 0;
            c_before = server.raw(DynRegion::c);
        } else {
            c_ok = c_ok && server.raw(DynRegion::c) == c_before;
        }
    }
    CHECK(reads_ok);
    CHECK(occupancy_ok);
    CHECK(c_ok);
    CHECK(rebuilds == client.state().writes / n);
    const double bound = 4.0 * static_cast<double>(client.state().writes) * (std::log2(double(n)) + 2);
    CHECK(static_cast<double>(client.state().reencoded_symbols) <= bound);
    CHECK(client.audit(server, 20, rng));
    auto x = client.extract(server);
    REQUIRE(x.ok());
    for (std::uint64_t i = 1; i <= n; ++i) CHECK((*x.blocks)[i - 1] == ref[i]);
}

TEST_CASE("extraction tolerates half of every codeword erased") {
    Rng rng(8);
    const std::uint64_t n = 256;
    auto [client, server] = fresh(n, 2, rng);
    std::map<std::uint64_t, DynBlock> ref;
    for (std::uint64_t i = 1; i <= n; ++i) ref[i] = client.read(server, i);
    for (int k = 0; k < 300 + 0b1011011; ++k) {
        const auto i = 1 + rng.uniform(n);
        ref[i] = random_block(client.field(), 2, rng);
        client.write(server, i, ref[i]);
    }
    REQUIRE(client.occupancy() != 0);
    for (std::size_t l = 0; l < client.state().params.levels(); ++l) {
        if (!server.level_full(l)) continue;
        const std::size_t k = std::size_t{1} << l;
        erase(server.raw(DynRegion::h, l), rng.uniform(k + 1), k);
    }
    const auto code = client.state().params.c_code_or_default();
    for (std::size_t s = 0; s < client.state().params.c_stripes(); ++s) erase(server.raw(DynRegion::c), s * code.n, code.f);
    auto x = client.extract(server);
    REQUIRE(x.ok());
    for (std::uint64_t i = 1; i <= n; ++i) CHECK((*x.blocks)[i - 1] == ref[i]);
}

TEST_CASE("one erasure too many is reported") {
    Rng rng(9);
    auto [client, server] = fresh(256, 1, rng);
    for (int k = 0; k < 3; ++k) client.write(server, 1 + rng.uniform(256), random_block(client.field(), 1, rng));
    REQUIRE(server.level_full(0));
    REQUIRE(server.level_full(1));
    erase(server.raw(DynRegion::h, 1), 0, 3);
    erase(server.raw(DynRegion::c), 128, 65);
    auto x = client.extract(server);
    CHECK_FALSE(x.ok());
    REQUIRE(x.deficient.size() == 2);
    CHECK(x.deficient[0].region == DynRegion::c);
    CHECK(x.deficient[0].stripe == 1);
    CHECK(x.deficient[0].valid == 63);
    CHECK(x.deficient[1].region == DynRegion::h);
    CHECK(x.deficient[1].level == 1);
    CHECK(x.deficient[1].valid == 1);
    CHECK(x.report().find("C stripe 1: 63 valid of 64 required") != std::string::npos);
    CHECK(x.report().find("H level 1") != std::string::npos);
    CHECK_FALSE(client.extract_bytes(server).has_value());
}

TEST_CASE("wiped level fails the audit") {
    Rng rng(10);
    auto [client, server] = fresh(64, 1, rng);
    for (int k = 0; k < 4; ++k) client.write(server, 1 + rng.uniform(64), random_block(client.field(), 1, rng));
    REQUIRE(server.level_full(2));
    CHECK(client.audit(server, 5, rng));
    for (auto& leaf : server.raw(DynRegion::h, 2)) leaf.clear();
    CHECK_FALSE(client.audit(server, 5, rng));
}

TEST_CASE("audit detects erased C at the expected rate") {
    Rng rng(11);
    auto [client, server] = fresh(256, 1, rng);
    auto& c = server.raw(DynRegion::c);
    std::vector<std::size_t> order(c.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.uniform(k)]);
    const std::size_t erased = c.size() / 5;
    for (std::size_t k = 0; k < erased; ++k) c[order[k]].clear();
    const int trials = 1000;
    int detected = 0;
    for (int t = 0; t < trials; ++t) detected += client.audit(server, 20, rng) ? 0 : 1;
    const double expect = 1 - std::pow(0.8, 20);
    const double se = std::sqrt(expect * (1 - expect) / trials);
    CHECK(std::abs(detected / double(trials) - expect) <= 3 * se);
}

TEST_CASE("server state survives save and load") {
    Rng rng(12);
    auto [client, server] = fresh(32, 1, rng);
    for (int k = 0; k < 11; ++k) client.write(server, 1 + rng.uniform(32), random_block(client.field(), 1, rng));
    const auto dir = std::filesystem::temp_directory_path() / "por-dyn-test";
    std::filesystem::remove_all(dir);
    server.save(dir);
    auto loaded = DynServerState::load(dir);
    CHECK(loaded.occupancy() == server.occupancy());
    CHECK(loaded.writes_since_rebuild() == server.writes_since_rebuild());
    CHECK(client.audit(loaded, 10, rng));
    for (std::uint64_t i = 1; i <= 32; ++i) CHECK(client.read(loaded, i) == client.read(server, i));
    client.write(loaded, 5, random_block(client.field(), 1, rng));
    CHECK(client.audit(loaded, 10, rng));
    std::filesystem::remove_all(dir);
}
