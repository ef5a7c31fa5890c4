#include "por/error.hpp"
#include "por/por_static.hpp"
#include "por/wire.hpp"

#include "doctest.h"

using namespace por;
using namespace por::wire;

namespace {

Bytes random_bytes(Rng& rng, std::size_t max_len) {
    Bytes b(rng.uniform(max_len + 1));
    rng.fill(b);
    return b;
}

std::string random_id(Rng& rng) {
    std::string s(rng.uniform(40), 'a');
    for (auto& c : s) c = static_cast<char>('0' + rng.uniform(75));
    return s;
}

std::vector<Bytes> random_list(Rng& rng) {
    std::vector<Bytes> v(rng.uniform(6));
    for (auto& b : v) b = random_bytes(rng, 70);
    return v;
}

std::vector<std::uint64_t> random_u64s(Rng& rng) {
    std::vector<std::uint64_t> v(rng.uniform(10));
    for (auto& x : v) x = rng.next_u64();
    return v;
}

MerklePath random_path(Rng& rng) {
    MerklePath p;
    p.index = rng.next_u64();
    p.steps.resize(rng.uniform(8));
    for (auto& s : p.steps) {
        s.position = static_cast<MerklePath::Sibling>(rng.uniform(3));
        rng.fill(s.sibling);
    }
    return p;
}

template <class T, class Dec>
void round_trip(const T& m, Dec decode) {
    const auto bytes = encode(m);
    const auto back = decode(bytes);
    CHECK(back == m);
    CHECK(encode(back) == bytes);
}

}  // namespace

TEST_CASE("frames") {
    Frame f{MsgType::challenge, {1, 2, 3}};
    const auto bytes = encode_frame(f);
    CHECK(bytes == Bytes{0, 0, 0, 4, 2, 1, 2, 3});
    CHECK(decode_frame(bytes) == f);
    CHECK_THROWS_AS(decode_frame(Bytes{0, 0, 0, 4, 9, 1, 2, 3}), DecodeError);
    CHECK_THROWS_AS(decode_frame(Bytes{0, 0, 0, 0}), DecodeError);
    CHECK_THROWS_AS(decode_frame(Bytes{0, 0, 0, 5, 2, 1}), DecodeError);
    CHECK_THROWS_AS(decode_frame(Bytes{0, 0, 0, 1, 8, 0}), DecodeError);
    CHECK_THROWS_AS(decode_frame(Bytes{0, 0, 0, 9, 8}, 8), DecodeError);
    for (std::uint8_t t = 0; t < 12; ++t) CHECK(is_known_type(t) == (t >= 1 && t <= 8));
}

TEST_CASE("every message type round-trips canonically") {
    Rng rng(1);
    const auto field = PrimeField::default_field();
    const auto group = BilinearGroup::transparent(field);
    for (int k = 0; k < 10000; ++k) {
        switch (k % 12) {
            case 0: round_trip(StoreRequest{rng.uniform(2) ? StoreKind::tagged : StoreKind::dynamic,
                                            random_bytes(rng, 200)},
                               decode_store);
                break;
            case 1: {
                DynUpload u{random_bytes(rng, 16), random_bytes(rng, 32), rng.next_u64(),
                            static_cast<std::uint32_t>(rng.next_u64()), static_cast<std::uint32_t>(rng.next_u64()),
                            static_cast<std::uint32_t>(rng.next_u64()), random_list(rng), random_list(rng)};
                round_trip(u, decode_dyn_upload);
                break;
            }
            case 2: {
                ReadRequest r;
                r.file_id = random_id(rng);
                if (rng.uniform(2)) {
                    r.kind = ReadKind::blocks;
                    r.indices = random_u64s(rng);
                } else {
                    r.kind = ReadKind::leaves;
                    r.region = static_cast<DynRegion>(rng.uniform(3));
                    r.level = static_cast<std::uint32_t>(rng.uniform(40));
                }
                round_trip(r, decode_read);
                break;
            }
            case 3: {
                BlocksReply b;
                b.items.resize(rng.uniform(5));
                for (auto& it : b.items) it = {random_bytes(rng, 33), random_bytes(rng, 33)};
                round_trip(b, decode_blocks);
                break;
            }
            case 4: round_trip(LeavesReply{random_list(rng)}, decode_leaves); break;
            case 5:
                round_trip(AuditRequest{random_id(rng), static_cast<DynRegion>(rng.uniform(3)),
                                        static_cast<std::uint32_t>(rng.next_u64()), random_u64s(rng)},
                           decode_audit);
                break;
            case 6: {
                SymbolsReply s;
                s.symbols.resize(rng.uniform(5));
                for (auto& x : s.symbols) {
                    if (rng.uniform(3)) x = DynSymbol{random_bytes(rng, 40), random_path(rng)};
                }
                round_trip(s, decode_symbols);
                break;
            }
            case 7: {
                WriteRequest w;
                w.file_id = random_id(rng);
                w.kind = static_cast<WriteKind>(1 + rng.uniform(3));
                if (w.kind == WriteKind::u) {
                    w.index = rng.next_u64();
                    w.leaves = {random_bytes(rng, 40)};
                } else {
                    if (w.kind == WriteKind::level) w.level = static_cast<std::uint32_t>(rng.uniform(30));
                    w.leaves = random_list(rng);
                }
                round_trip(w, decode_write);
                break;
            }
            case 8:
                round_trip(ErrorReply{static_cast<ErrorCode>(1 + rng.uniform(6)), random_id(rng)}, decode_error);
                break;
            case 9: round_trip(StoredReply{random_id(rng)}, decode_stored); break;
            case 10: {
                auto ch = gen_challenge(field, random_id(rng), 1000, 1 + rng.uniform(20), rng, rng.uniform(2) == 1);
                ByteWriter w;
                ch.write(w);
                const auto bytes = std::move(w).take();
                ByteReader r(bytes);
                CHECK(Challenge::read(field, r) == ch);
                CHECK(r.empty());
                CHECK(peek_file_id(bytes) == ch.file_id);
                break;
            }
            case 11: {
                Proof p;
                switch (rng.uniform(3)) {
                    case 0: {
                        JkProof j;
                        const auto count = rng.uniform(4);
                        for (std::uint64_t i = 0; i < count; ++i) {
                            j.items.push_back({FieldElement::random(field, rng), random_bytes(rng, 32)});
                        }
                        p = j;
                        break;
                    }
                    case 1: p = SwPrivateProof{FieldElement::random(field, rng), FieldElement::random(field, rng)}; break;
                    default:
                        p = SwPublicProof{group->power_of_g(FieldElement::random(field, rng)),
                                          FieldElement::random(field, rng)};
                }
                const auto bytes = encode_proof(p);
                ByteReader r(bytes);
                CHECK(read_proof(group, r) == p);
                CHECK(r.empty());
                break;
            }
        }
    }
}

TEST_CASE("garbage never decodes silently into a different message") {
    Rng rng(2);
    for (int k = 0; k < 3000; ++k) {
        const auto junk = random_bytes(rng, 64);
        auto try_all = [&](auto decode) {
            try {
                auto m = decode(junk);
                CHECK(encode(m) == junk);
            } catch (const DecodeError&) {
            }
        };
        try_all(decode_read);
        try_all(decode_blocks);
        try_all(decode_leaves);
        try_all(decode_audit);
        try_all(decode_symbols);
        try_all(decode_error);
        try_all(decode_stored);
        try_all(decode_dyn_upload);
    }
}
