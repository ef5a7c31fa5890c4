#include "por/erasure.hpp"

#include "doctest.h"

#include <set>
#include <string>

using namespace por;

namespace {

// GF(4) = {0, 1, a, c = a^2} with a^2 + a + 1 = 0; bit encoding 0, 1, 2, 3.
char gf4_name(std::uint8_t e) { return "01ac"[e]; }

std::string gf4_word(const std::vector<std::uint8_t>& w) {
    std::string s;
    for (auto e : w) s.push_back(gf4_name(e));
    return s;
}

// Every k-subset of {0..n-1}, as bitmasks.
std::vector<unsigned> subsets(unsigned n, unsigned k) {
    std::vector<unsigned> out;
    for (unsigned m = 0; m < (1u << n); ++m) {
        if (static_cast<unsigned>(__builtin_popcount(m)) == k) out.push_back(m);
    }
    return out;
}

std::vector<FieldElement> random_message(const FieldPtr& f, std::size_t len, Rng& rng) {
    std::vector<FieldElement> m;
    for (std::size_t i = 0; i < len; ++i) m.push_back(FieldElement::random(f, rng));
    return m;
}

}  // namespace

TEST_CASE("code parameters enforce MDS") {
    CHECK_NOTHROW(CodeParams(3, 2, 2));
    CHECK_THROWS_AS(CodeParams(3, 2, 1), UsageError);
    CHECK_THROWS_AS(CodeParams(3, 3), UsageError);
    CHECK_THROWS_AS(CodeParams(3, 0), UsageError);
    CHECK(CodeParams(128, 64).rate() == 0.5);
    CHECK(CodeParams(128, 64).d() == 65);
}

TEST_CASE("GF(2^m) is a field") {
    for (unsigned m = 1; m <= 8; ++m) {
        Gf2m gf(m);
        for (unsigned a = 1; a < gf.order(); ++a) {
            auto x = static_cast<std::uint8_t>(a);
            REQUIRE(gf.mul(x, gf.inv(x)) == 1);
            for (unsigned b = 0; b < gf.order(); b += 3) {
                auto y = static_cast<std::uint8_t>(b);
                REQUIRE(gf.mul(x, y) == gf.mul(y, x));
            }
        }
    }
    Gf2m gf4(2);
    // a^2 + a + 1 = 0
    CHECK(gf4.add(gf4.add(gf4.mul(2, 2), 2), 1) == 0);
    CHECK(gf4.alpha_pow(2) == 3);
}

TEST_CASE("GF(4) (3,2,2) Reed-Solomon matches the published codeword table") {
    const std::set<std::string> published = {"000", "01a", "0ac", "0c1", "1a0", "ac0", "c10", "a01",
                                              "c0a", "10c", "1ca", "a1c", "ca1", "111", "aaa", "ccc"};
    ReedSolomon<Gf2m> code(Gf2m(2), CodeParams(3, 2, 2));
    std::set<std::string> generated;
    std::vector<std::vector<std::uint8_t>> words;
    for (std::uint8_t a = 0; a < 4; ++a) {
        for (std::uint8_t b = 0; b < 4; ++b) {
            std::vector<std::uint8_t> msg = {a, b};
            auto cw = code.encode(msg);
            generated.insert(gf4_word(cw.symbols));
            words.push_back(cw.symbols);
        }
    }
    CHECK(generated.size() == 16);
    CHECK(generated == published);

    std::size_t min_distance = 3;
    for (std::size_t i = 0; i < words.size(); ++i) {
        for (std::size_t j = i + 1; j < words.size(); ++j) {
            std::size_t d = 0;
            for (std::size_t k = 0; k < 3; ++k) d += words[i][k] != words[j][k];
            min_distance = std::min(min_distance, d);
        }
    }
    CHECK(min_distance == 2);

    // 1*c decodes to 10c.
    Codeword<std::uint8_t> erased({1, 0, 3});
    erased.erase(1);
    auto msg = code.decode(erased);
    CHECK(gf4_word(code.encode(msg).symbols) == "10c");
}

TEST_CASE("zero message encodes to the zero codeword") {
    auto f = PrimeField::create(101);
    ReedSolomon<PrimeCodeField> code(PrimeCodeField(f), CodeParams(8, 4));
    std::vector<FieldElement> zero(4, FieldElement::zero(f));
    for (const auto& s : code.encode(zero).symbols) CHECK(s.is_zero());
}

TEST_CASE("encode is systematic and decode without erasures returns the prefix") {
    auto f = PrimeField::create(101);
    Rng rng(1);
    ReedSolomon<PrimeCodeField> code(PrimeCodeField(f), CodeParams(8, 4));
    auto m = random_message(f, 4, rng);
    auto cw = code.encode(m);
    CHECK(std::equal(m.begin(), m.end(), cw.symbols.begin()));
    CHECK(code.decode(cw) == m);
}

TEST_CASE("Z_101 f=2 n=4 survives every 2-erasure pattern") {
    auto f = PrimeField::create(101);
    Rng rng(2);
    ReedSolomon<PrimeCodeField> code(PrimeCodeField(f), CodeParams(4, 2));
    for (int trial = 0; trial < 20; ++trial) {
        auto m = random_message(f, 2, rng);
        auto cw = code.encode(m);
        for (auto mask : subsets(4, 2)) {
            auto damaged = cw;
            for (unsigned i = 0; i < 4; ++i) {
                if (mask & (1u << i)) damaged.erase(i);
            }
            REQUIRE(code.decode(damaged) == m);
        }
    }
}

TEST_CASE("Z_101 f=4 n=8 survives all 70 patterns of 4 erasures") {
    auto f = PrimeField::create(101);
    Rng rng(3);
    ReedSolomon<PrimeCodeField> code(PrimeCodeField(f), CodeParams(8, 4));
    auto m = random_message(f, 4, rng);
    auto cw = code.encode(m);
    auto patterns = subsets(8, 4);
    CHECK(patterns.size() == 70);
    for (auto mask : patterns) {
        auto damaged = cw;
        for (unsigned i = 0; i < 8; ++i) {
            if (mask & (1u << i)) damaged.erase(i);
        }
        REQUIRE(code.decode(damaged) == m);
    }
}

TEST_CASE("MDS recovery for every pattern of at most n-f erasures") {
    auto f = PrimeField::create(101);
    Rng rng(4);
    for (std::size_t n = 2; n <= 9; ++n) {
        for (std::size_t k = 1; k < n; ++k) {
            ReedSolomon<PrimeCodeField> code(PrimeCodeField(f), CodeParams(n, k));
            auto m = random_message(f, k, rng);
            auto cw = code.encode(m);
            for (unsigned mask = 0; mask < (1u << n); ++mask) {
                if (static_cast<std::size_t>(__builtin_popcount(mask)) > n - k) continue;
                auto damaged = cw;
                for (unsigned i = 0; i < n; ++i) {
                    if (mask & (1u << i)) damaged.erase(i);
                }
                REQUIRE(code.decode(damaged) == m);
            }
        }
    }
}

TEST_CASE("too many erasures report the deficit") {
    auto f = PrimeField::create(101);
    ReedSolomon<PrimeCodeField> code(PrimeCodeField(f), CodeParams(8, 4));
    std::vector<FieldElement> m(4, FieldElement::one(f));
    auto cw = code.encode(m);
    for (unsigned i = 0; i < 6; ++i) cw.erase(i);
    try {
        code.decode(cw);
        FAIL("expected UnrecoverableError");
    } catch (const UnrecoverableError& e) {
        CHECK(e.deficit() == 2);
    }
    CHECK_THROWS_AS(code.encode(std::vector<FieldElement>(3, FieldElement::one(f))), UsageError);
}

TEST_CASE("code length is bounded by the field") {
    CHECK_THROWS_AS(ReedSolomon<PrimeCodeField>(PrimeCodeField(PrimeField::create(7)), CodeParams(7, 3)),
                    UsageError);
    CHECK_THROWS_AS(ReedSolomon<Gf2m>(Gf2m(2), CodeParams(5, 2)), UsageError);
}

TEST_CASE("encoding is linear") {
    auto f = PrimeField::default_field();
    Rng rng(5);
    ReedSolomon<PrimeCodeField> code(PrimeCodeField(f), CodeParams(16, 8));
    for (int trial = 0; trial < 50; ++trial) {
        auto a = FieldElement::random(f, rng);
        auto m1 = random_message(f, 8, rng);
        auto m2 = random_message(f, 8, rng);
        std::vector<FieldElement> mix;
        for (std::size_t i = 0; i < 8; ++i) mix.push_back(a * m1[i] + m2[i]);
        auto c1 = code.encode(m1), c2 = code.encode(m2), cm = code.encode(mix);
        for (std::size_t i = 0; i < 16; ++i) REQUIRE(cm.symbols[i] == a * c1.symbols[i] + c2.symbols[i]);
    }
}

TEST_CASE("consistency check flags a corrupted symbol") {
    auto f = PrimeField::create(101);
    Rng rng(9);
    ReedSolomon<PrimeCodeField> code(PrimeCodeField(f), CodeParams(8, 4));
    auto cw = code.encode(random_message(f, 4, rng));
    CHECK(code.consistent(cw));
    cw.symbols[6] = cw.symbols[6] + FieldElement::one(f);
    CHECK_FALSE(code.consistent(cw));
}

TEST_CASE("striping") {
    std::vector<int> eight = {1, 2, 3, 4, 5, 6, 7, 8};
    auto s8 = stripe_blocks<int>(eight, 4, 0);
    CHECK(s8.stripes.size() == 2);
    CHECK(s8.stripes[1] == std::vector<int>{5, 6, 7, 8});

    std::vector<int> five = {1, 2, 3, 4, 5};
    auto s5 = stripe_blocks<int>(five, 4, 0);
    CHECK(s5.stripes.size() == 2);
    CHECK(s5.stripes[1] == std::vector<int>{5, 0, 0, 0});
    CHECK(s5.length == 5);

    auto empty = stripe_blocks<int>(std::vector<int>{}, 4, 0);
    CHECK(empty.stripes.empty());
    CHECK(unstripe(empty).empty());
    CHECK_THROWS_AS(stripe_blocks<int>(five, 0, 0), UsageError);

    Rng rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<int> b(rng.uniform(50));
        for (auto& x : b) x = static_cast<int>(rng.uniform(1000));
        auto width = 1 + rng.uniform(9);
        REQUIRE(unstripe(stripe_blocks<int>(b, width, 0)) == b);
    }
}

TEST_CASE("byte packing round-trips") {
    auto f = PrimeField::default_field();
    Rng rng(7);
    for (std::size_t len : {0u, 1u, 30u, 31u, 32u, 1000u}) {
        Bytes data(len);
        rng.fill(data);
        auto blocks = bytes_to_blocks(f, data);
        CHECK(blocks.size() == (len + 30) / 31);
        CHECK(blocks_to_bytes(blocks, len) == data);
    }
}

TEST_CASE("file codec and container") {
    auto f = PrimeField::default_field();
    Rng rng(8);
    Bytes data(5000);
    rng.fill(data);
    FileCodec codec(f, CodeParams(16, 8));
    auto c = codec.encode(data);
    // 5000 bytes -> 162 blocks -> 21 stripes of 8 -> 336 symbols.
    CHECK(c.header.stripes == 21);
    CHECK(c.elements.size() == 21 * 16);
    CHECK(c.header.original_length == 5000);

    auto bytes = c.serialize();
    CHECK(std::equal(bytes.begin(), bytes.begin() + 4, "PORK"));
    auto back = Container::parse(bytes);
    CHECK(back.elements == c.elements);
    CHECK(back.header.prime == f->modulus());
    CHECK_THROWS_AS(Container::parse(ByteView(bytes).first(bytes.size() - 1)), DecodeError);

    std::vector<Codeword<FieldElement>> stripes;
    for (std::size_t s = 0; s < c.header.stripes; ++s) {
        Codeword<FieldElement> cw({c.elements.begin() + static_cast<std::ptrdiff_t>(s * 16),
                                   c.elements.begin() + static_cast<std::ptrdiff_t>((s + 1) * 16)});
        for (std::size_t k = 0; k < 8; ++k) cw.erase(rng.uniform(16));
        stripes.push_back(std::move(cw));
    }
    CHECK(codec.decode(c.header, stripes) == data);

    stripes[4].present.assign(16, true);
    for (std::size_t k = 0; k < 9; ++k) stripes[4].erase(k);
    try {
        codec.decode(c.header, stripes);
        FAIL("expected failure");
    } catch (const UnrecoverableError& e) {
        CHECK(std::string(e.what()).find("stripe 4") != std::string::npos);
        CHECK(e.deficit() == 1);
    }
}

TEST_CASE("container header") {
    ContainerHeader h;
    h.field_id = FieldId::binary;
    h.m = 2;
    h.f = 2;
    h.n = 3;
    h.stripes = 4;
    h.original_length = 7;
    ByteWriter w;
    h.write(w);
    // magic 4 + version 1 + id 1 + m 1 + f 4 + n 4 + stripes 8 + len 8 + width 2 + extra 8
    CHECK(w.size() == 41);
    ByteReader r(w.bytes());
    auto back = ContainerHeader::read(r);
    CHECK(back.m == 2);
    CHECK(back.stripes == 4);
    CHECK(back.original_length == 7);
    Bytes bad = w.bytes();
    bad[0] = 'X';
    ByteReader rb(bad);
    CHECK_THROWS_AS(ContainerHeader::read(rb), DecodeError);
}
