#include "por/algebra.hpp"
#include "por/error.hpp"

#include "doctest.h"

#include <array>
#include <cmath>
#include <cstdint>

using namespace por;

namespace {

// Extended Euclid on machine integers; independent of GMP's mpz_invert.
std::int64_t inverse_oracle(std::int64_t a, std::int64_t p) {
    std::int64_t t = 0, new_t = 1, r = p, new_r = a % p;
    while (new_r != 0) {
        auto q = r / new_r;
        std::tie(t, new_t) = std::make_pair(new_t, t - q * new_t);
        std::tie(r, new_r) = std::make_pair(new_r, r - q * new_r);
    }
    return t < 0 ? t + p : t;
}

FieldElement el(const FieldPtr& f, std::uint64_t v) { return {f, v}; }

}  // namespace

TEST_CASE("field arithmetic mod 101") {
    auto f = PrimeField::create(101);
    CHECK((el(f, 40) + el(f, 70)).to_u64() == 9);
    CHECK(el(f, 1).inverse().to_u64() == 1);
    CHECK(inverse_oracle(7, 101) == 29);
    CHECK(el(f, 7).inverse().to_u64() == 29);
    CHECK((el(f, 7) * el(f, 29)).to_u64() == 1);
    CHECK((el(f, 3) - el(f, 5)).to_u64() == 99);
    CHECK((-el(f, 0)).is_zero());
    CHECK(el(f, 2).pow(100).to_u64() == 1);

    for (std::int64_t a = 1; a < 101; ++a) {
        CHECK(el(f, static_cast<std::uint64_t>(a)).inverse().to_u64() ==
              static_cast<std::uint64_t>(inverse_oracle(a, 101)));
    }
}

TEST_CASE("field errors") {
    auto f = PrimeField::create(101);
    auto g = PrimeField::create(103);
    CHECK_THROWS_AS(FieldElement::zero(f).inverse(), AlgebraError);
    CHECK_THROWS_AS(el(f, 1) + el(g, 1), AlgebraError);
    CHECK_THROWS_AS(el(f, 1) * el(g, 1), AlgebraError);
    CHECK_THROWS_AS(PrimeField::create(100), UsageError);
    // Two independently created fields with the same modulus interoperate.
    auto f2 = PrimeField::create(101);
    CHECK((el(f, 50) + el(f2, 60)).to_u64() == 9);
}

TEST_CASE("default field is the 256-bit prime") {
    auto f = PrimeField::default_field();
    CHECK(f->bits() == 256);
    CHECK(f->byte_width() == 32);
    CHECK(f->payload_bytes() == 31);
}

TEST_CASE("randomized field laws") {
    Rng rng(7);
    for (auto f : {PrimeField::create(101), PrimeField::default_field()}) {
        for (int i = 0; i < 10000; ++i) {
            auto a = FieldElement::random(f, rng);
            auto b = FieldElement::random(f, rng);
            auto c = FieldElement::random(f, rng);
            REQUIRE((a + b) + c == a + (b + c));
            REQUIRE(a * (b + c) == a * b + a * c);
            REQUIRE(a + b == b + a);
            if (!a.is_zero()) REQUIRE(a * a.inverse() == FieldElement::one(f));
        }
    }
}

TEST_CASE("field element serialization") {
    auto f = PrimeField::create(101);
    auto e = el(f, 100);
    CHECK(e.to_bytes() == Bytes{100});
    CHECK(FieldElement::from_bytes(f, e.to_bytes()) == e);
    CHECK_THROWS_AS(FieldElement::from_bytes(f, Bytes{101}), DecodeError);
    CHECK_THROWS_AS(FieldElement::from_bytes(f, Bytes{0, 1}), DecodeError);

    auto big = PrimeField::default_field();
    Rng rng(3);
    auto x = FieldElement::random(big, rng);
    CHECK(x.to_bytes().size() == 32);
    CHECK(FieldElement::from_bytes(big, x.to_bytes()) == x);
}

TEST_CASE("transparent pairing") {
    auto f = PrimeField::create(101);
    auto G = BilinearGroup::transparent(f);
    auto g = G->generator();
    CHECK(G->pair(G->power_of_g(el(f, 0)), G->power_of_g(el(f, 55))).is_identity());
    CHECK(G->pair(G->power_of_g(el(f, 2)), G->power_of_g(el(f, 3))) == G->gt_generator().pow(el(f, 6)));
    CHECK_FALSE(G->pair(g, g).is_identity());

    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        auto a = rng.uniform(101);
        auto b = rng.uniform(101);
        auto e = G->pair(G->power_of_g(el(f, a)), G->power_of_g(el(f, b)));
        REQUIRE(e.exponent().to_u64() == (a * b) % 101);
        REQUIRE(e == G->pair(g, g).pow(el(f, a * b)));
    }
    for (int i = 0; i < 1000; ++i) {
        auto u1 = G->power_of_g(FieldElement::random(f, rng));
        auto u2 = G->power_of_g(FieldElement::random(f, rng));
        auto v = G->power_of_g(FieldElement::random(f, rng));
        REQUIRE(G->pair(u1 * u2, v) == G->pair(u1, v) * G->pair(u2, v));
    }
}

TEST_CASE("group law") {
    auto f = PrimeField::create(101);
    auto G = BilinearGroup::transparent(f);
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        auto a = FieldElement::random(f, rng);
        auto b = FieldElement::random(f, rng);
        auto c = FieldElement::random(f, rng);
        auto ga = G->power_of_g(a), gb = G->power_of_g(b), gc = G->power_of_g(c);
        REQUIRE((ga * gb) * gc == ga * (gb * gc));
        REQUIRE(ga.pow(b) == G->power_of_g(a * b));
        REQUIRE(ga * ga.inverse() == G->identity());
    }
}

TEST_CASE("pairing rejects foreign elements") {
    auto G = BilinearGroup::transparent(PrimeField::create(101));
    auto H = BilinearGroup::transparent(PrimeField::create(103));
    CHECK_THROWS_AS(G->pair(G->generator(), H->generator()), AlgebraError);
    CHECK_THROWS_AS(G->generator() * H->generator(), AlgebraError);
}

TEST_CASE("group element serialization carries the backend tag") {
    auto f = PrimeField::create(101);
    auto G = BilinearGroup::transparent(f);
    auto x = G->power_of_g(el(f, 66));
    auto bytes = x.to_bytes();
    CHECK(bytes == Bytes{1, 66});
    CHECK(G->element_from_bytes(bytes) == x);
    CHECK_THROWS_AS(G->element_from_bytes(Bytes{2, 66}), DecodeError);
    CHECK_THROWS_AS(G->element_from_bytes(Bytes{1, 101}), DecodeError);
}

TEST_CASE("hash_to_field") {
    auto f = PrimeField::create(101);
    auto a = hash_to_field(f, as_bytes("data"), "T1");
    CHECK(a == hash_to_field(f, as_bytes("data"), "T1"));

    auto big = PrimeField::default_field();
    CHECK_FALSE(hash_to_field(big, as_bytes("data"), "T1") == hash_to_field(big, as_bytes("data"), "T2"));
    CHECK_FALSE(hash_to_field(big, as_bytes("data"), "T1") == hash_to_field(big, as_bytes("datb"), "T1"));
}

TEST_CASE("hash_to_field is uniform over Z_101") {
    auto f = PrimeField::create(101);
    FieldHasher h(f, "chi");
    constexpr int kSamples = 100000;
    constexpr int kBuckets = 16;
    std::array<int, kBuckets> counts{};
    std::array<int, kBuckets> width{};
    for (int v = 0; v < 101; ++v) ++width[static_cast<std::size_t>(v * kBuckets / 101)];
    for (int i = 0; i < kSamples; ++i) {
        auto idx = static_cast<std::uint32_t>(i);
        auto v = h(ByteView(reinterpret_cast<const std::uint8_t*>(&idx), 4)).to_u64();
        ++counts[static_cast<std::size_t>(v * kBuckets / 101)];
    }
    double chi2 = 0;
    for (int b = 0; b < kBuckets; ++b) {
        double q = width[static_cast<std::size_t>(b)] / 101.0;
        double expected = kSamples * q;
        double sd = std::sqrt(kSamples * q * (1 - q));
        CHECK(std::abs(counts[static_cast<std::size_t>(b)] - expected) <= 5 * sd);
        chi2 += std::pow(counts[static_cast<std::size_t>(b)] - expected, 2) / expected;
    }
    // 15 degrees of freedom; 0.999 quantile is about 37.7.
    CHECK(chi2 < 37.7);
}

TEST_CASE("hash_to_group") {
    auto f = PrimeField::default_field();
    auto G = BilinearGroup::transparent(f);
    CHECK(G->hash_to_group(as_bytes("1")) == G->hash_to_group(as_bytes("1")));
    CHECK_FALSE(G->hash_to_group(as_bytes("1")) == G->hash_to_group(as_bytes("2")));
    for (auto m : {"", "1", "hello", "block-17"}) {
        CHECK(G->hash_to_group(as_bytes(m)).exponent() == hash_to_field(f, as_bytes(m), "H2G"));
    }
}
