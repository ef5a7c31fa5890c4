#include "por/selftest.hpp"

#include <set>

#include "por/erasure.hpp"
#include "por/gf2m.hpp"
#include "por/por_static.hpp"

namespace por {

namespace {

// GF(4) = {0, 1, a, c = a^2}, a^2 + a + 1 = 0.
std::string gf4_word(const std::vector<std::uint8_t>& w) {
    std::string s;
    for (auto e : w) s.push_back("01ac"[e]);
    return s;
}

FieldElement fe(const FieldPtr& f, std::uint64_t v) { return {f, v}; }

TaggedFile manual_store(const GroupPtr& G, Scheme s, std::vector<FieldElement> blocks, TagList tags) {
    TaggedFile t;
    t.scheme = s;
    t.group = G;
    t.container.field = G->scalars();
    t.container.header.prime = G->scalars()->modulus();
    t.container.header.f = 1;
    t.container.header.n = 2;
    t.container.elements = std::move(blocks);
    t.tags = std::move(tags);
    return t;
}

Challenge challenge(const FieldPtr& f, std::vector<std::pair<std::uint64_t, std::uint64_t>> q) {
    Challenge ch;
    for (auto [i, nu] : q) ch.entries.push_back({i, fe(f, nu)});
    return ch;
}

SelfTestLine gf4_table() {
    const std::set<std::string> published = {"000", "01a", "0ac", "0c1", "1a0", "ac0", "c10", "a01",
                                              "c0a", "10c", "1ca", "a1c", "ca1", "111", "aaa", "ccc"};
    ReedSolomon<Gf2m> code(Gf2m(2), CodeParams(3, 2, 2));
    std::set<std::string> generated;
    for (std::uint8_t a = 0; a < 4; ++a) {
        for (std::uint8_t b = 0; b < 4; ++b) generated.insert(gf4_word(code.encode(std::vector<std::uint8_t>{a, b}).symbols));
    }
    std::size_t matched = 0;
    for (const auto& w : generated) matched += published.count(w);
    const bool ok = matched == 16 && generated.size() == 16;
    return {"GF(4) (3,2,2) codeword table", ok, std::to_string(matched) + "/16 codewords matched"};
}

SelfTestLine gf4_erasure() {
    ReedSolomon<Gf2m> code(Gf2m(2), CodeParams(3, 2, 2));
    Codeword<std::uint8_t> word({1, 0, 3});
    word.erase(1);
    const auto got = gf4_word(code.encode(code.decode(word)).symbols);
    return {"GF(4) erasure decode", got == "10c", "1*c -> " + got};
}

SelfTestLine sw_private_example() {
    auto G = BilinearGroup::transparent(PrimeField::create(101));
    auto f = G->scalars();
    const auto alpha = fe(f, 7);
    IndexToField h = [&](std::uint64_t i) { return fe(f, i == 1 ? 13 : 21); };
    auto s1 = sw::private_tag(alpha, h(1), fe(f, 5));
    auto s2 = sw::private_tag(alpha, h(2), fe(f, 9));
    auto store = manual_store(G, Scheme::sw_private, {fe(f, 5), fe(f, 9)}, std::vector<FieldElement>{s1, s2});
    auto ch = challenge(f, {{1, 2}, {2, 3}});
    auto proof = std::get<SwPrivateProof>(por_prove(store, ch));
    const bool ok = proof.sigma.to_u64() == 45 && proof.mu.to_u64() == 37 && sw::private_check(alpha, h, ch, proof);
    return {"SW-private worked example", ok,
            "sigma=" + std::to_string(proof.sigma.to_u64()) + " mu=" + std::to_string(proof.mu.to_u64())};
}

SelfTestLine sw_public_example() {
    auto G = BilinearGroup::transparent(PrimeField::create(101));
    auto f = G->scalars();
    const auto x = fe(f, 3);
    const auto alpha = G->power_of_g(fe(f, 5));
    IndexToGroup h = [&](std::uint64_t) { return G->power_of_g(fe(f, 2)); };
    auto s1 = sw::public_tag(x, alpha, h(1), fe(f, 4));
    auto store = manual_store(G, Scheme::sw_public, {fe(f, 4)}, std::vector<GroupElement>{s1});
    auto ch = challenge(f, {{1, 2}});
    auto proof = std::get<SwPublicProof>(por_prove(store, ch));
    SwPublicParams pub{G->power_of_g(x), alpha};
    const auto sigma = proof.sigma.exponent().to_u64();
    const bool ok = sigma == 31 && proof.mu.to_u64() == 8 && sw::public_check(pub, G, h, ch, proof);
    return {"SW-public worked example", ok, "sigma=g^" + std::to_string(sigma) + " mu=" + std::to_string(proof.mu.to_u64())};
}

}  // namespace

std::vector<SelfTestLine> run_selftest() {
    return {gf4_table(), gf4_erasure(), sw_private_example(), sw_public_example()};
}

}  // namespace por
