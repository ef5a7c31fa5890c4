#include "por/authenticators.hpp"

#include <openssl/crypto.h>

namespace por {

namespace {
constexpr std::string_view kMacDomain = "MAC";
constexpr std::string_view kPrfDomain = "PRF";

Bytes random_bytes(Rng& rng, std::size_t len) {
    Bytes b(len);
    rng.fill(b);
    return b;
}

Digest domain_mac(const HmacSha256& h, std::string_view domain, ByteView data) {
    const std::uint8_t len = static_cast<std::uint8_t>(domain.size());
    return h.mac({ByteView(&len, 1), as_bytes(domain), data});
}
}  // namespace

MacKey MacKey::generate(Rng& rng, std::size_t len) { return {random_bytes(rng, len)}; }
PrfKey PrfKey::generate(Rng& rng, std::size_t len) { return {random_bytes(rng, len)}; }

std::array<std::uint8_t, 8> encode_index(std::uint64_t i) {
    std::array<std::uint8_t, 8> out;
    for (int b = 0; b < 8; ++b) out[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(i >> (8 * (7 - b)));
    return out;
}

MacTag mac_tag(const MacKey& k, ByteView m) { return keyed_hash(k.bytes, kMacDomain, m); }

bool mac_verify(const MacKey& k, ByteView m, ByteView tag) { return Mac(k).verify(m, tag); }

Mac::Mac(const MacKey& k) : hmac_(k.bytes) {}

MacTag Mac::tag(ByteView m) const { return domain_mac(hmac_, kMacDomain, m); }

bool Mac::verify(ByteView m, ByteView tag) const {
    if (tag.size() != sizeof(MacTag)) return false;
    auto expected = this->tag(m);
    return CRYPTO_memcmp(expected.data(), tag.data(), expected.size()) == 0;
}

Prf::Prf(const PrfKey& k, FieldPtr field) : hmac_(k.bytes), to_field_(std::move(field), kPrfDomain) {}

FieldElement Prf::operator()(ByteView input) const {
    auto inner = domain_mac(hmac_, kPrfDomain, input);
    return to_field_(inner);
}

FieldElement Prf::operator()(std::uint64_t index) const {
    auto enc = encode_index(index);
    return (*this)(enc);
}

FieldElement prf_eval(const PrfKey& k, const FieldPtr& field, ByteView input) { return Prf(k, field)(input); }

// ---------------------------------------------------------------------------

BlsKeyPair BlsKeyPair::generate(const GroupPtr& group, Rng& rng) {
    for (;;) {
        auto sk = FieldElement::random(group->scalars(), rng);
        if (!sk.is_zero()) return from_secret(group, std::move(sk));
    }
}

BlsKeyPair BlsKeyPair::from_secret(const GroupPtr& group, FieldElement sk) {
    auto pk = group->power_of_g(sk);
    return {std::move(sk), std::move(pk)};
}

GroupElement bls_sign(const GroupPtr& group, const FieldElement& sk, ByteView m) {
    return group->hash_to_group(m).pow(sk);
}

bool bls_verify(const GroupPtr& group, const GroupElement& pk, ByteView m, const GroupElement& sigma) {
    return group->pair(sigma, group->generator()) == group->pair(group->hash_to_group(m), pk);
}

}  // namespace por
