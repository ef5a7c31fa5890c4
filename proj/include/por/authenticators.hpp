#pragma once

#include <cstdint>

#include "por/algebra.hpp"
#include "por/bytes.hpp"
#include "por/hash.hpp"
#include "por/rng.hpp"

namespace por {

/// Secret key for the MAC. Default length 32 bytes.
struct MacKey {
    Bytes bytes;
    static MacKey generate(Rng& rng, std::size_t len = 32);
    bool operator==(const MacKey&) const = default;
};

/// Secret key for the PRF h_k: {0,1}* -> Z_p.
struct PrfKey {
    Bytes bytes;
    static PrfKey generate(Rng& rng, std::size_t len = 32);
    bool operator==(const PrfKey&) const = default;
};

using MacTag = Digest;

MacTag mac_tag(const MacKey& k, ByteView m);
bool mac_verify(const MacKey& k, ByteView m, ByteView tag);

/// MAC with the key schedule cached; use for tagging many blocks.
class Mac {
public:
    explicit Mac(const MacKey& k);
    MacTag tag(ByteView m) const;
    bool verify(ByteView m, ByteView tag) const;

private:
    HmacSha256 hmac_;
};

/// h_k(x) = hash_to_field(keyed_hash(k, x), "PRF").
class Prf {
public:
    Prf(const PrfKey& k, FieldPtr field);
    FieldElement operator()(ByteView input) const;
    FieldElement operator()(std::uint64_t index) const;

private:
    HmacSha256 hmac_;
    FieldHasher to_field_;
};

FieldElement prf_eval(const PrfKey& k, const FieldPtr& field, ByteView input);

/// Fixed-width 8-byte big-endian index encoding used inside every MAC, PRF
/// and hash input that mentions a block position.
std::array<std::uint8_t, 8> encode_index(std::uint64_t i);

// ---------------------------------------------------------------------------
// BLS signatures over a symmetric pairing.

struct BlsKeyPair {
    FieldElement sk;
    GroupElement pk;  // g^sk

    static BlsKeyPair generate(const GroupPtr& group, Rng& rng);
    static BlsKeyPair from_secret(const GroupPtr& group, FieldElement sk);
};

/// sigma = H(m)^sk
GroupElement bls_sign(const GroupPtr& group, const FieldElement& sk, ByteView m);
/// Accepts iff e(sigma, g) = e(H(m), pk). Throws AlgebraError when sigma or
/// pk is not an element of `group`.
bool bls_verify(const GroupPtr& group, const GroupElement& pk, ByteView m, const GroupElement& sigma);

}  // namespace por
