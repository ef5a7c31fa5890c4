#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include "por/bytes.hpp"
#include "por/hash.hpp"
#include "por/rng.hpp"

namespace por {

class PrimeField;
using FieldPtr = std::shared_ptr<const PrimeField>;

/// Z_p for a prime p fixed at construction. Shared by every element that
/// lives in it.
class PrimeField {
public:
    /// Throws UsageError unless p passes a probabilistic primality test.
    static FieldPtr create(const mpz_class& p);
    static FieldPtr create(std::uint64_t p) { return create(mpz_class(std::to_string(p))); }
    /// 2^256 - 2^32 - 977 (the secp256k1 base field prime).
    static FieldPtr default_field();

    const mpz_class& modulus() const { return p_; }
    std::size_t bits() const { return bits_; }
    /// Serialized element width: ceil(bits(p) / 8).
    std::size_t byte_width() const { return (bits_ + 7) / 8; }
    /// Bytes of payload that always fit below p: floor((bits(p) - 1) / 8).
    std::size_t payload_bytes() const { return (bits_ - 1) / 8; }

    bool operator==(const PrimeField& o) const { return p_ == o.p_; }

private:
    explicit PrimeField(mpz_class p);

    mpz_class p_;
    std::size_t bits_;
};

/// Residue in [0, p). Immutable; arithmetic returns new values and throws
/// AlgebraError when the operands come from different moduli.
class FieldElement {
public:
    FieldElement(FieldPtr field, const mpz_class& v);
    FieldElement(FieldPtr field, std::uint64_t v);

    static FieldElement zero(const FieldPtr& f) { return {f, std::uint64_t{0}}; }
    static FieldElement one(const FieldPtr& f) { return {f, std::uint64_t{1}}; }
    static FieldElement random(const FieldPtr& f, Rng& rng);
    /// Fixed-width big-endian; rejects values >= p.
    static FieldElement from_bytes(const FieldPtr& f, ByteView data);
    /// Packs up to payload_bytes() bytes big-endian; always < p.
    static FieldElement from_payload(const FieldPtr& f, ByteView data);

    const FieldPtr& field() const { return field_; }
    const mpz_class& value() const { return v_; }
    bool is_zero() const { return v_ == 0; }
    std::uint64_t to_u64() const;

    FieldElement operator+(const FieldElement& o) const;
    FieldElement operator-(const FieldElement& o) const;
    FieldElement operator*(const FieldElement& o) const;
    FieldElement operator-() const;
    FieldElement& operator+=(const FieldElement& o);
    FieldElement& operator*=(const FieldElement& o);
    /// Throws AlgebraError for zero.
    FieldElement inverse() const;
    FieldElement pow(const mpz_class& e) const;

    bool operator==(const FieldElement& o) const;

    Bytes to_bytes() const;
    void write(ByteWriter& w) const;
    static FieldElement read(const FieldPtr& f, ByteReader& r);
    /// Inverse of from_payload: `n` low-order bytes, big-endian.
    Bytes to_payload(std::size_t n) const;
    std::string to_string() const { return v_.get_str(); }

private:
    FieldElement(FieldPtr field, mpz_class v, bool /*reduced*/) : field_(std::move(field)), v_(std::move(v)) {}
    const PrimeField& checked(const FieldElement& o) const;

    FieldPtr field_;
    mpz_class v_;
};

/// Uniform map of arbitrary bytes into Z_p: 512 bits of HMAC-SHA256 output
/// keyed by the domain tag, reduced mod p.
class FieldHasher {
public:
    FieldHasher(FieldPtr field, std::string_view domain_tag);
    FieldElement operator()(ByteView data) const;
    const FieldPtr& field() const { return field_; }

private:
    FieldPtr field_;
    HmacSha256 mac_;
};

FieldElement hash_to_field(const FieldPtr& field, ByteView data, std::string_view domain_tag);

// ---------------------------------------------------------------------------
// Symmetric bilinear group e: G x G -> G_T of prime order p.

enum class PairingBackend : std::uint8_t {
    /// Elements are represented by their discrete log to the base g. The
    /// pairing multiplies exponents. Exact, and offers no security.
    transparent = 1,
};

class BilinearGroup;
using GroupPtr = std::shared_ptr<const BilinearGroup>;
class GroupElement;
class GtElement;

class BilinearGroup : public std::enable_shared_from_this<BilinearGroup> {
public:
    static GroupPtr transparent(FieldPtr scalars);

    PairingBackend backend() const { return backend_; }
    const FieldPtr& scalars() const { return scalars_; }

    GroupElement generator() const;
    GroupElement identity() const;
    /// g^a
    GroupElement power_of_g(const FieldElement& a) const;
    GtElement gt_generator() const;
    GtElement gt_identity() const;

    /// Throws AlgebraError when either element belongs to another group.
    GtElement pair(const GroupElement& u, const GroupElement& v) const;

    /// Full-domain hash H: {0,1}* -> G.
    GroupElement hash_to_group(ByteView data) const;

    /// 1-byte backend tag plus the element body.
    std::size_t element_width() const { return 1 + scalars_->byte_width(); }
    /// Throws DecodeError when the tag names another backend or the body is out of range.
    GroupElement element_from_bytes(ByteView data) const;

private:
    BilinearGroup(PairingBackend b, FieldPtr scalars);

    PairingBackend backend_;
    FieldPtr scalars_;
    FieldHasher h2g_;
};

class GroupElement {
public:
    const GroupPtr& group() const { return group_; }
    /// Transparent backend only: log_g of this element.
    const FieldElement& exponent() const { return exp_; }

    GroupElement operator*(const GroupElement& o) const;
    GroupElement pow(const FieldElement& e) const;
    GroupElement inverse() const;
    bool is_identity() const { return exp_.is_zero(); }
    bool operator==(const GroupElement& o) const;

    Bytes to_bytes() const;

private:
    friend class BilinearGroup;
    GroupElement(GroupPtr g, FieldElement e) : group_(std::move(g)), exp_(std::move(e)) {}
    void check(const GroupElement& o) const;

    GroupPtr group_;
    FieldElement exp_;
};

class GtElement {
public:
    const FieldElement& exponent() const { return exp_; }

    GtElement operator*(const GtElement& o) const;
    GtElement pow(const FieldElement& e) const;
    bool is_identity() const { return exp_.is_zero(); }
    bool operator==(const GtElement& o) const;

private:
    friend class BilinearGroup;
    GtElement(GroupPtr g, FieldElement e) : group_(std::move(g)), exp_(std::move(e)) {}

    GroupPtr group_;
    FieldElement exp_;
};

}  // namespace por
