#include "por/algebra.hpp"

#include <algorithm>

#include "por/error.hpp"

namespace por {

namespace {

const char* const kDefaultPrime =
    "115792089237316195423570985008687907853269984665640564039457584007908834671663";

mpz_class import_be(ByteView data) {
    mpz_class v;
    if (!data.empty()) mpz_import(v.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
    return v;
}

void export_be(const mpz_class& v, std::span<std::uint8_t> out) {
    std::fill(out.begin(), out.end(), std::uint8_t{0});
    std::size_t count = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
    if (v == 0) return;
    if (count > out.size()) throw UsageError("value does not fit fixed width");
    mpz_export(out.data() + (out.size() - count), nullptr, 1, 1, 1, 0, v.get_mpz_t());
}

}  // namespace

// ---------------------------------------------------------------------------

PrimeField::PrimeField(mpz_class p) : p_(std::move(p)), bits_(mpz_sizeinbase(p_.get_mpz_t(), 2)) {}

FieldPtr PrimeField::create(const mpz_class& p) {
    if (p < 2 || mpz_probab_prime_p(p.get_mpz_t(), 40) == 0) {
        throw UsageError("field modulus is not prime: " + p.get_str());
    }
    return FieldPtr(new PrimeField(p));
}

FieldPtr PrimeField::default_field() {
    static const FieldPtr field = create(mpz_class(kDefaultPrime));
    return field;
}

// ---------------------------------------------------------------------------

FieldElement::FieldElement(FieldPtr field, const mpz_class& v) : field_(std::move(field)) {
    mpz_mod(v_.get_mpz_t(), v.get_mpz_t(), field_->modulus().get_mpz_t());
}

FieldElement::FieldElement(FieldPtr field, std::uint64_t v) : field_(std::move(field)) {
    mpz_import(v_.get_mpz_t(), 1, 1, sizeof v, 0, 0, &v);
    if (v_ >= field_->modulus()) v_ %= field_->modulus();
}

FieldElement FieldElement::random(const FieldPtr& f, Rng& rng) {
    Bytes buf(f->byte_width() + 16);
    rng.fill(buf);
    return {f, import_be(buf)};
}

FieldElement FieldElement::from_bytes(const FieldPtr& f, ByteView data) {
    if (data.size() != f->byte_width()) throw DecodeError("field element has wrong width");
    auto v = import_be(data);
    if (v >= f->modulus()) throw DecodeError("field element out of range");
    return {f, std::move(v), true};
}

FieldElement FieldElement::from_payload(const FieldPtr& f, ByteView data) {
    if (data.size() > f->payload_bytes()) throw UsageError("payload exceeds element capacity");
    return {f, import_be(data), true};
}

std::uint64_t FieldElement::to_u64() const {
    if (mpz_sizeinbase(v_.get_mpz_t(), 2) > 64) throw UsageError("field element exceeds 64 bits");
    std::uint64_t out = 0;
    mpz_export(&out, nullptr, 1, sizeof out, 0, 0, v_.get_mpz_t());
    return out;
}

const PrimeField& FieldElement::checked(const FieldElement& o) const {
    if (field_ != o.field_ && !(*field_ == *o.field_)) throw AlgebraError("operands from different fields");
    return *field_;
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
    const auto& f = checked(o);
    mpz_class r = v_ + o.v_;
    if (r >= f.modulus()) r -= f.modulus();
    return {field_, std::move(r), true};
}

FieldElement FieldElement::operator-(const FieldElement& o) const {
    const auto& f = checked(o);
    mpz_class r = v_ - o.v_;
    if (r < 0) r += f.modulus();
    return {field_, std::move(r), true};
}

FieldElement FieldElement::operator*(const FieldElement& o) const {
    const auto& f = checked(o);
    mpz_class r = v_ * o.v_;
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), f.modulus().get_mpz_t());
    return {field_, std::move(r), true};
}

FieldElement FieldElement::operator-() const {
    if (v_ == 0) return *this;
    return {field_, field_->modulus() - v_, true};
}

FieldElement& FieldElement::operator+=(const FieldElement& o) {
    const auto& f = checked(o);
    v_ += o.v_;
    if (v_ >= f.modulus()) v_ -= f.modulus();
    return *this;
}

FieldElement& FieldElement::operator*=(const FieldElement& o) {
    const auto& f = checked(o);
    v_ *= o.v_;
    mpz_mod(v_.get_mpz_t(), v_.get_mpz_t(), f.modulus().get_mpz_t());
    return *this;
}

FieldElement FieldElement::inverse() const {
    if (v_ == 0) throw AlgebraError("inverse of zero");
    mpz_class r;
    mpz_invert(r.get_mpz_t(), v_.get_mpz_t(), field_->modulus().get_mpz_t());
    return {field_, std::move(r), true};
}

FieldElement FieldElement::pow(const mpz_class& e) const {
    mpz_class r;
    if (e < 0) {
        return inverse().pow(-e);
    }
    mpz_powm(r.get_mpz_t(), v_.get_mpz_t(), e.get_mpz_t(), field_->modulus().get_mpz_t());
    return {field_, std::move(r), true};
}

bool FieldElement::operator==(const FieldElement& o) const {
    return (field_ == o.field_ || *field_ == *o.field_) && v_ == o.v_;
}

Bytes FieldElement::to_bytes() const {
    Bytes out(field_->byte_width());
    export_be(v_, out);
    return out;
}

void FieldElement::write(ByteWriter& w) const { w.raw(to_bytes()); }

FieldElement FieldElement::read(const FieldPtr& f, ByteReader& r) {
    return from_bytes(f, r.raw(f->byte_width()));
}

Bytes FieldElement::to_payload(std::size_t n) const {
    Bytes out(n);
    export_be(v_, out);
    return out;
}

// ---------------------------------------------------------------------------

FieldHasher::FieldHasher(FieldPtr field, std::string_view domain_tag)
    : field_(std::move(field)), mac_(as_bytes(domain_tag)) {}

FieldElement FieldHasher::operator()(ByteView data) const {
    std::array<std::uint8_t, 64> wide;
    for (std::uint8_t counter = 0; counter < 2; ++counter) {
        auto d = mac_.mac({data, ByteView(&counter, 1)});
        std::copy(d.begin(), d.end(), wide.begin() + 32 * counter);
    }
    return {field_, import_be(wide)};
}

FieldElement hash_to_field(const FieldPtr& field, ByteView data, std::string_view domain_tag) {
    return FieldHasher(field, domain_tag)(data);
}

// ---------------------------------------------------------------------------

BilinearGroup::BilinearGroup(PairingBackend b, FieldPtr scalars)
    : backend_(b), scalars_(scalars), h2g_(scalars, "H2G") {}

GroupPtr BilinearGroup::transparent(FieldPtr scalars) {
    return GroupPtr(new BilinearGroup(PairingBackend::transparent, std::move(scalars)));
}

GroupElement BilinearGroup::generator() const { return {shared_from_this(), FieldElement::one(scalars_)}; }
GroupElement BilinearGroup::identity() const { return {shared_from_this(), FieldElement::zero(scalars_)}; }
GroupElement BilinearGroup::power_of_g(const FieldElement& a) const {
    return {shared_from_this(), FieldElement(scalars_, a.value())};
}
GtElement BilinearGroup::gt_generator() const { return {shared_from_this(), FieldElement::one(scalars_)}; }
GtElement BilinearGroup::gt_identity() const { return {shared_from_this(), FieldElement::zero(scalars_)}; }

namespace {
bool same_group(const BilinearGroup& a, const BilinearGroup& b) {
    return &a == &b || (a.backend() == b.backend() && *a.scalars() == *b.scalars());
}
}  // namespace

GtElement BilinearGroup::pair(const GroupElement& u, const GroupElement& v) const {
    if (!same_group(*this, *u.group()) || !same_group(*this, *v.group())) {
        throw AlgebraError("pairing arguments from a different bilinear group");
    }
    // e(g^a, g^b) = e(g, g)^{ab}
    return {shared_from_this(), u.exponent() * v.exponent()};
}

GroupElement BilinearGroup::hash_to_group(ByteView data) const { return {shared_from_this(), h2g_(data)}; }

GroupElement BilinearGroup::element_from_bytes(ByteView data) const {
    if (data.size() != element_width()) throw DecodeError("group element has wrong width");
    if (data[0] != static_cast<std::uint8_t>(backend_)) throw DecodeError("group element from another backend");
    return {shared_from_this(), FieldElement::from_bytes(scalars_, data.subspan(1))};
}

void GroupElement::check(const GroupElement& o) const {
    if (!same_group(*group_, *o.group_)) throw AlgebraError("group elements from different groups");
}

GroupElement GroupElement::operator*(const GroupElement& o) const {
    check(o);
    return {group_, exp_ + o.exp_};
}

GroupElement GroupElement::pow(const FieldElement& e) const { return {group_, exp_ * FieldElement(exp_.field(), e.value())}; }

GroupElement GroupElement::inverse() const { return {group_, -exp_}; }

bool GroupElement::operator==(const GroupElement& o) const {
    return same_group(*group_, *o.group_) && exp_ == o.exp_;
}

Bytes GroupElement::to_bytes() const {
    Bytes out;
    out.reserve(group_->element_width());
    out.push_back(static_cast<std::uint8_t>(group_->backend()));
    auto body = exp_.to_bytes();
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

GtElement GtElement::operator*(const GtElement& o) const {
    if (!same_group(*group_, *o.group_)) throw AlgebraError("G_T elements from different groups");
    return {group_, exp_ + o.exp_};
}

GtElement GtElement::pow(const FieldElement& e) const { return {group_, exp_ * FieldElement(exp_.field(), e.value())}; }

bool GtElement::operator==(const GtElement& o) const {
    return same_group(*group_, *o.group_) && exp_ == o.exp_;
}

}  // namespace por
