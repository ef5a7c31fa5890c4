#include "por/erasure.hpp"

#include <limits>

namespace por {

std::size_t PrimeCodeField::max_points() const {
    // Points 1..n must be distinct and nonzero mod p.
    const auto& p = field_->modulus();
    if (mpz_sizeinbase(p.get_mpz_t(), 2) > 62) return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(p.get_ui()) - 1;
}

CodeParams::CodeParams(std::size_t n_, std::size_t f_) : n(n_), f(f_) {
    if (f < 1 || f >= n) throw UsageError("code parameters need 1 <= f < n");
}

CodeParams::CodeParams(std::size_t n_, std::size_t f_, std::size_t d_) : CodeParams(n_, f_) {
    if (d_ != n - f + 1) throw UsageError("only MDS codes (d = n - f + 1) are supported");
}

std::vector<FieldElement> bytes_to_blocks(const FieldPtr& field, ByteView data) {
    const std::size_t chunk = field->payload_bytes();
    if (chunk == 0) throw UsageError("field is too small to carry a byte per element");
    std::vector<FieldElement> out;
    out.reserve((data.size() + chunk - 1) / chunk);
    Bytes buf(chunk);
    for (std::size_t i = 0; i < data.size(); i += chunk) {
        std::fill(buf.begin(), buf.end(), std::uint8_t{0});
        auto len = std::min(chunk, data.size() - i);
        std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(i), len, buf.begin());
        out.push_back(FieldElement::from_payload(field, buf));
    }
    return out;
}

Bytes blocks_to_bytes(std::span<const FieldElement> blocks, std::size_t byte_length) {
    Bytes out;
    if (blocks.empty()) {
        if (byte_length != 0) throw DecodeError("no blocks for nonempty file");
        return out;
    }
    const std::size_t chunk = blocks.front().field()->payload_bytes();
    if (blocks.size() * chunk < byte_length) throw DecodeError("blocks shorter than recorded byte length");
    out.reserve(blocks.size() * chunk);
    for (const auto& b : blocks) {
        auto bytes = b.to_payload(chunk);
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    out.resize(byte_length);
    return out;
}

// ---------------------------------------------------------------------------

void ContainerHeader::write(ByteWriter& w) const {
    w.raw(as_bytes("PORK"));
    w.u8(kVersion);
    w.u8(static_cast<std::uint8_t>(field_id));
    if (field_id == FieldId::prime) {
        const std::size_t width = (mpz_sizeinbase(prime.get_mpz_t(), 2) + 7) / 8;
        w.u16_le(static_cast<std::uint16_t>(width));
        Bytes p(width);
        mpz_export(p.data(), nullptr, 1, 1, 1, 0, prime.get_mpz_t());
        w.raw(p);
    } else {
        w.u8(static_cast<std::uint8_t>(m));
    }
    w.u32_le(f);
    w.u32_le(n);
    w.u64_le(stripes);
    w.u64_le(original_length);
    w.u16_le(symbol_width);
    w.u64_le(extra_symbols);
}

ContainerHeader ContainerHeader::read(ByteReader& r) {
    auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), "PORK")) throw DecodeError("bad container magic");
    if (r.u8() != kVersion) throw DecodeError("unsupported container version");
    ContainerHeader h;
    auto id = r.u8();
    if (id == static_cast<std::uint8_t>(FieldId::prime)) {
        h.field_id = FieldId::prime;
        auto width = r.u16_le();
        if (width == 0) throw DecodeError("empty modulus");
        auto p = r.raw(width);
        mpz_import(h.prime.get_mpz_t(), p.size(), 1, 1, 1, 0, p.data());
    } else if (id == static_cast<std::uint8_t>(FieldId::binary)) {
        h.field_id = FieldId::binary;
        h.m = r.u8();
    } else {
        throw DecodeError("unknown field id");
    }
    h.f = r.u32_le();
    h.n = r.u32_le();
    h.stripes = r.u64_le();
    h.original_length = r.u64_le();
    h.symbol_width = r.u16_le();
    h.extra_symbols = r.u64_le();
    if (h.symbol_width == 0) throw DecodeError("zero symbol width");
    return h;
}

Bytes Container::serialize() const {
    ByteWriter w;
    header.write(w);
    for (const auto& e : elements) e.write(w);
    return std::move(w).take();
}

Container Container::read(ByteReader& r) {
    Container c;
    c.header = ContainerHeader::read(r);
    if (c.header.field_id != FieldId::prime) throw DecodeError("expected a prime-field container");
    c.field = PrimeField::create(c.header.prime);
    const auto count = c.header.element_count();
    if (count > r.remaining() / c.field->byte_width()) throw DecodeError("container truncated");
    c.elements.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) c.elements.push_back(FieldElement::read(c.field, r));
    return c;
}

Container Container::parse(ByteView data) {
    ByteReader r(data);
    auto c = read(r);
    r.expect_end();
    return c;
}

// ---------------------------------------------------------------------------

FileCodec::FileCodec(FieldPtr field, CodeParams params)
    : field_(field), code_(PrimeCodeField(field), params) {}

Container FileCodec::encode(ByteView data) const {
    const auto& params = code_.params();
    auto blocks = bytes_to_blocks(field_, data);
    auto striped = stripe_blocks<FieldElement>(blocks, params.f, FieldElement::zero(field_));

    Container c;
    c.field = field_;
    c.header.field_id = FieldId::prime;
    c.header.prime = field_->modulus();
    c.header.f = static_cast<std::uint32_t>(params.f);
    c.header.n = static_cast<std::uint32_t>(params.n);
    c.header.stripes = striped.stripes.size();
    c.header.original_length = data.size();
    c.elements.reserve(striped.stripes.size() * params.n);
    for (const auto& s : striped.stripes) {
        auto cw = code_.encode(s);
        for (auto& sym : cw.symbols) c.elements.push_back(std::move(sym));
    }
    return c;
}

Bytes FileCodec::decode(const ContainerHeader& header, const std::vector<Codeword<FieldElement>>& stripes) const {
    if (stripes.size() != header.stripes) throw UsageError("stripe count mismatch");
    std::vector<FieldElement> blocks;
    blocks.reserve(stripes.size() * code_.params().f);
    for (std::size_t s = 0; s < stripes.size(); ++s) {
        try {
            auto msg = code_.decode(stripes[s]);
            blocks.insert(blocks.end(), msg.begin(), msg.end());
        } catch (const UnrecoverableError& e) {
            throw UnrecoverableError(e.deficit(), "stripe " + std::to_string(s) + ": " + e.what());
        }
    }
    return blocks_to_bytes(blocks, header.original_length);
}

}  // namespace por
