#include "por/por_static.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <openssl/crypto.h>

#include "por/error.hpp"

namespace por {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

FieldElement nonzero_random(const FieldPtr& f, Rng& rng) {
    for (;;) {
        auto x = FieldElement::random(f, rng);
        if (!x.is_zero()) return x;
    }
}

/// Deterministic keyed stream of 64-bit words: HMAC(k, domain | counter).
class KeyedStream {
public:
    KeyedStream(const Bytes& key, std::string_view domain) : hmac_(key), domain_(domain) {}

    std::uint64_t next() {
        if (used_ == 4) refill();
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v = (v << 8) | block_[static_cast<std::size_t>(used_ * 8 + b)];
        ++used_;
        return v;
    }

    std::uint64_t uniform(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        for (;;) {
            auto v = next();
            if (v < limit) return v % bound;
        }
    }

private:
    void refill() {
        auto ctr = encode_index(counter_++);
        block_ = hmac_.mac({as_bytes(domain_), ctr});
        used_ = 0;
    }

    HmacSha256 hmac_;
    std::string domain_;
    std::uint64_t counter_ = 0;
    Digest block_{};
    int used_ = 4;
};

Bytes tagged_input(std::string_view label, std::uint64_t i) {
    Bytes out(label.begin(), label.end());
    auto enc = encode_index(i);
    out.insert(out.end(), enc.begin(), enc.end());
    return out;
}

std::size_t expected_tag_width(Scheme s, const FieldPtr& field) {
    switch (s) {
        case Scheme::jk_mac: return 32;
        case Scheme::jk_bls: return 1 + field->byte_width();
        case Scheme::sentinel: return 0;
        case Scheme::sw_private: return field->byte_width();
        case Scheme::sw_public: return 1 + field->byte_width();
    }
    throw UsageError("unknown scheme");
}

TagList empty_tags(Scheme s) {
    switch (s) {
        case Scheme::jk_mac:
        case Scheme::jk_bls:
        case Scheme::sentinel: return std::vector<Bytes>{};
        case Scheme::sw_private: return std::vector<FieldElement>{};
        case Scheme::sw_public: return std::vector<GroupElement>{};
    }
    throw UsageError("unknown scheme");
}

Scheme scheme_from_byte(std::uint8_t b) {
    if (b < 1 || b > 5) throw DecodeError("unknown scheme id " + std::to_string(b));
    return static_cast<Scheme>(b);
}

std::uint64_t tag_count_for(Scheme s, const Container& c) {
    return s == Scheme::sentinel ? 0 : c.elements.size();
}

/// Reads one tag; `strict` turns malformed tags into errors rather than zeros.
void read_tag(TagList& tags, Scheme s, const GroupPtr& group, ByteView body, bool strict) {
    std::visit(overloaded{
                   [&](std::vector<Bytes>& v) {
                       if (strict && s == Scheme::jk_bls) group->element_from_bytes(body);
                       v.emplace_back(body.begin(), body.end());
                   },
                   [&](std::vector<FieldElement>& v) {
                       try {
                           v.push_back(FieldElement::from_bytes(group->scalars(), body));
                       } catch (const DecodeError&) {
                           if (strict) throw;
                           v.push_back(FieldElement::zero(group->scalars()));
                       }
                   },
                   [&](std::vector<GroupElement>& v) {
                       try {
                           v.push_back(group->element_from_bytes(body));
                       } catch (const DecodeError&) {
                           if (strict) throw;
                           v.push_back(group->identity());
                       }
                   },
               },
               tags);
}

void push_zero_tag(TagList& tags, std::size_t width, const GroupPtr& group) {
    std::visit(overloaded{
                   [&](std::vector<Bytes>& v) { v.emplace_back(width, 0); },
                   [&](std::vector<FieldElement>& v) { v.push_back(FieldElement::zero(group->scalars())); },
                   [&](std::vector<GroupElement>& v) { v.push_back(group->identity()); },
               },
               tags);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::jk_mac: return "jk-mac";
        case Scheme::jk_bls: return "jk-bls";
        case Scheme::sentinel: return "sentinel";
        case Scheme::sw_private: return "sw-private";
        case Scheme::sw_public: return "sw-public";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    for (auto s : {Scheme::jk_mac, Scheme::jk_bls, Scheme::sentinel, Scheme::sw_private, Scheme::sw_public}) {
        if (scheme_name(s) == name) return s;
    }
    throw UsageError("unknown scheme '" + std::string(name) + "'");
}

bool is_jk(Scheme s) { return s == Scheme::jk_mac || s == Scheme::jk_bls; }

Scheme key_scheme(const ClientKeys& k) {
    return std::visit(overloaded{
                          [](const JkMacKeys&) { return Scheme::jk_mac; },
                          [](const JkBlsKeys&) { return Scheme::jk_bls; },
                          [](const SwPrivateKeys&) { return Scheme::sw_private; },
                          [](const SwPublicKeys&) { return Scheme::sw_public; },
                          [](const SentinelKeys&) { return Scheme::sentinel; },
                      },
                      k);
}

ClientKeys generate_keys(Scheme s, const GroupPtr& group, Rng& rng) {
    const auto& field = group->scalars();
    switch (s) {
        case Scheme::jk_mac: return JkMacKeys{MacKey::generate(rng)};
        case Scheme::jk_bls: return JkBlsKeys{BlsKeyPair::generate(group, rng)};
        case Scheme::sentinel:
            return SentinelKeys{PrfKey::generate(rng), PrfKey::generate(rng), PrfKey::generate(rng)};
        case Scheme::sw_private: return SwPrivateKeys{nonzero_random(field, rng), PrfKey::generate(rng)};
        case Scheme::sw_public: {
            auto x = nonzero_random(field, rng);
            auto alpha = group->power_of_g(nonzero_random(field, rng));
            return SwPublicKeys{x, SwPublicParams{group->power_of_g(x), alpha}};
        }
    }
    throw UsageError("unknown scheme");
}

VerifierKey verifier_key(const ClientKeys& k) {
    return std::visit(overloaded{
                          [](const JkMacKeys& m) -> VerifierKey { return m; },
                          [](const JkBlsKeys& b) -> VerifierKey { return BlsPublicKey{b.keys.pk}; },
                          [](const SwPrivateKeys& p) -> VerifierKey { return p; },
                          [](const SwPublicKeys& p) -> VerifierKey { return p.pub; },
                          [](const SentinelKeys&) -> VerifierKey {
                              throw UsageError("sentinel files are audited with sentinel_audit");
                          },
                      },
                      k);
}

Bytes jk_message(std::uint64_t index, const FieldElement& block) {
    auto enc = encode_index(index);
    Bytes out(enc.begin(), enc.end());
    auto b = block.to_bytes();
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// ---------------------------------------------------------------------------
// SW algebra

namespace sw {

FieldElement private_tag(const FieldElement& alpha, const FieldElement& h_i, const FieldElement& block) {
    return h_i + alpha * block;
}

bool private_check(const FieldElement& alpha, const IndexToField& h, const Challenge& ch, const SwPrivateProof& pr) {
    auto rhs = alpha * pr.mu;
    for (const auto& e : ch.entries) rhs += e.coeff * h(e.index);
    return rhs == pr.sigma;
}

GroupElement public_tag(const FieldElement& x, const GroupElement& alpha, const GroupElement& h_i,
                        const FieldElement& block) {
    return (h_i * alpha.pow(block)).pow(x);
}

bool public_check(const SwPublicParams& pub, const GroupPtr& group, const IndexToGroup& h, const Challenge& ch,
                  const SwPublicProof& pr) {
    auto acc = pub.alpha.pow(pr.mu);
    for (const auto& e : ch.entries) acc = acc * h(e.index).pow(e.coeff);
    return group->pair(pr.sigma, group->generator()) == group->pair(acc, pub.v);
}

GroupElement index_hash(const GroupPtr& group, std::uint64_t index) {
    return group->hash_to_group(encode_index(index));
}

}  // namespace sw

// ---------------------------------------------------------------------------
// TaggedFile

Bytes TaggedFile::tag_bytes(std::uint64_t index) const {
    if (index == 0) throw UsageError("block indices are 1-based");
    return std::visit(overloaded{
                          [&](const std::vector<Bytes>& v) { return index <= v.size() ? v[index - 1] : Bytes{}; },
                          [&](const std::vector<FieldElement>& v) { return v.at(index - 1).to_bytes(); },
                          [&](const std::vector<GroupElement>& v) { return v.at(index - 1).to_bytes(); },
                      },
                      tags);
}

std::size_t TaggedFile::tag_width() const { return expected_tag_width(scheme, field()); }

Bytes TaggedFile::serialize_tags() const {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(scheme));
    w.u16_le(static_cast<std::uint16_t>(tag_width()));
    const std::uint64_t count = std::visit([](const auto& v) { return static_cast<std::uint64_t>(v.size()); }, tags);
    w.u64_le(count);
    for (std::uint64_t i = 1; i <= count; ++i) w.raw(tag_bytes(i));
    return std::move(w).take();
}

Bytes TaggedFile::serialize() const {
    auto out = container.serialize();
    auto t = serialize_tags();
    out.insert(out.end(), t.begin(), t.end());
    return out;
}

std::string TaggedFile::compute_id() const {
    auto d = sha256({serialize()});
    return to_hex(ByteView(d.data(), 16));
}

TaggedFile TaggedFile::parse(ByteView data) {
    ByteReader r(data);
    TaggedFile t;
    t.container = Container::read(r);
    t.group = BilinearGroup::transparent(t.container.field);
    t.scheme = scheme_from_byte(r.u8());
    const auto width = r.u16_le();
    if (width != expected_tag_width(t.scheme, t.field())) throw DecodeError("tag width does not match scheme");
    const auto count = r.u64_le();
    if (count != tag_count_for(t.scheme, t.container)) throw DecodeError("tag count does not match block count");
    t.tags = empty_tags(t.scheme);
    for (std::uint64_t i = 0; i < count; ++i) read_tag(t.tags, t.scheme, t.group, r.raw(width), true);
    r.expect_end();
    t.file_id = t.compute_id();
    return t;
}

TaggedFile TaggedFile::parse_lenient(ByteView container, ByteView tags, std::string file_id) {
    ByteReader r(container);
    TaggedFile t;
    t.file_id = std::move(file_id);
    t.container.header = ContainerHeader::read(r);
    if (t.container.header.field_id != FieldId::prime) throw DecodeError("expected a prime-field container");
    t.container.field = PrimeField::create(t.container.header.prime);
    t.group = BilinearGroup::transparent(t.container.field);
    const auto& field = t.container.field;
    const auto count = t.container.header.element_count();
    const auto width = field->byte_width();
    t.container.elements.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        if (r.remaining() >= width) {
            try {
                t.container.elements.push_back(FieldElement::from_bytes(field, r.raw(width)));
                continue;
            } catch (const DecodeError&) {
            }
        }
        t.container.elements.push_back(FieldElement::zero(field));
    }

    ByteReader tr(tags);
    t.scheme = scheme_from_byte(tr.u8());
    const auto tag_width = expected_tag_width(t.scheme, field);
    t.tags = empty_tags(t.scheme);
    const auto want = tag_count_for(t.scheme, t.container);
    if (tr.remaining() >= 10) {
        tr.u16_le();
        tr.u64_le();
    }
    for (std::uint64_t i = 0; i < want; ++i) {
        if (tr.remaining() >= tag_width) {
            read_tag(t.tags, t.scheme, t.group, tr.raw(tag_width), false);
        } else {
            push_zero_tag(t.tags, tag_width, t.group);
        }
    }
    return t;
}

TaggedFile por_setup(ByteView file, const ClientKeys& keys, const GroupPtr& group, CodeParams code) {
    if (file.empty()) throw UsageError("cannot set up an empty file");
    const auto scheme = key_scheme(keys);
    if (scheme == Scheme::sentinel) throw UsageError("sentinel files are set up with sentinel_setup");
    const auto& field = group->scalars();

    TaggedFile t;
    t.scheme = scheme;
    t.group = group;
    t.container = FileCodec(field, code).encode(file);
    const auto& blocks = t.container.elements;

    std::visit(overloaded{
                   [&](const JkMacKeys& k) {
                       Mac mac(k.mac);
                       std::vector<Bytes> tags;
                       tags.reserve(blocks.size());
                       for (std::size_t i = 0; i < blocks.size(); ++i) {
                           auto d = mac.tag(jk_message(i + 1, blocks[i]));
                           tags.emplace_back(d.begin(), d.end());
                       }
                       t.tags = std::move(tags);
                   },
                   [&](const JkBlsKeys& k) {
                       std::vector<Bytes> tags;
                       tags.reserve(blocks.size());
                       for (std::size_t i = 0; i < blocks.size(); ++i) {
                           tags.push_back(bls_sign(group, k.keys.sk, jk_message(i + 1, blocks[i])).to_bytes());
                       }
                       t.tags = std::move(tags);
                   },
                   [&](const SwPrivateKeys& k) {
                       Prf h(k.prf, field);
                       std::vector<FieldElement> tags;
                       tags.reserve(blocks.size());
                       for (std::size_t i = 0; i < blocks.size(); ++i) {
                           tags.push_back(sw::private_tag(k.alpha, h(i + 1), blocks[i]));
                       }
                       t.tags = std::move(tags);
                   },
                   [&](const SwPublicKeys& k) {
                       std::vector<GroupElement> tags;
                       tags.reserve(blocks.size());
                       for (std::size_t i = 0; i < blocks.size(); ++i) {
                           tags.push_back(sw::public_tag(k.x, k.pub.alpha, sw::index_hash(group, i + 1), blocks[i]));
                       }
                       t.tags = std::move(tags);
                   },
                   [](const SentinelKeys&) {},
               },
               keys);
    t.file_id = t.compute_id();
    return t;
}

// ---------------------------------------------------------------------------
// Challenges and proofs

void Challenge::write(ByteWriter& w) const {
    w.str(file_id);
    w.u64_be(nonce);
    const std::uint16_t width =
        entries.empty() ? 0 : static_cast<std::uint16_t>(entries.front().coeff.field()->byte_width());
    w.u16_be(width);
    w.u32_be(static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        w.u64_be(e.index);
        e.coeff.write(w);
    }
}

Challenge Challenge::read(const FieldPtr& field, ByteReader& r) {
    Challenge ch;
    ch.file_id = r.str();
    ch.nonce = r.u64_be();
    const auto width = r.u16_be();
    const auto count = r.u32_be();
    if (count > 0 && width != field->byte_width()) throw DecodeError("challenge coefficient width mismatch");
    if (count > r.remaining() / (8 + field->byte_width())) throw DecodeError("challenge truncated");
    std::set<std::uint64_t> seen;
    for (std::uint32_t i = 0; i < count; ++i) {
        auto index = r.u64_be();
        if (index == 0 || !seen.insert(index).second) throw DecodeError("challenge indices must be distinct and >= 1");
        ch.entries.push_back({index, FieldElement::read(field, r)});
    }
    return ch;
}

Challenge gen_challenge(const FieldPtr& field, std::string file_id, std::uint64_t n, std::uint64_t l, Rng& rng,
                        bool with_coefficients) {
    if (l == 0 || l > n) {
        throw UsageError("challenge size " + std::to_string(l) + " must be in [1, " + std::to_string(n) + "]");
    }
    // Floyd's sampling: l distinct values from [1, n].
    std::set<std::uint64_t> picked;
    for (std::uint64_t j = n - l + 1; j <= n; ++j) {
        auto t = 1 + rng.uniform(j);
        if (!picked.insert(t).second) picked.insert(j);
    }
    Challenge ch;
    ch.file_id = std::move(file_id);
    ch.nonce = rng.next_u64();
    ch.entries.reserve(l);
    for (auto i : picked) {
        ch.entries.push_back({i, with_coefficients ? FieldElement::random(field, rng) : FieldElement::one(field)});
    }
    return ch;
}

void write_proof(ByteWriter& w, const Proof& p) {
    std::visit(overloaded{
                   [&](const JkProof& jk) {
                       w.u8(1);
                       w.u32_be(static_cast<std::uint32_t>(jk.items.size()));
                       for (const auto& it : jk.items) {
                           it.block.write(w);
                           w.blob(it.tag);
                       }
                   },
                   [&](const SwPrivateProof& sp) {
                       w.u8(2);
                       sp.sigma.write(w);
                       sp.mu.write(w);
                   },
                   [&](const SwPublicProof& sp) {
                       w.u8(3);
                       w.raw(sp.sigma.to_bytes());
                       sp.mu.write(w);
                   },
               },
               p);
}

Proof read_proof(const GroupPtr& group, ByteReader& r) {
    const auto& field = group->scalars();
    switch (r.u8()) {
        case 1: {
            JkProof jk;
            const auto count = r.u32_be();
            if (count > r.remaining() / (field->byte_width() + 4)) throw DecodeError("proof truncated");
            for (std::uint32_t i = 0; i < count; ++i) {
                auto block = FieldElement::read(field, r);
                jk.items.push_back({std::move(block), r.blob()});
            }
            return jk;
        }
        case 2: {
            auto sigma = FieldElement::read(field, r);
            return SwPrivateProof{std::move(sigma), FieldElement::read(field, r)};
        }
        case 3: {
            auto sigma = group->element_from_bytes(r.raw(group->element_width()));
            return SwPublicProof{std::move(sigma), FieldElement::read(field, r)};
        }
        default: throw DecodeError("unknown proof kind");
    }
}

Bytes encode_proof(const Proof& p) {
    ByteWriter w;
    write_proof(w, p);
    return std::move(w).take();
}

Proof por_prove(const TaggedFile& store, const Challenge& ch) {
    for (const auto& e : ch.entries) {
        if (e.index == 0 || e.index > store.size()) {
            throw UsageError("challenged index " + std::to_string(e.index) + " out of range");
        }
    }
    const auto& field = store.field();
    return std::visit(overloaded{
                          [&](const std::vector<Bytes>&) -> Proof {
                              JkProof jk;
                              for (const auto& e : ch.entries) {
                                  jk.items.push_back({store.block(e.index), store.tag_bytes(e.index)});
                              }
                              return jk;
                          },
                          [&](const std::vector<FieldElement>& tags) -> Proof {
                              auto sigma = FieldElement::zero(field);
                              auto mu = FieldElement::zero(field);
                              for (const auto& e : ch.entries) {
                                  sigma += e.coeff * tags.at(e.index - 1);
                                  mu += e.coeff * store.block(e.index);
                              }
                              return SwPrivateProof{sigma, mu};
                          },
                          [&](const std::vector<GroupElement>& tags) -> Proof {
                              auto sigma = store.group->identity();
                              auto mu = FieldElement::zero(field);
                              for (const auto& e : ch.entries) {
                                  sigma = sigma * tags.at(e.index - 1).pow(e.coeff);
                                  mu += e.coeff * store.block(e.index);
                              }
                              return SwPublicProof{sigma, mu};
                          },
                      },
                      store.tags);
}

namespace {

VerifyResult fail(std::string why) { return {false, std::move(why)}; }

VerifyResult verify_jk(const Challenge& ch, const JkProof& pr,
                       const std::function<bool(std::uint64_t, const BlockWithTag&)>& check) {
    if (pr.items.size() != ch.entries.size()) {
        return fail("proof has " + std::to_string(pr.items.size()) + " items for " +
                    std::to_string(ch.entries.size()) + " challenged blocks");
    }
    for (std::size_t k = 0; k < pr.items.size(); ++k) {
        if (!check(ch.entries[k].index, pr.items[k])) {
            return fail("tag mismatch at block " + std::to_string(ch.entries[k].index));
        }
    }
    return {true, {}};
}

}  // namespace

VerifyResult verify_public(const SwPublicParams& pub, const GroupPtr& group, const Challenge& ch,
                           const SwPublicProof& proof) {
    try {
        auto h = [&](std::uint64_t i) { return sw::index_hash(group, i); };
        if (sw::public_check(pub, group, h, ch, proof)) return {true, {}};
        return fail("pairing equation does not hold");
    } catch (const AlgebraError& e) {
        return fail(e.what());
    }
}

VerifyResult por_verify(const VerifierKey& key, const GroupPtr& group, const Challenge& ch, const Proof& proof) {
    const auto& field = group->scalars();
    try {
        return std::visit(
            overloaded{
                [&](const JkMacKeys& k) -> VerifyResult {
                    const auto* jk = std::get_if<JkProof>(&proof);
                    if (!jk) return fail("proof kind does not match key");
                    Mac mac(k.mac);
                    return verify_jk(ch, *jk, [&](std::uint64_t i, const BlockWithTag& it) {
                        return *it.block.field() == *field && mac.verify(jk_message(i, it.block), it.tag);
                    });
                },
                [&](const BlsPublicKey& k) -> VerifyResult {
                    const auto* jk = std::get_if<JkProof>(&proof);
                    if (!jk) return fail("proof kind does not match key");
                    return verify_jk(ch, *jk, [&](std::uint64_t i, const BlockWithTag& it) {
                        try {
                            return bls_verify(group, k.pk, jk_message(i, it.block), group->element_from_bytes(it.tag));
                        } catch (const DecodeError&) {
                            return false;
                        }
                    });
                },
                [&](const SwPrivateKeys& k) -> VerifyResult {
                    const auto* sp = std::get_if<SwPrivateProof>(&proof);
                    if (!sp) return fail("proof kind does not match key");
                    Prf h(k.prf, field);
                    auto hf = [&](std::uint64_t i) { return h(i); };
                    if (sw::private_check(k.alpha, hf, ch, *sp)) return {true, {}};
                    return fail("sigma != alpha * mu + sum nu_i h(i)");
                },
                [&](const SwPublicParams& k) -> VerifyResult {
                    const auto* sp = std::get_if<SwPublicProof>(&proof);
                    if (!sp) return fail("proof kind does not match key");
                    return verify_public(k, group, ch, *sp);
                },
            },
            key);
    } catch (const AlgebraError& e) {
        return fail(e.what());
    }
}

std::vector<BlockWithTag> StoreProver::fetch(std::span<const std::uint64_t> indices) {
    std::vector<BlockWithTag> out;
    out.reserve(indices.size());
    for (auto i : indices) {
        if (i == 0 || i > store_->size()) throw UsageError("fetch index " + std::to_string(i) + " out of range");
        out.push_back({store_->block(i), store_->tag_bytes(i)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sentinels

SentinelLayout::SentinelLayout(const SentinelKeys& keys, std::uint64_t file_blocks, std::uint64_t sentinels)
    : sentinels_(sentinels) {
    const auto total = file_blocks + sentinels;
    perm_.resize(total);
    for (std::uint64_t i = 0; i < total; ++i) perm_[i] = i;
    KeyedStream stream(keys.layout.bytes, "LAYOUT");
    for (std::uint64_t i = total; i > 1; --i) std::swap(perm_[i - 1], perm_[stream.uniform(i)]);
}

FieldElement sentinel_value(const SentinelKeys& keys, const FieldPtr& field, std::uint64_t j) {
    return prf_eval(keys.values, field, tagged_input("S", j));
}

namespace {
std::pair<FieldElement, FieldElement> pads_for(const SentinelKeys& keys, const FieldPtr& field, std::uint64_t i) {
    auto a = prf_eval(keys.pads, field, tagged_input("A", i));
    auto b = prf_eval(keys.pads, field, tagged_input("B", i));
    if (b.is_zero()) b = FieldElement::one(field);
    return {a, b};
}
}  // namespace

FieldElement sentinel_encrypt(const SentinelKeys& keys, const FieldElement& block, std::uint64_t i) {
    auto [a, b] = pads_for(keys, block.field(), i);
    return (block + a) * b;
}

FieldElement sentinel_decrypt(const SentinelKeys& keys, const FieldElement& stored, std::uint64_t i) {
    auto [a, b] = pads_for(keys, stored.field(), i);
    return stored * b.inverse() - a;
}

SentinelSetup sentinel_setup(ByteView file, const SentinelKeys& keys, const FieldPtr& field, CodeParams code,
                             std::uint64_t sentinels) {
    if (file.empty()) throw UsageError("cannot set up an empty file");
    if (sentinels == 0) throw UsageError("at least one sentinel is required");
    if (sentinels >= kSentinelCapacity) {
        throw UsageError("sentinel count must be below " + std::to_string(kSentinelCapacity));
    }
    auto encoded = FileCodec(field, code).encode(file);
    const std::uint64_t file_blocks = encoded.elements.size();
    SentinelLayout layout(keys, file_blocks, sentinels);

    std::vector<FieldElement> store(file_blocks + sentinels, FieldElement::zero(field));
    for (std::uint64_t i = 0; i < file_blocks; ++i) {
        store[layout.block_position(i)] = sentinel_encrypt(keys, encoded.elements[i], i);
    }
    for (std::uint64_t j = 0; j < sentinels; ++j) store[layout.sentinel_position(j)] = sentinel_value(keys, field, j);

    SentinelSetup out;
    out.store.scheme = Scheme::sentinel;
    out.store.group = BilinearGroup::transparent(field);
    out.store.container.header = encoded.header;
    out.store.container.header.extra_symbols = sentinels;
    out.store.container.field = field;
    out.store.container.elements = std::move(store);
    out.store.tags = std::vector<Bytes>{};
    out.store.file_id = out.store.compute_id();
    out.ledger = {out.store.file_id, sentinels, 0, file_blocks};
    return out;
}

bool sentinel_audit(SentinelLedger& ledger, const SentinelKeys& keys, const FieldPtr& field, std::uint64_t q,
                    Prover& prover) {
    if (q == 0) throw UsageError("an audit must check at least one sentinel");
    if (ledger.sentinels - ledger.next_unspent < q) {
        throw BudgetExhausted("sentinel budget exhausted: " + std::to_string(ledger.sentinels - ledger.next_unspent) +
                              " unspent, " + std::to_string(q) + " needed");
    }
    SentinelLayout layout(keys, ledger.file_blocks, ledger.sentinels);
    std::vector<std::uint64_t> positions;
    for (std::uint64_t j = ledger.next_unspent; j < ledger.next_unspent + q; ++j) {
        positions.push_back(layout.sentinel_position(j) + 1);
    }
    const auto first = ledger.next_unspent;
    ledger.next_unspent += q;
    auto got = prover.fetch(positions);
    if (got.size() != q) return false;
    for (std::uint64_t k = 0; k < q; ++k) {
        if (!(got[k].block == sentinel_value(keys, field, first + k))) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Extraction

std::string ExtractionResult::report() const {
    std::ostringstream out;
    if (data) {
        out << "recovered " << data->size() << " bytes; " << invalid_blocks << " blocks rejected";
        return out.str();
    }
    out << deficient.size() << " stripe(s) unrecoverable";
    for (const auto& d : deficient) {
        out << "\n  stripe " << d.stripe << ": ";
        if (d.inconsistent) {
            out << "symbols inconsistent";
        } else {
            out << d.valid << " valid of " << d.required << " required";
        }
    }
    return out.str();
}

namespace {

/// Authenticates one batch of fetched blocks. Returns per-item validity.
class BatchAuthenticator {
public:
    BatchAuthenticator(const ClientKeys& keys, const GroupPtr& group, Rng& rng, std::size_t& checks)
        : keys_(keys), group_(group), rng_(rng), checks_(checks) {}

    std::vector<bool> check(std::span<const std::uint64_t> indices, const std::vector<BlockWithTag>& items) {
        std::vector<bool> ok(items.size(), false);
        if (items.size() != indices.size()) return ok;
        const auto& field = group_->scalars();
        std::visit(overloaded{
                       [&](const JkMacKeys& k) {
                           Mac mac(k.mac);
                           for (std::size_t j = 0; j < items.size(); ++j) {
                               ++checks_;
                               ok[j] = *items[j].block.field() == *field &&
                                       mac.verify(jk_message(indices[j], items[j].block), items[j].tag);
                           }
                       },
                       [&](const JkBlsKeys& k) {
                           for (std::size_t j = 0; j < items.size(); ++j) {
                               ++checks_;
                               try {
                                   ok[j] = bls_verify(group_, k.keys.pk, jk_message(indices[j], items[j].block),
                                                      group_->element_from_bytes(items[j].tag));
                               } catch (const Error&) {
                               }
                           }
                       },
                       [&](const SwPrivateKeys& k) {
                           Prf h(k.prf, field);
                           std::vector<FieldElement> hs, tags;
                           std::vector<std::size_t> live;
                           for (std::size_t j = 0; j < items.size(); ++j) {
                               try {
                                   tags.push_back(FieldElement::from_bytes(field, items[j].tag));
                                   hs.push_back(h(indices[j]));
                                   live.push_back(j);
                               } catch (const DecodeError&) {
                               }
                           }
                           auto test = [&](std::span<const std::size_t> subset) {
                               ++checks_;
                               auto sigma = FieldElement::zero(field);
                               auto rhs = FieldElement::zero(field);
                               for (auto s : subset) {
                                   auto nu = FieldElement::random(field, rng_);
                                   sigma += nu * tags[s];
                                   rhs += nu * (hs[s] + k.alpha * items[live[s]].block);
                               }
                               return sigma == rhs;
                           };
                           bisect(live.size(), test, [&](std::size_t s) { ok[live[s]] = true; });
                       },
                       [&](const SwPublicKeys& k) {
                           std::vector<GroupElement> hs, tags;
                           std::vector<std::size_t> live;
                           for (std::size_t j = 0; j < items.size(); ++j) {
                               try {
                                   tags.push_back(group_->element_from_bytes(items[j].tag));
                                   hs.push_back(sw::index_hash(group_, indices[j]));
                                   live.push_back(j);
                               } catch (const DecodeError&) {
                               }
                           }
                           auto test = [&](std::span<const std::size_t> subset) {
                               ++checks_;
                               Challenge ch;
                               auto sigma = group_->identity();
                               auto mu = FieldElement::zero(field);
                               for (auto s : subset) {
                                   auto nu = FieldElement::random(field, rng_);
                                   sigma = sigma * tags[s].pow(nu);
                                   mu += nu * items[live[s]].block;
                                   ch.entries.push_back({indices[live[s]], nu});
                               }
                               std::map<std::uint64_t, std::size_t> at;
                               for (auto s : subset) at[indices[live[s]]] = s;
                               auto h = [&](std::uint64_t i) { return hs[at.at(i)]; };
                               return sw::public_check(k.pub, group_, h, ch, SwPublicProof{sigma, mu});
                           };
                           bisect(live.size(), test, [&](std::size_t s) { ok[live[s]] = true; });
                       },
                       [](const SentinelKeys&) {},
                   },
                   keys_);
        return ok;
    }

private:
    /// Marks every element of [0, n) accepted by `test`, splitting failing
    /// ranges in half down to single elements.
    template <class Test, class Accept>
    static void bisect(std::size_t n, Test& test, Accept accept) {
        std::vector<std::size_t> all(n);
        for (std::size_t j = 0; j < n; ++j) all[j] = j;
        std::vector<std::span<const std::size_t>> work;
        if (n > 0) work.emplace_back(all);
        while (!work.empty()) {
            auto range = work.back();
            work.pop_back();
            if (test(range)) {
                for (auto s : range) accept(s);
            } else if (range.size() > 1) {
                const auto half = range.size() / 2;
                work.push_back(range.subspan(0, half));
                work.push_back(range.subspan(half));
            }
        }
    }

    const ClientKeys& keys_;
    const GroupPtr& group_;
    Rng& rng_;
    std::size_t& checks_;
};

std::vector<BlockWithTag> fetch_with_retries(Prover& prover, std::span<const std::uint64_t> indices,
                                             std::size_t retries) {
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            return prover.fetch(indices);
        } catch (const TransportError&) {
            if (attempt >= retries) throw;
        }
    }
}

}  // namespace

ExtractionResult extract(Prover& prover, const ClientKeys& keys, const GroupPtr& group, const FileManifest& manifest,
                         const ExtractionPolicy& policy, Rng& rng) {
    if (policy.batch_size == 0) throw UsageError("batch size must be positive");
    if (!(policy.rho >= 0.0 && policy.rho <= 1.0)) throw UsageError("rho must lie in [0, 1]");
    if (key_scheme(keys) != manifest.scheme) throw UsageError("keys do not match the file's scheme");
    const auto& field = group->scalars();
    if (field->modulus() != manifest.header.prime) throw UsageError("group order does not match the file's field");

    const auto& h = manifest.header;
    const std::size_t n = h.n;
    const std::size_t f = h.f;
    const std::uint64_t coded = h.stripes * h.n;
    const std::uint64_t total = manifest.block_count();
    const std::size_t required =
        std::max<std::size_t>(f, static_cast<std::size_t>(std::ceil(policy.rho * static_cast<double>(n) - 1e-9)));

    ExtractionResult result;
    std::vector<FieldElement> symbols(coded, FieldElement::zero(field));
    std::vector<bool> valid(coded, false);
    const auto* sentinel = std::get_if<SentinelKeys>(&keys);
    std::optional<SentinelLayout> layout;
    std::vector<std::uint64_t> source_of;  // store position -> coded index, or UINT64_MAX for a sentinel
    if (sentinel) {
        layout.emplace(*sentinel, coded, h.extra_symbols);
        source_of.assign(total, UINT64_MAX);
        for (std::uint64_t i = 0; i < coded; ++i) source_of[layout->block_position(i)] = i;
    }

    BatchAuthenticator auth(keys, group, rng, result.checks);
    std::vector<std::uint64_t> indices;
    for (std::uint64_t start = 0; start < total; start += policy.batch_size) {
        indices.clear();
        for (std::uint64_t i = start; i < std::min<std::uint64_t>(total, start + policy.batch_size); ++i) {
            indices.push_back(i + 1);
        }
        auto items = fetch_with_retries(prover, indices, policy.max_retries);
        if (sentinel) {
            for (std::size_t j = 0; j < indices.size() && j < items.size(); ++j) {
                const auto src = source_of[indices[j] - 1];
                if (src == UINT64_MAX || !(*items[j].block.field() == *field)) continue;
                symbols[src] = sentinel_decrypt(*sentinel, items[j].block, src);
                valid[src] = true;
            }
            continue;
        }
        auto ok = auth.check(indices, items);
        for (std::size_t j = 0; j < indices.size(); ++j) {
            const auto i = indices[j] - 1;
            if (i >= coded) continue;
            if (ok[j]) {
                symbols[i] = items[j].block;
                valid[i] = true;
            } else {
                ++result.invalid_blocks;
            }
        }
    }

    FileCodec codec(field, manifest.code());
    std::vector<Codeword<FieldElement>> stripes;
    stripes.reserve(h.stripes);
    for (std::uint64_t s = 0; s < h.stripes; ++s) {
        Codeword<FieldElement> cw(
            std::vector<FieldElement>(symbols.begin() + static_cast<std::ptrdiff_t>(s * n),
                                      symbols.begin() + static_cast<std::ptrdiff_t>((s + 1) * n)));
        for (std::size_t k = 0; k < n; ++k) cw.present[k] = valid[s * n + k];
        const auto have = cw.present_count();
        if (have < required) {
            result.deficient.push_back({static_cast<std::size_t>(s), have, required});
        } else if (sentinel && !codec.code().consistent(cw)) {
            result.deficient.push_back({static_cast<std::size_t>(s), have, required, true});
        }
        stripes.push_back(std::move(cw));
    }
    if (result.deficient.empty()) result.data = codec.decode(h, stripes);
    return result;
}

}  // namespace por
