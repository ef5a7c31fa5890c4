#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "por/algebra.hpp"
#include "por/error.hpp"
#include "por/gf2m.hpp"

namespace por {

/// Field interface the Reed-Solomon code is generic over.
template <class F>
concept CodeField = requires(const F& f, const typename F::Element& a, std::size_t i) {
    { f.zero() } -> std::convertible_to<typename F::Element>;
    { f.one() } -> std::convertible_to<typename F::Element>;
    { f.add(a, a) } -> std::convertible_to<typename F::Element>;
    { f.sub(a, a) } -> std::convertible_to<typename F::Element>;
    { f.mul(a, a) } -> std::convertible_to<typename F::Element>;
    { f.inv(a) } -> std::convertible_to<typename F::Element>;
    { f.point(i) } -> std::convertible_to<typename F::Element>;
    { f.max_points() } -> std::convertible_to<std::size_t>;
};

/// Z_p adapter; evaluation points are 1, 2, ..., n.
class PrimeCodeField {
public:
    using Element = FieldElement;

    explicit PrimeCodeField(FieldPtr f) : field_(std::move(f)) {}

    const FieldPtr& field() const { return field_; }
    Element zero() const { return FieldElement::zero(field_); }
    Element one() const { return FieldElement::one(field_); }
    Element add(const Element& a, const Element& b) const { return a + b; }
    Element sub(const Element& a, const Element& b) const { return a - b; }
    Element mul(const Element& a, const Element& b) const { return a * b; }
    Element inv(const Element& a) const { return a.inverse(); }
    Element point(std::size_t i) const { return {field_, static_cast<std::uint64_t>(i + 1)}; }
    std::size_t max_points() const;

private:
    FieldPtr field_;
};

static_assert(CodeField<PrimeCodeField>);
static_assert(CodeField<Gf2m>);

/// (n, f, d) code parameters. Only MDS codes (d = n - f + 1) are accepted.
struct CodeParams {
    std::size_t n = 0;
    std::size_t f = 0;

    CodeParams() = default;
    CodeParams(std::size_t n_, std::size_t f_);
    CodeParams(std::size_t n_, std::size_t f_, std::size_t d_);

    std::size_t d() const { return n - f + 1; }
    double rate() const { return static_cast<double>(f) / static_cast<double>(n); }
    bool operator==(const CodeParams&) const = default;
};

template <class E>
struct Codeword {
    std::vector<E> symbols;
    std::vector<bool> present;

    explicit Codeword(std::vector<E> s) : symbols(std::move(s)), present(symbols.size(), true) {}

    std::size_t size() const { return symbols.size(); }
    std::size_t present_count() const { return static_cast<std::size_t>(std::count(present.begin(), present.end(), true)); }
    void erase(std::size_t i) { present.at(i) = false; }
};

namespace detail {

/// Montgomery batch inversion: one field inversion for the whole span.
template <CodeField F>
void batch_invert(const F& field, std::vector<typename F::Element>& xs) {
    if (xs.empty()) return;
    std::vector<typename F::Element> prefix;
    prefix.reserve(xs.size());
    auto acc = field.one();
    for (const auto& x : xs) {
        prefix.push_back(acc);
        acc = field.mul(acc, x);
    }
    auto inv = field.inv(acc);
    for (std::size_t i = xs.size(); i-- > 0;) {
        auto xi = xs[i];
        xs[i] = field.mul(inv, prefix[i]);
        inv = field.mul(inv, xi);
    }
}

/// Lagrange interpolation through (nodes[k], values[k]), evaluated at each
/// of `targets`. No target may coincide with a node.
template <CodeField F>
std::vector<typename F::Element> interpolate(const F& field, const std::vector<typename F::Element>& nodes,
                                             const std::vector<typename F::Element>& values,
                                             const std::vector<typename F::Element>& targets) {
    using E = typename F::Element;
    const std::size_t k = nodes.size();
    // Barycentric weights w_j = 1 / prod_{t != j} (x_j - x_t).
    std::vector<E> weights;
    weights.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        auto prod = field.one();
        for (std::size_t t = 0; t < k; ++t) {
            if (t != j) prod = field.mul(prod, field.sub(nodes[j], nodes[t]));
        }
        weights.push_back(prod);
    }
    batch_invert(field, weights);

    std::vector<E> out;
    out.reserve(targets.size());
    std::vector<E> diffs;
    for (const auto& x : targets) {
        diffs.clear();
        auto ell = field.one();
        for (std::size_t j = 0; j < k; ++j) {
            diffs.push_back(field.sub(x, nodes[j]));
            ell = field.mul(ell, diffs.back());
        }
        batch_invert(field, diffs);
        auto sum = field.zero();
        for (std::size_t j = 0; j < k; ++j) {
            sum = field.add(sum, field.mul(field.mul(weights[j], values[j]), diffs[j]));
        }
        out.push_back(field.mul(ell, sum));
    }
    return out;
}

}  // namespace detail

/// Systematic Reed-Solomon code: the message is the value of a polynomial of
/// degree < f at points x_1..x_f, and parity symbols are its values at
/// x_{f+1}..x_n. Decoding interpolates from any f surviving symbols.
template <CodeField F>
class ReedSolomon {
public:
    using Element = typename F::Element;

    ReedSolomon(F field, CodeParams params) : field_(std::move(field)), params_(params) {
        if (params_.n > field_.max_points()) {
            throw UsageError("code length " + std::to_string(params_.n) + " exceeds distinct field points");
        }
        for (std::size_t i = 0; i < params_.n; ++i) points_.push_back(field_.point(i));
        if constexpr (kPrime) {
            build_prime_tables();
        } else {
            build_parity_matrix();
        }
    }

    const F& field() const { return field_; }
    const CodeParams& params() const { return params_; }

    Codeword<Element> encode(std::span<const Element> message) const {
        if (message.size() != params_.f) {
            throw UsageError("message has " + std::to_string(message.size()) + " symbols, expected " +
                             std::to_string(params_.f));
        }
        std::vector<Element> out(message.begin(), message.end());
        out.reserve(params_.n);
        if constexpr (kPrime) {
            encode_prime(message, out);
            return Codeword<Element>(std::move(out));
        }
        for (const auto& row : parity_) {
            auto acc = field_.zero();
            for (std::size_t k = 0; k < params_.f; ++k) acc = field_.add(acc, field_.mul(row[k], message[k]));
            out.push_back(acc);
        }
        return Codeword<Element>(std::move(out));
    }

    /// Recovers the f message symbols. Throws UnrecoverableError carrying the
    /// deficit when fewer than f symbols are present.
    std::vector<Element> decode(const Codeword<Element>& cw) const {
        if (cw.size() != params_.n || cw.present.size() != params_.n) throw UsageError("codeword has wrong length");
        const std::size_t have = cw.present_count();
        if (have < params_.f) {
            throw UnrecoverableError(params_.f - have, "codeword has " + std::to_string(have) + " of " +
                                                           std::to_string(params_.f) + " required symbols");
        }
        std::vector<Element> message(cw.symbols.begin(), cw.symbols.begin() + static_cast<std::ptrdiff_t>(params_.f));
        std::vector<std::size_t> missing;
        for (std::size_t i = 0; i < params_.f; ++i) {
            if (!cw.present[i]) missing.push_back(i);
        }
        if (missing.empty()) return message;

        if constexpr (kPrime) {
            decode_prime(cw, missing, message);
            return message;
        }
        // Any f present positions determine the polynomial; take systematic ones first.
        std::vector<Element> nodes, values;
        for (std::size_t i = 0; i < params_.n && nodes.size() < params_.f; ++i) {
            if (cw.present[i]) {
                nodes.push_back(points_[i]);
                values.push_back(cw.symbols[i]);
            }
        }
        std::vector<Element> targets;
        for (auto i : missing) targets.push_back(points_[i]);
        auto recovered = detail::interpolate(field_, nodes, values, targets);
        for (std::size_t j = 0; j < missing.size(); ++j) message[missing[j]] = recovered[j];
        return message;
    }

    /// True iff every present symbol lies on the polynomial through the
    /// first f present ones (detects, but cannot locate, corruption).
    bool consistent(const Codeword<Element>& cw) const {
        auto message = decode(cw);
        auto full = encode(message);
        for (std::size_t i = 0; i < params_.n; ++i) {
            if (cw.present[i] && !(cw.symbols[i] == full.symbols[i])) return false;
        }
        return true;
    }

private:
    static constexpr bool kPrime = std::is_same_v<F, PrimeCodeField>;

    /// Points are 1..n, so every difference x_j - x_a is a small integer and
    /// the barycentric weights are signed inverse factorials. The parity map
    /// becomes a Toeplitz product needing O(n) stored values.
    void build_prime_tables() {
        const auto& p = field_.field()->modulus();
        const std::size_t n = params_.n, k = params_.f;
        std::vector<mpz_class> fact(n + 1), inv_fact(n + 1);
        fact[0] = 1;
        for (std::size_t i = 1; i <= n; ++i) fact[i] = fact[i - 1] * static_cast<unsigned long>(i) % p;
        mpz_invert(inv_fact[n].get_mpz_t(), fact[n].get_mpz_t(), p.get_mpz_t());
        for (std::size_t i = n; i > 0; --i) inv_fact[i - 1] = inv_fact[i] * static_cast<unsigned long>(i) % p;
        inv_.assign(n, 0);
        for (std::size_t d = 1; d < n; ++d) inv_[d] = fact[d - 1] * inv_fact[d] % p;
        for (std::size_t a = 0; a < k; ++a) {
            mpz_class w = inv_fact[a] * inv_fact[k - 1 - a] % p;
            if ((k - 1 - a) % 2 == 1 && w != 0) w = p - w;
            weights_.push_back(std::move(w));
        }
        for (std::size_t j = k; j < n; ++j) ell_.push_back(fact[j] * inv_fact[j - k] % p);
    }

    void encode_prime(std::span<const Element> message, std::vector<Element>& out) const {
        const auto& fp = field_.field();
        const auto& p = fp->modulus();
        const std::size_t k = params_.f;
        std::vector<mpz_class> c(k);
        for (std::size_t a = 0; a < k; ++a) {
            if (!(*message[a].field() == *fp)) throw AlgebraError("message symbol from another field");
            c[a] = weights_[a] * message[a].value() % p;
        }
        mpz_class acc;
        for (std::size_t j = k; j < params_.n; ++j) {
            acc = 0;
            for (std::size_t a = 0; a < k; ++a) mpz_addmul(acc.get_mpz_t(), c[a].get_mpz_t(), inv_[j - a].get_mpz_t());
            acc %= p;
            acc *= ell_[j - k];
            out.emplace_back(fp, mpz_class(acc % p));
        }
    }

    /// Barycentric interpolation with integer points: node differences are
    /// small integers, so weights are products of machine words and 1/d comes
    /// from the inverse table.
    void decode_prime(const Codeword<Element>& cw, const std::vector<std::size_t>& missing,
                      std::vector<Element>& message) const {
        const auto& fp = field_.field();
        const auto& p = fp->modulus();
        const std::size_t k = params_.f;
        std::vector<long> xs;
        std::vector<const mpz_class*> vs;
        for (std::size_t i = 0; i < params_.n && xs.size() < k; ++i) {
            if (!cw.present[i]) continue;
            if (!(*cw.symbols[i].field() == *fp)) throw AlgebraError("codeword symbol from another field");
            xs.push_back(static_cast<long>(i + 1));
            vs.push_back(&cw.symbols[i].value());
        }
        // c_j = v_j / prod_{t != j} (x_j - x_t), one inversion for all j.
        std::vector<mpz_class> denom(k), prefix(k);
        mpz_class acc = 1;
        for (std::size_t j = 0; j < k; ++j) {
            mpz_class d = 1;
            for (std::size_t t = 0; t < k; ++t) {
                if (t != j) mpz_mul_si(d.get_mpz_t(), d.get_mpz_t(), xs[j] - xs[t]);
            }
            mpz_mod(denom[j].get_mpz_t(), d.get_mpz_t(), p.get_mpz_t());
            prefix[j] = acc;
            acc = acc * denom[j] % p;
        }
        mpz_class inv;
        if (mpz_invert(inv.get_mpz_t(), acc.get_mpz_t(), p.get_mpz_t()) == 0) throw AlgebraError("zero denominator");
        std::vector<mpz_class> c(k);
        for (std::size_t j = k; j-- > 0;) {
            c[j] = inv * prefix[j] % p;
            inv = inv * denom[j] % p;
            c[j] = c[j] * *vs[j] % p;
        }
        mpz_class sum, ell, neg;
        for (auto m : missing) {
            const long x = static_cast<long>(m + 1);
            sum = 0;
            ell = 1;
            for (std::size_t j = 0; j < k; ++j) {
                const long d = x - xs[j];
                mpz_mul_si(ell.get_mpz_t(), ell.get_mpz_t(), d);
                if (d > 0) {
                    mpz_addmul(sum.get_mpz_t(), c[j].get_mpz_t(), inv_[static_cast<std::size_t>(d)].get_mpz_t());
                } else {
                    mpz_submul(sum.get_mpz_t(), c[j].get_mpz_t(), inv_[static_cast<std::size_t>(-d)].get_mpz_t());
                }
            }
            mpz_mod(sum.get_mpz_t(), sum.get_mpz_t(), p.get_mpz_t());
            mpz_mod(ell.get_mpz_t(), ell.get_mpz_t(), p.get_mpz_t());
            message[m] = Element(fp, mpz_class(sum * ell % p));
        }
    }

    void build_parity_matrix() {
        const std::size_t k = params_.f;
        // Barycentric weights over the systematic points, then row j holds the
        // Lagrange basis values L_k(x_{f+j}) so that parity_j = sum_k L_k * m_k.
        std::vector<Element> weights;
        weights.reserve(k);
        for (std::size_t a = 0; a < k; ++a) {
            auto prod = field_.one();
            for (std::size_t b = 0; b < k; ++b) {
                if (a != b) prod = field_.mul(prod, field_.sub(points_[a], points_[b]));
            }
            weights.push_back(prod);
        }
        detail::batch_invert(field_, weights);
        for (std::size_t j = k; j < params_.n; ++j) {
            const auto& x = points_[j];
            std::vector<Element> row;
            row.reserve(k);
            auto ell = field_.one();
            for (std::size_t a = 0; a < k; ++a) {
                row.push_back(field_.sub(x, points_[a]));
                ell = field_.mul(ell, row.back());
            }
            detail::batch_invert(field_, row);
            for (std::size_t a = 0; a < k; ++a) row[a] = field_.mul(ell, field_.mul(weights[a], row[a]));
            parity_.push_back(std::move(row));
        }
    }

    F field_;
    CodeParams params_;
    std::vector<Element> points_;
    std::vector<std::vector<Element>> parity_;
    std::vector<mpz_class> inv_, weights_, ell_;
};

/// Blocks partitioned into stripes of f symbols; the last stripe is padded
/// with `pad`. `length` is the unpadded block count.
template <class E>
struct Striped {
    std::vector<std::vector<E>> stripes;
    std::size_t length = 0;
};

template <class E>
Striped<E> stripe_blocks(std::span<const E> blocks, std::size_t f, const E& pad) {
    if (f == 0) throw UsageError("stripe width must be positive");
    Striped<E> out;
    out.length = blocks.size();
    for (std::size_t i = 0; i < blocks.size(); i += f) {
        std::vector<E> s(blocks.begin() + static_cast<std::ptrdiff_t>(i),
                         blocks.begin() + static_cast<std::ptrdiff_t>(std::min(blocks.size(), i + f)));
        s.resize(f, pad);
        out.stripes.push_back(std::move(s));
    }
    return out;
}

template <class E>
std::vector<E> unstripe(const Striped<E>& s) {
    std::vector<E> out;
    for (const auto& stripe : s.stripes) out.insert(out.end(), stripe.begin(), stripe.end());
    if (out.size() < s.length) throw DecodeError("stripes shorter than recorded length");
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(s.length), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Byte files over Z_p.

/// Splits bytes into payload_bytes()-sized chunks, each packed into one
/// field element (the last chunk zero-padded on the right).
std::vector<FieldElement> bytes_to_blocks(const FieldPtr& field, ByteView data);
Bytes blocks_to_bytes(std::span<const FieldElement> blocks, std::size_t byte_length);

enum class FieldId : std::uint8_t { prime = 1, binary = 2 };

/// On-disk header of an encoded file:
///   "PORK" | version u8 | field id u8 | (u16 width, p big-endian) or (u8 m) |
///   f u32 | n u32 | stripe count u64 | original byte length u64 |
///   symbol width u16 | extra symbols u64
/// Integers are little-endian. The last two fields describe symbols made of
/// several elements and trailing symbols outside the stripes.
struct ContainerHeader {
    static constexpr std::uint8_t kVersion = 1;

    FieldId field_id = FieldId::prime;
    mpz_class prime;
    unsigned m = 0;
    std::uint32_t f = 0;
    std::uint32_t n = 0;
    std::uint64_t stripes = 0;
    std::uint64_t original_length = 0;
    std::uint16_t symbol_width = 1;
    std::uint64_t extra_symbols = 0;

    std::uint64_t element_count() const { return (stripes * n + extra_symbols) * symbol_width; }
    void write(ByteWriter& w) const;
    static ContainerHeader read(ByteReader& r);
};

/// Prime-field container: header plus its elements in order.
struct Container {
    ContainerHeader header;
    FieldPtr field;
    std::vector<FieldElement> elements;

    Bytes serialize() const;
    static Container parse(ByteView data);
    /// Reads header and elements from `r` without requiring end of input.
    static Container read(ByteReader& r);
};

/// Striped encoder/decoder for byte files.
class FileCodec {
public:
    FileCodec(FieldPtr field, CodeParams params);

    const FieldPtr& field() const { return field_; }
    const CodeParams& params() const { return code_.params(); }
    const ReedSolomon<PrimeCodeField>& code() const { return code_; }

    /// Bytes -> blocks -> stripes of f -> codewords of n, concatenated.
    Container encode(ByteView data) const;
    /// Inverse of encode, from per-stripe codewords with erasures. Throws
    /// UnrecoverableError naming the first deficient stripe.
    Bytes decode(const ContainerHeader& header, const std::vector<Codeword<FieldElement>>& stripes) const;

private:
    FieldPtr field_;
    ReedSolomon<PrimeCodeField> code_;
};

}  // namespace por
