#include "por/gf2m.hpp"

#include "por/error.hpp"

namespace por {

namespace {
// Primitive polynomials, indexed by degree.
constexpr unsigned kPrimitive[9] = {0, 0x3, 0x7, 0xb, 0x13, 0x25, 0x43, 0x89, 0x11d};
}  // namespace

Gf2m::Gf2m(unsigned m) : m_(m) {
    if (m < 1 || m > 8) throw UsageError("GF(2^m) supports 1 <= m <= 8");
    const unsigned n = (1u << m) - 1;
    unsigned x = 1;
    for (unsigned i = 0; i < n; ++i) {
        exp_[i] = static_cast<Element>(x);
        log_[x] = static_cast<int>(i);
        x <<= 1;
        if (x & (1u << m)) x ^= kPrimitive[m];
    }
    for (unsigned i = n; i < exp_.size(); ++i) exp_[i] = exp_[i - n];
}

Gf2m::Element Gf2m::mul(Element a, Element b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[static_cast<std::size_t>(log_[a] + log_[b])];
}

Gf2m::Element Gf2m::inv(Element a) const {
    if (a == 0) throw AlgebraError("inverse of zero");
    const int n = static_cast<int>(order()) - 1;
    return exp_[static_cast<std::size_t>((n - log_[a]) % n)];
}

Gf2m::Element Gf2m::point(std::size_t i) const {
    if (i >= order()) throw UsageError("not enough distinct field elements");
    return i == 0 ? Element{0} : alpha_pow(static_cast<unsigned>(i - 1));
}

}  // namespace por
