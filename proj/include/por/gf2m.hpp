#pragma once

#include <array>
#include <cstdint>

namespace por {

/// GF(2^m), 1 <= m <= 8, via log/antilog tables over a fixed primitive
/// polynomial. alpha = x is the primitive element; elements are bit vectors
/// of polynomial coefficients (so for m = 2: 0, 1, alpha = 2, alpha^2 = 3).
class Gf2m {
public:
    using Element = std::uint8_t;

    explicit Gf2m(unsigned m);

    unsigned degree() const { return m_; }
    std::size_t order() const { return std::size_t{1} << m_; }

    Element zero() const { return 0; }
    Element one() const { return 1; }
    Element add(Element a, Element b) const { return a ^ b; }
    Element sub(Element a, Element b) const { return a ^ b; }
    Element mul(Element a, Element b) const;
    Element inv(Element a) const;
    /// alpha^k
    Element alpha_pow(unsigned k) const { return exp_[k % (order() - 1)]; }

    /// Distinct evaluation points: 0, 1, alpha, alpha^2, ...
    Element point(std::size_t i) const;
    std::size_t max_points() const { return order(); }

private:
    unsigned m_;
    std::array<Element, 512> exp_{};
    std::array<int, 256> log_{};
};

}  // namespace por
