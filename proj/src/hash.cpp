#include "por/hash.hpp"

#include <algorithm>

namespace por {

Digest sha256(std::initializer_list<ByteView> parts) {
    SHA256_CTX ctx;
    SHA256_Init(&ctx);
    for (auto p : parts) SHA256_Update(&ctx, p.data(), p.size());
    Digest out;
    SHA256_Final(out.data(), &ctx);
    return out;
}

HmacSha256::HmacSha256(ByteView key) {
    std::array<std::uint8_t, SHA256_CBLOCK> block{};
    if (key.size() > block.size()) {
        auto d = sha256({key});
        std::copy(d.begin(), d.end(), block.begin());
    } else {
        std::copy(key.begin(), key.end(), block.begin());
    }
    std::array<std::uint8_t, SHA256_CBLOCK> ipad, opad;
    for (std::size_t i = 0; i < block.size(); ++i) {
        ipad[i] = block[i] ^ 0x36;
        opad[i] = block[i] ^ 0x5c;
    }
    SHA256_Init(&inner_);
    SHA256_Update(&inner_, ipad.data(), ipad.size());
    SHA256_Init(&outer_);
    SHA256_Update(&outer_, opad.data(), opad.size());
}

Digest HmacSha256::mac(std::initializer_list<ByteView> parts) const {
    SHA256_CTX ctx = inner_;
    for (auto p : parts) SHA256_Update(&ctx, p.data(), p.size());
    Digest inner;
    SHA256_Final(inner.data(), &ctx);
    ctx = outer_;
    SHA256_Update(&ctx, inner.data(), inner.size());
    Digest out;
    SHA256_Final(out.data(), &ctx);
    return out;
}

Digest keyed_hash(ByteView key, std::string_view domain, ByteView data) {
    const std::uint8_t len = static_cast<std::uint8_t>(domain.size());
    return HmacSha256(key).mac({ByteView(&len, 1), as_bytes(domain), data});
}

}  // namespace por
