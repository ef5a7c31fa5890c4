#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

#include <openssl/sha.h>

#include "por/bytes.hpp"

namespace por {

using Digest = std::array<std::uint8_t, 32>;

/// SHA-256 over the concatenation of `parts`.
Digest sha256(std::initializer_list<ByteView> parts);

/// HMAC-SHA256 with the key schedule computed once, so repeated evaluation
/// under one key costs two compressions plus the message.
class HmacSha256 {
public:
    explicit HmacSha256(ByteView key);

    Digest mac(std::initializer_list<ByteView> parts) const;

private:
    SHA256_CTX inner_;
    SHA256_CTX outer_;
};

/// The single keyed-hash primitive behind MACs, PRFs and hash-to-field.
/// `domain` separates uses of the same key.
Digest keyed_hash(ByteView key, std::string_view domain, ByteView data);

}  // namespace por
