#include "por/bytes.hpp"

#include "por/error.hpp"

namespace por {

std::string to_hex(ByteView data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

namespace {
int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DecodeError("invalid hex digit");
}
}  // namespace

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw DecodeError("odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    }
    return out;
}

void ByteWriter::blob(ByteView data) {
    u32_be(static_cast<std::uint32_t>(data.size()));
    raw(data);
}

void ByteWriter::put_le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_be(std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

ByteView ByteReader::raw(std::size_t n) {
    if (n > remaining()) throw DecodeError("truncated input");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

Bytes ByteReader::blob() {
    auto n = u32_be();
    auto v = raw(n);
    return {v.begin(), v.end()};
}

std::string ByteReader::str() {
    auto v = raw(u32_be());
    return {v.begin(), v.end()};
}

void ByteReader::expect_end() const {
    if (!empty()) throw DecodeError("trailing bytes");
}

std::uint64_t ByteReader::get_le(int width) {
    auto v = raw(static_cast<std::size_t>(width));
    std::uint64_t out = 0;
    for (int i = width - 1; i >= 0; --i) out = out << 8 | v[static_cast<std::size_t>(i)];
    return out;
}

std::uint64_t ByteReader::get_be(int width) {
    auto v = raw(static_cast<std::size_t>(width));
    std::uint64_t out = 0;
    for (auto b : v) out = out << 8 | b;
    return out;
}

}  // namespace por
