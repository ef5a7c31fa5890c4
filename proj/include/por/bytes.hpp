#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace por {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Append-only serializer. Integers are written in the requested byte order,
/// fixed width.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16_le(std::uint16_t v) { put_le(v, 2); }
    void u32_le(std::uint32_t v) { put_le(v, 4); }
    void u64_le(std::uint64_t v) { put_le(v, 8); }
    void u16_be(std::uint16_t v) { put_be(v, 2); }
    void u32_be(std::uint32_t v) { put_be(v, 4); }
    void u64_be(std::uint64_t v) { put_be(v, 8); }
    void raw(ByteView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
    /// u32 big-endian length followed by the bytes.
    void blob(ByteView data);
    void str(std::string_view s) { blob(as_bytes(s)); }

    const Bytes& bytes() const& { return buf_; }
    Bytes take() && { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    void put_le(std::uint64_t v, int width);
    void put_be(std::uint64_t v, int width);

    Bytes buf_;
};

/// Bounds-checked reader over a byte span; throws DecodeError on underrun.
class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16_le() { return static_cast<std::uint16_t>(get_le(2)); }
    std::uint32_t u32_le() { return static_cast<std::uint32_t>(get_le(4)); }
    std::uint64_t u64_le() { return get_le(8); }
    std::uint16_t u16_be() { return static_cast<std::uint16_t>(get_be(2)); }
    std::uint32_t u32_be() { return static_cast<std::uint32_t>(get_be(4)); }
    std::uint64_t u64_be() { return get_be(8); }
    ByteView raw(std::size_t n);
    Bytes blob();
    std::string str();

    std::size_t remaining() const { return data_.size() - pos_; }
    bool empty() const { return remaining() == 0; }
    /// Throws unless every byte was consumed.
    void expect_end() const;

private:
    std::uint64_t get_le(int width);
    std::uint64_t get_be(int width);

    ByteView data_;
    std::size_t pos_ = 0;
};

}  // namespace por
