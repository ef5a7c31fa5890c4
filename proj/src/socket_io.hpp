#pragma once

#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>

#include "por/bytes.hpp"
#include "por/error.hpp"

namespace por::net {

/// Reads exactly `n` bytes. Returns false on a clean end of stream before
/// the first byte when `allow_eof`; throws TransportError otherwise.
inline bool read_exact(int fd, std::uint8_t* out, std::size_t n, bool allow_eof) {
    std::size_t got = 0;
    while (got < n) {
        const auto r = ::recv(fd, out + got, n - got, 0);
        if (r == 0) {
            if (got == 0 && allow_eof) return false;
            throw TransportError("connection closed");
        }
        if (r < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("timed out");
            throw TransportError(std::string("receive failed: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

inline void write_all(int fd, ByteView data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const auto r = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (r < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("timed out");
            throw TransportError(std::string("send failed: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(r);
    }
}

}  // namespace por::net
