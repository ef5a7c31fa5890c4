#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace por {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or precondition violation by the caller.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed serialized data.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// Field/group misuse: inverting zero, mixing moduli or pairing contexts.
class AlgebraError : public Error {
public:
    using Error::Error;
};

/// Too few symbols survive to decode a codeword.
class UnrecoverableError : public Error {
public:
    UnrecoverableError(std::size_t deficit, const std::string& what)
        : Error(what), deficit_(deficit) {}
    std::size_t deficit() const { return deficit_; }

private:
    std::size_t deficit_;
};

/// Data returned by a server failed authentication.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Sentinel audits exhausted.
class BudgetExhausted : public Error {
public:
    using Error::Error;
};

/// Network or I/O failure talking to a server. Never a verification result.
class TransportError : public Error {
public:
    using Error::Error;
};

/// The server answered with an ERROR frame.
class RemoteError : public Error {
public:
    using Error::Error;
};

}  // namespace por
