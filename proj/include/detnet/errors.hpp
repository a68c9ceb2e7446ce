#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace detnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A network description violates a structural invariant.
class InvalidNetwork : public Error {
public:
    using Error::Error;
};

/// An argument is outside the operation's domain.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An exhaustive search would exceed its configured cap.  `required()` is the
/// size the search would have needed.
class CapExceeded : public Error {
public:
    CapExceeded(std::string what, std::uint64_t required, std::uint64_t cap)
        : Error(what + ": requires " + std::to_string(required) + " > cap " + std::to_string(cap)),
          required_(required),
          cap_(cap) {}

    std::uint64_t required() const noexcept { return required_; }
    std::uint64_t cap() const noexcept { return cap_; }

private:
    std::uint64_t required_;
    std::uint64_t cap_;
};

}  // namespace detnet
