#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace docpretext {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / OS failures (missing file, unwritable directory).
struct IoError : Error {
  using Error::Error;
};

// A file exists but its contents cannot be parsed.
struct DecodeError : Error {
  using Error::Error;
};

// An argument violates an operation's precondition.
struct DomainError : Error {
  using Error::Error;
};

// A rect or index reaches outside its container.
struct BoundsError : DomainError {
  using DomainError::DomainError;
};

// A key or value is absent from a lookup structure.
struct LookupError : Error {
  using Error::Error;
};

// Bad configuration: unknown key, type mismatch, unknown task tag.
struct ConfigError : Error {
  using Error::Error;
};

// Request outside the supported parameter range (e.g. n_cells > 9).
struct UnsupportedError : Error {
  using Error::Error;
};

// An API was called with resources belonging to a different task.
struct ContractError : Error {
  using Error::Error;
};

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
  return fnv1a64(s.data(), s.size(), h);
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace docpretext
