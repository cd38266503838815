#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "avsr/error.hpp"

// Little-endian primitives shared by the CTCGRID1 and FEATSEQ1 containers.
namespace avsr::binary {

template <typename UInt>
inline void write_le(std::ostream& os, UInt value) {
  std::array<char, sizeof(UInt)> bytes{};
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  os.write(bytes.data(), bytes.size());
}

template <typename UInt>
inline UInt read_le(std::istream& is) {
  std::array<unsigned char, sizeof(UInt)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!is) throw Error(ErrorCode::kParseError, "unexpected end of binary stream");
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    value |= static_cast<UInt>(bytes[i]) << (8 * i);
  }
  return value;
}

inline void write_f64(std::ostream& os, double value) {
  write_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(value));
}

inline double read_f64(std::istream& is) {
  return std::bit_cast<double>(read_le<std::uint64_t>(is));
}

inline void write_magic(std::ostream& os, std::string_view magic) {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& is, std::string_view magic) {
  std::string got(magic.size(), '\0');
  is.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (!is || got != magic) {
    throw Error(ErrorCode::kParseError, "bad magic, expected " + std::string(magic));
  }
}

}  // namespace avsr::binary
