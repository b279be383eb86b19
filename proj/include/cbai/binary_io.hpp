#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "cbai/error.hpp"

namespace cbai::binio {

// Little-endian encoders independent of host byte order.
template <typename U>
void put_uint(std::ostream& out, U value) {
    char bytes[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
    }
    out.write(bytes, sizeof(U));
}

template <typename U>
U get_uint(std::istream& in) {
    unsigned char bytes[sizeof(U)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(U));
    if (!in) throw Error(ErrorCode::IoError, "truncated binary stream");
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        value |= static_cast<U>(bytes[i]) << (8 * i);
    }
    return value;
}

inline void put_f32(std::ostream& out, float v) { put_uint(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_uint(out, std::bit_cast<std::uint64_t>(v)); }
inline float get_f32(std::istream& in) { return std::bit_cast<float>(get_uint<std::uint32_t>(in)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_uint<std::uint64_t>(in)); }

// Magic strings are written as exactly 8 bytes, NUL padded.
inline void put_magic(std::ostream& out, std::string_view magic) {
    char bytes[8] = {};
    std::memcpy(bytes, magic.data(), std::min<std::size_t>(magic.size(), 8));
    out.write(bytes, 8);
}

inline void expect_magic(std::istream& in, std::string_view magic) {
    char bytes[8] = {};
    in.read(bytes, 8);
    if (!in || std::string_view(bytes, std::min<std::size_t>(magic.size(), 8)) != magic) {
        throw Error(ErrorCode::ParseError, "bad magic, expected " + std::string(magic));
    }
}

}  // namespace cbai::binio
