#pragma once
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "gscl/errors.hpp"

// Little-endian primitive IO shared by the dataset and checkpoint formats.
// Explicit byte order so files travel across platforms.

namespace gscl::io {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!os) throw IoError("write failed");
}

inline void read_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw TruncationError("file ends before declared payload");
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
    std::array<unsigned char, 4> b;
    for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xFF;
    write_bytes(os, b.data(), 4);
}

inline std::uint32_t read_u32(std::istream& is) {
    std::array<unsigned char, 4> b;
    read_bytes(is, b.data(), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
    return v;
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    std::array<unsigned char, 8> b;
    for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xFF;
    write_bytes(os, b.data(), 8);
}

inline std::uint64_t read_u64(std::istream& is) {
    std::array<unsigned char, 8> b;
    read_bytes(is, b.data(), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

inline void write_f64(std::ostream& os, double d) {
    write_u64(os, std::bit_cast<std::uint64_t>(d));
}

inline double read_f64(std::istream& is) {
    return std::bit_cast<double>(read_u64(is));
}

}  // namespace gscl::io
