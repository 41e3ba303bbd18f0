#pragma once
// Little-endian stream helpers shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace unic::io {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!os) throw std::runtime_error("I/O failure while writing");
}

inline void get_bytes(std::istream& is, void* p, std::size_t n, const char* what) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) {
        throw std::runtime_error(std::string("truncated payload: ") + what);
    }
}

inline void write_u8(std::ostream& os, std::uint8_t v) { put_bytes(os, &v, 1); }

inline void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {
        static_cast<unsigned char>(v),
        static_cast<unsigned char>(v >> 8),
        static_cast<unsigned char>(v >> 16),
        static_cast<unsigned char>(v >> 24),
    };
    put_bytes(os, b, 4);
}

inline void write_i32(std::ostream& os, std::int32_t v) {
    write_u32(os, static_cast<std::uint32_t>(v));
}

inline void write_f32(std::ostream& os, float v) {
    write_u32(os, std::bit_cast<std::uint32_t>(v));
}

inline std::uint8_t read_u8(std::istream& is, const char* what) {
    std::uint8_t v;
    get_bytes(is, &v, 1, what);
    return v;
}

inline std::uint32_t read_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    get_bytes(is, b, 4, what);
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
           std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

inline std::int32_t read_i32(std::istream& is, const char* what) {
    return static_cast<std::int32_t>(read_u32(is, what));
}

inline float read_f32(std::istream& is, const char* what) {
    return std::bit_cast<float>(read_u32(is, what));
}

// Bulk f32/i32 block IO. On little-endian hosts the payload is memcpy'd.
inline void write_f32_block(std::ostream& os, const float* p, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        put_bytes(os, p, count * 4);
    } else {
        for (std::size_t i = 0; i < count; ++i) write_f32(os, p[i]);
    }
}

inline void read_f32_block(std::istream& is, float* p, std::size_t count, const char* what) {
    if constexpr (std::endian::native == std::endian::little) {
        get_bytes(is, p, count * 4, what);
    } else {
        for (std::size_t i = 0; i < count; ++i) p[i] = read_f32(is, what);
    }
}

inline void write_i32_block(std::ostream& os, const std::int32_t* p, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        put_bytes(os, p, count * 4);
    } else {
        for (std::size_t i = 0; i < count; ++i) write_i32(os, p[i]);
    }
}

inline void read_i32_block(std::istream& is, std::int32_t* p, std::size_t count, const char* what) {
    if constexpr (std::endian::native == std::endian::little) {
        get_bytes(is, p, count * 4, what);
    } else {
        for (std::size_t i = 0; i < count; ++i) p[i] = read_i32(is, what);
    }
}

}  // namespace unic::io
