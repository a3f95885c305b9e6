#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "ciqa/errors.hpp"

// Little-endian binary primitives shared by the model and pyramid
// container formats.
namespace ciqa::io {

inline void write_u8(std::ostream& os, std::uint8_t v) {
    os.put(static_cast<char>(v));
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline void write_f64(std::ostream& os, double v) {
    write_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline void write_string(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint8_t read_u8(std::istream& is) {
    int c = is.get();
    if (c == EOF) throw IoError("unexpected end of stream");
    return static_cast<std::uint8_t>(c);
}

inline std::uint32_t read_u32(std::istream& is) {
    char b[4];
    if (!is.read(b, 4)) throw IoError("unexpected end of stream");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

inline std::uint64_t read_u64(std::istream& is) {
    char b[8];
    if (!is.read(b, 8)) throw IoError("unexpected end of stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

inline double read_f64(std::istream& is) {
    return std::bit_cast<double>(read_u64(is));
}

inline std::string read_string(std::istream& is) {
    const auto n = read_u32(is);
    std::string s(n, '\0');
    if (n > 0 && !is.read(s.data(), n)) throw IoError("unexpected end of stream");
    return s;
}

}  // namespace ciqa::io
