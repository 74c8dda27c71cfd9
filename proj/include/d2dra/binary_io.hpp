// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "d2dra/errors.hpp"

namespace d2dra::binary {

template <typename UInt>
void write_le(std::ostream& out, UInt v)
{
    std::array<char, sizeof(UInt)> bytes{};
    for (std::size_t i = 0; i < sizeof(UInt); ++i)
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt read_le(std::istream& in)
{
    std::array<unsigned char, sizeof(UInt)> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
        throw FormatError("unexpected end of file");
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i)
        v |= static_cast<UInt>(bytes[i]) << (8 * i);
    return v;
}

inline void write_f64(std::ostream& out, double v)
{
    write_le(out, std::bit_cast<std::uint64_t>(v));
}

inline double read_f64(std::istream& in)
{
    return std::bit_cast<double>(read_le<std::uint64_t>(in));
}

inline void write_magic(std::ostream& out, std::span<const char, 8> magic)
{
    out.write(magic.data(), 8);
}

inline void expect_magic(std::istream& in, std::span<const char, 8> magic, const std::string& what)
{
    std::array<char, 8> got{};
    if (!in.read(got.data(), 8) || !std::equal(got.begin(), got.end(), magic.begin()))
        throw FormatError("bad magic: not a " + what);
}

/// FNV-1a 64-bit digest of a byte range.
inline std::uint64_t fnv1a(std::span<const char> bytes, std::uint64_t h = 0xcbf29ce484222325ULL)
{
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t file_checksum(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames over `path` on success.
void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

}  // namespace d2dra::binary
