// Copyright 2026-present the vwsearch project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Little-endian primitive encoding shared by every on-disk format.

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "vws/errors.h"

namespace vws::binio {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    }
    out.write(b.data(), b.size());
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    }
    out.write(b.data(), b.size());
}

inline void put_i64(std::ostream& out, std::int64_t v) {
    put_u64(out, static_cast<std::uint64_t>(v));
}

inline void put_f32(std::ostream& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64(std::ostream& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_magic(std::ostream& out, const char (&magic)[5]) {
    out.write(magic, 4);
}

inline void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw TruncationError(std::string("truncated input while reading ") + what);
    }
}

inline std::uint32_t get_u32(std::istream& in, const char* what) {
    std::array<unsigned char, 4> b{};
    read_exact(in, reinterpret_cast<char*>(b.data()), b.size(), what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

inline std::uint64_t get_u64(std::istream& in, const char* what) {
    std::array<unsigned char, 8> b{};
    read_exact(in, reinterpret_cast<char*>(b.data()), b.size(), what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

inline std::int64_t get_i64(std::istream& in, const char* what) {
    return static_cast<std::int64_t>(get_u64(in, what));
}

inline float get_f32(std::istream& in, const char* what) {
    return std::bit_cast<float>(get_u32(in, what));
}

inline double get_f64(std::istream& in, const char* what) {
    return std::bit_cast<double>(get_u64(in, what));
}

inline std::string get_string(std::istream& in, const char* what, std::uint32_t max_len = 1u << 20) {
    const std::uint32_t len = get_u32(in, what);
    if (len > max_len) {
        throw FormatError(std::string("implausible string length for ") + what);
    }
    std::string s(len, '\0');
    read_exact(in, s.data(), len, what);
    return s;
}

// Throws FormatError unless the next four bytes equal `magic`.
inline void expect_magic(std::istream& in, const char (&magic)[5]) {
    std::array<char, 4> b{};
    in.read(b.data(), 4);
    if (in.gcount() != 4 || std::string(b.data(), 4) != std::string(magic, 4)) {
        throw FormatError(std::string("bad magic, expected \"") + magic + "\"");
    }
}

inline void expect_version(std::istream& in, std::uint32_t expected, const char* what) {
    const std::uint32_t v = get_u32(in, what);
    if (v != expected) {
        throw FormatError(std::string("unsupported ") + what + " version " + std::to_string(v));
    }
}

}  // namespace vws::binio
