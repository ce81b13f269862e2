// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace detdeploy
{
using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Lowercase hex without prefix.
std::string to_hex(ByteView data);

/// Parses hex with an optional `0x` prefix. Throws std::invalid_argument on
/// odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) noexcept
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Fixed-width byte string. The tag keeps addresses and digests distinct types.
template <std::size_t N, class Tag>
struct FixedBytes
{
    static constexpr std::size_t width = N;
    std::array<std::uint8_t, N> bytes{};

    constexpr auto operator<=>(const FixedBytes&) const = default;

    ByteView view() const noexcept { return bytes; }

    /// Canonical rendering: `0x` followed by 2N lowercase hex characters.
    std::string hex() const { return "0x" + to_hex(bytes); }

    static FixedBytes from_hex(std::string_view text)
    {
        const auto raw = detdeploy::from_hex(text);
        if (raw.size() != N)
            throw std::invalid_argument(
                "expected " + std::to_string(N) + " bytes, got " + std::to_string(raw.size()));
        FixedBytes out;
        std::copy(raw.begin(), raw.end(), out.bytes.begin());
        return out;
    }

    static FixedBytes from_view(ByteView raw)
    {
        if (raw.size() != N)
            throw std::invalid_argument("fixed bytes width mismatch");
        FixedBytes out;
        std::copy(raw.begin(), raw.end(), out.bytes.begin());
        return out;
    }
};

using Address = FixedBytes<20, struct AddressTag>;
using Hash256 = FixedBytes<32, struct Hash256Tag>;

/// Appends `value` as a big-endian integer occupying `width` bytes.
void append_be(Bytes& out, std::uint64_t value, std::size_t width);

/// 32-byte big-endian encoding of an unsigned integer.
Hash256 word_be(std::uint64_t value) noexcept;

}  // namespace detdeploy
