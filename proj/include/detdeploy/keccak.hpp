// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <detdeploy/bytes.hpp>

#include <array>
#include <cstdint>
#include <string_view>

namespace detdeploy
{
/// Incremental Keccak-256 (original Keccak padding, as used by Ethereum;
/// not FIPS-202 SHA3-256).
class Keccak256
{
public:
    static constexpr std::size_t rate = 136;

    Keccak256& update(ByteView data) noexcept;
    Keccak256& update(std::string_view data) noexcept { return update(as_bytes(data)); }

    /// Pads, squeezes and resets the hasher.
    Hash256 finalize() noexcept;

private:
    void absorb_block(const std::uint8_t* block) noexcept;

    std::array<std::uint64_t, 25> state_{};
    std::array<std::uint8_t, rate> buffer_{};
    std::size_t buffered_ = 0;
};

Hash256 keccak256(ByteView data) noexcept;

inline Hash256 keccak256(std::string_view data) noexcept
{
    return keccak256(as_bytes(data));
}

/// The Keccak-f[1600] permutation, exposed for testing.
void keccak_f1600(std::array<std::uint64_t, 25>& state) noexcept;

}  // namespace detdeploy
