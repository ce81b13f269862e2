// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Straight-line Keccak-256 used only as a test oracle. Round constants and
// rotation offsets are generated from their defining recurrences instead of
// tables, the state is indexed as A[x][y], and the whole padded message is
// materialised before absorbing.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace oracle
{
inline bool rc_bit(int t)
{
    t %= 255;
    unsigned r = 1;
    for (int i = 1; i <= t; ++i)
    {
        r <<= 1;
        const unsigned b8 = (r >> 8) & 1u;
        if (b8)
            r ^= 0x171u;
        r &= 0xffu;
    }
    return (r & 1u) != 0;
}

inline std::uint64_t round_constant(int round)
{
    std::uint64_t rc = 0;
    for (int j = 0; j <= 6; ++j)
        if (rc_bit(j + 7 * round))
            rc |= std::uint64_t{1} << ((1 << j) - 1);
    return rc;
}

inline std::uint64_t rotl(std::uint64_t v, unsigned n)
{
    n %= 64;
    return n == 0 ? v : (v << n) | (v >> (64 - n));
}

inline std::vector<std::uint8_t> keccak256(const std::vector<std::uint8_t>& message)
{
    constexpr std::size_t rate = 136;

    unsigned offsets[5][5] = {};
    for (int t = 0, x = 1, y = 0; t < 24; ++t)
    {
        offsets[x][y] = static_cast<unsigned>(((t + 1) * (t + 2) / 2) % 64);
        const int nx = y;
        const int ny = (2 * x + 3 * y) % 5;
        x = nx;
        y = ny;
    }

    std::vector<std::uint8_t> padded = message;
    padded.push_back(0x01);
    while (padded.size() % rate != 0)
        padded.push_back(0x00);
    padded.back() |= 0x80;

    std::uint64_t A[5][5] = {};
    for (std::size_t block = 0; block < padded.size(); block += rate)
    {
        for (std::size_t i = 0; i < rate / 8; ++i)
        {
            std::uint64_t lane = 0;
            for (int b = 0; b < 8; ++b)
                lane |= std::uint64_t{padded[block + 8 * i + b]} << (8 * b);
            A[i % 5][i / 5] ^= lane;
        }
        for (int round = 0; round < 24; ++round)
        {
            std::uint64_t C[5];
            for (int x = 0; x < 5; ++x)
                C[x] = A[x][0] ^ A[x][1] ^ A[x][2] ^ A[x][3] ^ A[x][4];
            for (int x = 0; x < 5; ++x)
            {
                const auto D = C[(x + 4) % 5] ^ rotl(C[(x + 1) % 5], 1);
                for (int y = 0; y < 5; ++y)
                    A[x][y] ^= D;
            }
            std::uint64_t B[5][5];
            for (int x = 0; x < 5; ++x)
                for (int y = 0; y < 5; ++y)
                    B[y][(2 * x + 3 * y) % 5] = rotl(A[x][y], offsets[x][y]);
            for (int x = 0; x < 5; ++x)
                for (int y = 0; y < 5; ++y)
                    A[x][y] = B[x][y] ^ (~B[(x + 1) % 5][y] & B[(x + 2) % 5][y]);
            A[0][0] ^= round_constant(round);
        }
    }

    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; out.size() < 32; ++i)
        for (int b = 0; b < 8 && out.size() < 32; ++b)
            out.push_back(static_cast<std::uint8_t>(A[i % 5][i / 5] >> (8 * b)));
    return out;
}

inline std::vector<std::uint8_t> keccak256(std::string_view text)
{
    return keccak256(std::vector<std::uint8_t>(text.begin(), text.end()));
}

inline std::string hex(const std::vector<std::uint8_t>& bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (const auto b : bytes)
    {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

/// keccak256(0xff ++ deployer ++ salt ++ keccak256(init))[12:]
inline std::vector<std::uint8_t> create2(const std::vector<std::uint8_t>& deployer,
    const std::vector<std::uint8_t>& salt, const std::vector<std::uint8_t>& init)
{
    std::vector<std::uint8_t> buf{0xff};
    buf.insert(buf.end(), deployer.begin(), deployer.end());
    buf.insert(buf.end(), salt.begin(), salt.end());
    const auto h = keccak256(init);
    buf.insert(buf.end(), h.begin(), h.end());
    const auto digest = keccak256(buf);
    return {digest.begin() + 12, digest.end()};
}

}  // namespace oracle
