// detdeploy: governed deterministic deployment engine
// Copyright 2026 The detdeploy Authors.
// SPDX-License-Identifier: Apache-2.0

#include <detdeploy/bytes.hpp>
#include <detdeploy/keccak.hpp>
#include <oracle/reference_keccak.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace detdeploy;

namespace
{
std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n)
{
    std::vector<std::uint8_t> out(n);
    for (auto& b : out)
        b = static_cast<std::uint8_t>(rng());
    return out;
}
}  // namespace

TEST(Keccak, KnownDigests)
{
    EXPECT_EQ(keccak256(std::string_view{}).hex(),
        "0xc5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
    EXPECT_EQ(keccak256(std::string_view{"abc"}).hex(),
        "0x4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
}

TEST(Keccak, OracleAgreesOnKnownDigests)
{
    EXPECT_EQ(oracle::hex(oracle::keccak256("")),
        "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
    EXPECT_EQ(oracle::hex(oracle::keccak256("abc")),
        "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
}

TEST(Keccak, MatchesOracleAcrossBlockBoundaries)
{
    std::mt19937_64 rng(7);
    for (std::size_t n = 0; n <= 600; ++n)
    {
        const auto msg = random_bytes(rng, n);
        const auto got = keccak256(ByteView(msg.data(), msg.size()));
        ASSERT_EQ(got.hex(), "0x" + oracle::hex(oracle::keccak256(msg))) << "length " << n;
    }
}

TEST(Keccak, IncrementalUpdatesEqualOneShot)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial)
    {
        const auto msg = random_bytes(rng, rng() % 700);
        Keccak256 h;
        std::size_t pos = 0;
        while (pos < msg.size())
        {
            const auto chunk = std::min<std::size_t>(rng() % 150, msg.size() - pos);
            h.update(ByteView(msg.data() + pos, chunk));
            pos += chunk;
        }
        EXPECT_EQ(h.finalize(), keccak256(ByteView(msg.data(), msg.size())));
    }
}

TEST(Bytes, HexRoundTrip)
{
    const Bytes raw = {0x00, 0x01, 0xab, 0xff};
    EXPECT_EQ(to_hex(raw), "0001abff");
    EXPECT_EQ(from_hex("0x0001ABff"), raw);
    EXPECT_EQ(from_hex("0001abff"), raw);
    EXPECT_THROW(from_hex("0x123"), std::invalid_argument);
    EXPECT_THROW(from_hex("zz"), std::invalid_argument);
}

TEST(Bytes, FixedWidthParsing)
{
    const auto a = Address::from_hex("0x00000000000000000000000000000000deadbeef");
    EXPECT_EQ(a.hex(), "0x00000000000000000000000000000000deadbeef");
    EXPECT_THROW(Address::from_hex("0xdeadbeef"), std::invalid_argument);
    EXPECT_EQ(word_be(0x0102).hex(),
        "0x0000000000000000000000000000000000000000000000000000000000000102");
}
