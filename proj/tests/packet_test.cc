// Copyright 2026 The P6 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "p6/packet.h"

#include <gtest/gtest.h>

#include <cstdint>
#include <vector>

#include "p6/rng.h"

namespace p6 {
namespace {

// Independent ones-complement oracle. Accumulates the full 32-bit sum first
// and folds only at the end, unlike the production code which folds each
// step, so an agreement between the two is meaningful.
uint16_t oracle_checksum(const std::vector<uint8_t>& header) {
  uint32_t sum = 0;
  for (std::size_t i = 0; i < header.size(); i += 2) {
    uint16_t word = static_cast<uint16_t>(header[i] << 8 | header[i + 1]);
    if (i == 10) word = 0;
    sum += word;
  }
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<uint16_t>(~sum & 0xffff);
}

TEST(PacketBytes, RejectsOutOfRangeLengths) {
  EXPECT_THROW(PacketBytes(std::vector<uint8_t>(13, 0)), std::invalid_argument);
  EXPECT_THROW(PacketBytes(std::vector<uint8_t>(1501, 0)), std::invalid_argument);
  EXPECT_NO_THROW(PacketBytes(std::vector<uint8_t>(14, 0)));
  EXPECT_NO_THROW(PacketBytes(std::vector<uint8_t>(1500, 0)));
}

TEST(PacketBytes, HexRoundTrip) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<uint8_t> octets(14 + rng.below(200));
    for (uint8_t& b : octets) b = static_cast<uint8_t>(rng.below(256));
    PacketBytes p(octets);
    EXPECT_EQ(PacketBytes::from_hex(p.to_hex()), p);
  }
}

TEST(Bits, ReadWriteRoundTripAtOddOffsets) {
  std::vector<uint8_t> buf(8, 0);
  write_bits(buf, 3, 13, 0x1abc & 0x1fff);
  EXPECT_EQ(read_bits(buf, 3, 13), 0x1abcu & 0x1fffu);
  write_bits(buf, 0, 4, 0xe);
  EXPECT_EQ(read_bits(buf, 0, 4), 0xeu);
  // Reads past the end are zero bits.
  EXPECT_EQ(read_bits(buf, 60, 8), read_bits(buf, 60, 4) << 4);
}

TEST(Layouts, CanonicalShapes) {
  HeaderLayout eth = ethernet_layout();
  EXPECT_EQ(eth.fields.size(), 3u);
  EXPECT_EQ(eth.bit_size(), 112);
  HeaderLayout ip = ipv4_fixed_layout();
  EXPECT_EQ(ip.fields.size(), 12u);
  EXPECT_EQ(ip.bit_size(), 160);
  ASSERT_NE(ip.field("ttl"), nullptr);
  EXPECT_EQ(ip.field("ttl")->bit_offset, 64);
  EXPECT_EQ(ip.field("nope"), nullptr);
}

TEST(Encode, RoundTripsThroughDecode) {
  Ipv4Fields ip;
  ip.ttl = 63;
  ip.protocol = 17;
  ip.src = 0x0a00002a;
  ip.dst = 0x0a000102;
  PacketBytes p = encode_packet(EthernetFields{}, ip, {0xde, 0xad});
  PacketSnapshot snap = decode_packet(p);
  ASSERT_EQ(snap.ipv4_presence, Ipv4Presence::kPresent);
  EXPECT_EQ(snap.eth.ether_type, kEtherTypeIpv4);
  EXPECT_EQ(snap.ipv4->version, 4u);
  EXPECT_EQ(snap.ipv4->ihl, 5u);
  EXPECT_EQ(snap.ipv4->ttl, 63u);
  EXPECT_EQ(snap.ipv4->protocol, 17u);
  EXPECT_EQ(snap.ipv4->total_len, 22u);  // kAutoValue: 20-octet header + 2 payload
  EXPECT_EQ(snap.ipv4->dst, 0x0a000102u);
  EXPECT_TRUE(ipv4_checksum_valid(snap));
  EXPECT_EQ(p.size(), 36u);
}

TEST(Encode, RoundTripPropertyOverRandomFields) {
  Rng rng(0x5eed);
  for (int trial = 0; trial < 200; ++trial) {
    Ipv4Fields ip;
    ip.version = static_cast<uint32_t>(rng.below(16));
    ip.ihl = static_cast<uint32_t>(5 + rng.below(4));
    ip.options.assign(4 * (ip.ihl - 5), 0);
    for (uint8_t& b : ip.options) b = static_cast<uint8_t>(rng.below(256));
    ip.dscp_ecn = static_cast<uint32_t>(rng.below(256));
    ip.id = static_cast<uint32_t>(rng.below(0x10000));
    ip.flags = static_cast<uint32_t>(rng.below(8));
    ip.frag_offset = static_cast<uint32_t>(rng.below(0x2000));
    ip.ttl = static_cast<uint32_t>(rng.below(256));
    ip.protocol = static_cast<uint32_t>(rng.below(256));
    ip.checksum = static_cast<uint32_t>(rng.below(0x10000));
    ip.src = rng.below(1ull << 32);
    ip.dst = rng.below(1ull << 32);
    EthernetFields eth;
    eth.dst_addr = rng.below(1ull << 48);
    eth.src_addr = rng.below(1ull << 48);
    std::vector<uint8_t> payload(rng.below(32));
    for (uint8_t& b : payload) b = static_cast<uint8_t>(rng.below(256));

    PacketSnapshot snap = decode_packet(encode_packet(eth, ip, payload));
    ASSERT_EQ(snap.ipv4_presence, Ipv4Presence::kPresent);
    EXPECT_EQ(snap.eth.dst_addr, eth.dst_addr);
    EXPECT_EQ(snap.eth.src_addr, eth.src_addr);
    EXPECT_EQ(snap.ipv4->version, ip.version);
    EXPECT_EQ(snap.ipv4->ihl, ip.ihl);
    EXPECT_EQ(snap.ipv4->dscp_ecn, ip.dscp_ecn);
    EXPECT_EQ(snap.ipv4->id, ip.id);
    EXPECT_EQ(snap.ipv4->flags_frag, (ip.flags << 13 | ip.frag_offset));
    EXPECT_EQ(snap.ipv4->ttl, ip.ttl);
    EXPECT_EQ(snap.ipv4->protocol, ip.protocol);
    EXPECT_EQ(snap.ipv4->checksum, ip.checksum);
    EXPECT_EQ(snap.ipv4->src, ip.src);
    EXPECT_EQ(snap.ipv4->dst, ip.dst);
    EXPECT_EQ(snap.ipv4->options, ip.options);
  }
}

TEST(Encode, TtlOverflowRejected) {
  Ipv4Fields ip;
  ip.ttl = 256;
  EXPECT_THROW(encode_packet(EthernetFields{}, ip, {}), FieldOverflow);
}

TEST(Encode, OptionsCarriedWithIhl6) {
  Ipv4Fields ip;
  ip.ihl = 6;
  ip.options = {1, 2, 3, 4};
  PacketBytes p = encode_packet(EthernetFields{}, ip, {});
  PacketSnapshot snap = decode_packet(p);
  ASSERT_EQ(snap.ipv4_presence, Ipv4Presence::kPresent);
  EXPECT_EQ(snap.ipv4->header_octets(), 24);
  EXPECT_EQ(snap.ipv4->options, (std::vector<uint8_t>{1, 2, 3, 4}));
  EXPECT_TRUE(ipv4_checksum_valid(snap));
}

TEST(Encode, OptionsLengthMustMatchIhl) {
  Ipv4Fields ip;
  ip.ihl = 6;
  ip.options = {1, 2, 3};
  EXPECT_THROW(encode_packet(EthernetFields{}, ip, {}), std::invalid_argument);
}

TEST(Decode, NonIpv4IsAbsent) {
  EthernetFields eth;
  eth.ether_type = 0x86dd;
  PacketSnapshot snap = decode_packet(encode_frame(eth, std::vector<uint8_t>(8, 0)));
  EXPECT_EQ(snap.ipv4_presence, Ipv4Presence::kAbsent);
  EXPECT_FALSE(snap.ipv4.has_value());
}

TEST(Decode, ShortIpv4IsMalformed) {
  // EtherType says IPv4 but only 16 octets exist in total.
  PacketSnapshot snap = decode_packet(encode_frame(EthernetFields{}, {0x45, 0x00}));
  EXPECT_EQ(snap.bytes.size(), 16u);
  EXPECT_EQ(snap.ipv4_presence, Ipv4Presence::kMalformed);
  EXPECT_FALSE(snap.ipv4.has_value());
}

TEST(Decode, TruncatedOptionsAreMalformed) {
  // ihl=6 wants 38 octets; give exactly 34.
  std::vector<uint8_t> ip_part(20, 0);
  ip_part[0] = 0x46;
  PacketSnapshot snap = decode_packet(encode_frame(EthernetFields{}, ip_part));
  EXPECT_EQ(snap.bytes.size(), 34u);
  EXPECT_EQ(snap.ipv4_presence, Ipv4Presence::kMalformed);
}

TEST(Decode, ShortIhlStillDecodesFixedPart) {
  // ihl < 5 cannot carry options; the fixed 20 octets are still readable.
  std::vector<uint8_t> ip_part(20, 0);
  ip_part[0] = 0x44;  // version 4, ihl 4
  ip_part[8] = 9;     // ttl
  PacketSnapshot snap = decode_packet(encode_frame(EthernetFields{}, ip_part));
  ASSERT_EQ(snap.ipv4_presence, Ipv4Presence::kPresent);
  EXPECT_EQ(snap.ipv4->ihl, 4u);
  EXPECT_EQ(snap.ipv4->ttl, 9u);
  EXPECT_TRUE(snap.ipv4->options.empty());
}

TEST(Checksum, ZeroedHeaderGivesAllOnes) {
  EXPECT_EQ(ipv4_header_checksum(std::vector<uint8_t>(20, 0)), 0xffff);
}

TEST(Checksum, RejectsBadHeaderSizes) {
  EXPECT_THROW(ipv4_header_checksum(std::vector<uint8_t>(19, 0)), BadHeaderLength);
  EXPECT_THROW(ipv4_header_checksum(std::vector<uint8_t>(22, 0)), BadHeaderLength);
  EXPECT_THROW(ipv4_header_checksum(std::vector<uint8_t>(64, 0)), BadHeaderLength);
}

// Full ones-complement sum of a header with its checksum installed; the
// defining property is that this comes out 0xffff.
uint32_t full_sum_with_checksum(std::vector<uint8_t> header, uint16_t checksum) {
  header[10] = static_cast<uint8_t>(checksum >> 8);
  header[11] = static_cast<uint8_t>(checksum & 0xff);
  uint32_t sum = 0;
  for (std::size_t i = 0; i < header.size(); i += 2) {
    sum += static_cast<uint32_t>(header[i] << 8 | header[i + 1]);
  }
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return sum;
}

TEST(Checksum, MatchesOracleOnRandomHeaders) {
  Rng rng(0xc4ec);
  for (int trial = 0; trial < 1000; ++trial) {
    const int ihl = 5 + static_cast<int>(rng.below(11));
    std::vector<uint8_t> header(4 * ihl);
    for (uint8_t& b : header) b = static_cast<uint8_t>(rng.below(256));
    const uint16_t got = ipv4_header_checksum(header);
    EXPECT_EQ(got, oracle_checksum(header));
    EXPECT_EQ(full_sum_with_checksum(header, got), 0xffffu);
  }
}

TEST(Checksum, ValidityReflectsInstalledValue) {
  Ipv4Fields ip;
  PacketBytes good = encode_packet(EthernetFields{}, ip, {});
  EXPECT_TRUE(ipv4_checksum_valid(decode_packet(good)));
  ip.checksum = 0x1234;
  PacketBytes bad = encode_packet(EthernetFields{}, ip, {});
  EXPECT_FALSE(ipv4_checksum_valid(decode_packet(bad)));
}

}  // namespace
}  // namespace p6
