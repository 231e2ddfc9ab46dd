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

#ifndef P6_PACKET_H_
#define P6_PACKET_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace p6 {

inline constexpr std::size_t kMinFrameOctets = 14;
inline constexpr std::size_t kMaxFrameOctets = 1500;
inline constexpr uint16_t kEtherTypeIpv4 = 0x0800;

// A field value does not fit the field's bit width.
class FieldOverflow : public std::runtime_error {
 public:
  explicit FieldOverflow(const std::string& what) : std::runtime_error(what) {}
};

// A header byte count outside what the format permits.
class BadHeaderLength : public std::runtime_error {
 public:
  explicit BadHeaderLength(const std::string& what) : std::runtime_error(what) {}
};

// Raw frame bytes. Length is pinned to [14, 1500] octets; the content is
// deliberately unconstrained so fuzzers can carry malformed frames around as
// ordinary values. Instances are immutable; mutation produces new frames.
class PacketBytes {
 public:
  // The minimum frame, all zero.
  PacketBytes() : octets_(kMinFrameOctets, 0) {}

  // Throws std::invalid_argument if the length is out of range.
  explicit PacketBytes(std::vector<uint8_t> octets);

  const std::vector<uint8_t>& octets() const { return octets_; }
  std::size_t size() const { return octets_.size(); }
  uint8_t at(std::size_t i) const { return octets_.at(i); }

  // Lowercase hex, two digits per octet, no separators.
  std::string to_hex() const;
  static PacketBytes from_hex(std::string_view hex);

  bool operator==(const PacketBytes&) const = default;

 private:
  std::vector<uint8_t> octets_;
};

// One fixed-width field inside a header. bit_offset counts from the first
// bit of the header, most significant bit of each octet first (network
// order), so the IPv4 version nibble sits at offset 0 and ihl at offset 4.
struct HeaderField {
  std::string name;
  int bit_offset = 0;
  int bit_width = 0;

  bool operator==(const HeaderField&) const = default;
};

// Byte layout of one header: contiguous fields in offset order.
struct HeaderLayout {
  std::string header_name;
  std::vector<HeaderField> fields;

  int bit_size() const;
  const HeaderField* field(std::string_view name) const;

  bool operator==(const HeaderLayout&) const = default;
};

// Canonical layouts for the two standard headers. The IPv4 layout covers the
// fixed 20-octet part in 12 fields (flags and fragment offset split).
HeaderLayout ethernet_layout();
HeaderLayout ipv4_fixed_layout();

// Reads `bit_width` bits (<= 64) at `bit_offset` as a big-endian value.
// Offsets past the end read as zero bits.
uint64_t read_bits(const std::vector<uint8_t>& octets, int bit_offset, int bit_width);

// Writes the low `bit_width` bits of value at bit_offset. Bits past the end
// of the buffer are silently discarded.
void write_bits(std::vector<uint8_t>& octets, int bit_offset, int bit_width, uint64_t value);

// Sentinel for encode_packet: derive the value instead of writing one.
inline constexpr uint32_t kAutoValue = 0xffffffffu;

struct EthernetFields {
  uint64_t dst_addr = 0x020000000001ULL;
  uint64_t src_addr = 0x020000000002ULL;
  uint16_t ether_type = kEtherTypeIpv4;
};

struct Ipv4Fields {
  uint32_t version = 4;
  uint32_t ihl = 5;
  uint32_t dscp_ecn = 0;
  // kAutoValue computes 4*ihl + payload size.
  uint32_t total_len = kAutoValue;
  uint32_t id = 0;
  uint32_t flags = 0;
  uint32_t frag_offset = 0;
  uint32_t ttl = 64;
  uint32_t protocol = 6;
  // kAutoValue installs the correct header checksum.
  uint32_t checksum = kAutoValue;
  uint64_t src = 0x0a000001;  // 10.0.0.1
  uint64_t dst = 0x0a000002;  // 10.0.0.2
  // Must hold exactly 4*(ihl-5) octets when ihl >= 5.
  std::vector<uint8_t> options;
};

struct EthernetView {
  uint64_t dst_addr = 0;
  uint64_t src_addr = 0;
  uint16_t ether_type = 0;
};

enum class Ipv4Presence {
  kAbsent,     // EtherType is not 0x0800
  kMalformed,  // EtherType says IPv4 but the bytes cannot carry the header
  kPresent,
};

struct Ipv4HeaderView {
  uint32_t version = 0;
  uint32_t ihl = 0;
  uint32_t dscp_ecn = 0;
  uint32_t total_len = 0;
  uint32_t id = 0;
  uint32_t flags_frag = 0;
  uint32_t ttl = 0;
  uint32_t protocol = 0;
  uint32_t checksum = 0;
  uint64_t src = 0;
  uint64_t dst = 0;
  std::vector<uint8_t> options;

  // Octet count of the header as carried: 4*ihl when ihl >= 5, else 20.
  int header_octets() const { return ihl >= 5 ? 4 * static_cast<int>(ihl) : 20; }
};

// Byte image of a frame plus the decoded header view, taken at ingress or
// egress of the simulated switch.
struct PacketSnapshot {
  PacketBytes bytes;
  EthernetView eth;
  Ipv4Presence ipv4_presence = Ipv4Presence::kAbsent;
  std::optional<Ipv4HeaderView> ipv4;
};

// Serializes headers and payload into one frame, network byte order.
// total_len and checksum honor kAutoValue. Throws FieldOverflow when a value
// does not fit its field and std::invalid_argument when options disagree
// with ihl or the frame leaves [14, 1500] octets.
PacketBytes encode_packet(const EthernetFields& eth, const Ipv4Fields& ipv4,
                          const std::vector<uint8_t>& payload);

// Ethernet-only frame; payload carried verbatim after the 14-octet header.
PacketBytes encode_frame(const EthernetFields& eth, const std::vector<uint8_t>& payload);

// Total, never throws. The Ethernet view is always present (length >= 14 is
// a PacketBytes invariant). The IPv4 view exists only when EtherType is
// 0x0800 and the frame is long enough: at least 34 octets, and at least
// 14 + 4*ihl octets when ihl >= 5. Anything else is marked malformed.
PacketSnapshot decode_packet(const PacketBytes& packet);

// RFC 1071 ones-complement checksum over an IPv4 header. The checksum field
// (octets 10 and 11) is treated as zero regardless of its content, so the
// result is the value that makes the header sum to 0xffff once installed.
// header size must be a multiple of 4 in [20, 60]; throws BadHeaderLength.
uint16_t ipv4_header_checksum(const std::vector<uint8_t>& header_octets);

// Reassembles the header octets of the view and compares its checksum field
// against ipv4_header_checksum. False when no IPv4 view is present.
bool ipv4_checksum_valid(const PacketSnapshot& snapshot);

// Header octets (fixed part plus options) as they would appear on the wire.
std::vector<uint8_t> ipv4_header_octets(const Ipv4HeaderView& view);

}  // namespace p6

#endif  // P6_PACKET_H_
