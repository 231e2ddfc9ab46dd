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

#include <algorithm>
#include <stdexcept>

namespace p6 {
namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument("invalid hex digit");
}

void check_width(const char* name, uint64_t value, int bits) {
  if (bits < 64 && value >> bits != 0) {
    throw FieldOverflow(std::string(name) + " does not fit " + std::to_string(bits) + " bits");
  }
}

}  // namespace

PacketBytes::PacketBytes(std::vector<uint8_t> octets) : octets_(std::move(octets)) {
  if (octets_.size() < kMinFrameOctets || octets_.size() > kMaxFrameOctets) {
    throw std::invalid_argument("frame length " + std::to_string(octets_.size()) +
                                " outside [14, 1500]");
  }
}

std::string PacketBytes::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(2 * octets_.size());
  for (uint8_t b : octets_) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

PacketBytes PacketBytes::from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd hex string length");
  std::vector<uint8_t> octets;
  octets.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    octets.push_back(static_cast<uint8_t>(hex_digit(hex[i]) << 4 | hex_digit(hex[i + 1])));
  }
  return PacketBytes(std::move(octets));
}

int HeaderLayout::bit_size() const {
  int total = 0;
  for (const HeaderField& f : fields) total = std::max(total, f.bit_offset + f.bit_width);
  return total;
}

const HeaderField* HeaderLayout::field(std::string_view name) const {
  for (const HeaderField& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

HeaderLayout ethernet_layout() {
  return HeaderLayout{"ethernet",
                      {{"dst_addr", 0, 48}, {"src_addr", 48, 48}, {"ether_type", 96, 16}}};
}

HeaderLayout ipv4_fixed_layout() {
  return HeaderLayout{"ipv4",
                      {{"version", 0, 4},
                       {"ihl", 4, 4},
                       {"dscp_ecn", 8, 8},
                       {"total_len", 16, 16},
                       {"id", 32, 16},
                       {"flags", 48, 3},
                       {"frag_offset", 51, 13},
                       {"ttl", 64, 8},
                       {"protocol", 72, 8},
                       {"checksum", 80, 16},
                       {"src", 96, 32},
                       {"dst", 128, 32}}};
}

uint64_t read_bits(const std::vector<uint8_t>& octets, int bit_offset, int bit_width) {
  uint64_t value = 0;
  for (int i = 0; i < bit_width; ++i) {
    const int bit = bit_offset + i;
    const std::size_t byte = static_cast<std::size_t>(bit) / 8;
    int b = 0;
    if (byte < octets.size()) b = (octets[byte] >> (7 - bit % 8)) & 1;
    value = value << 1 | static_cast<uint64_t>(b);
  }
  return value;
}

void write_bits(std::vector<uint8_t>& octets, int bit_offset, int bit_width, uint64_t value) {
  for (int i = 0; i < bit_width; ++i) {
    const int bit = bit_offset + i;
    const std::size_t byte = static_cast<std::size_t>(bit) / 8;
    if (byte >= octets.size()) continue;
    const int shift = 7 - bit % 8;
    const uint64_t b = (value >> (bit_width - 1 - i)) & 1;
    octets[byte] = static_cast<uint8_t>((octets[byte] & ~(1u << shift)) | (b << shift));
  }
}

PacketBytes encode_packet(const EthernetFields& eth, const Ipv4Fields& ipv4,
                          const std::vector<uint8_t>& payload) {
  check_width("eth.dst_addr", eth.dst_addr, 48);
  check_width("eth.src_addr", eth.src_addr, 48);
  check_width("ipv4.version", ipv4.version, 4);
  check_width("ipv4.ihl", ipv4.ihl, 4);
  check_width("ipv4.dscp_ecn", ipv4.dscp_ecn, 8);
  check_width("ipv4.id", ipv4.id, 16);
  check_width("ipv4.flags", ipv4.flags, 3);
  check_width("ipv4.frag_offset", ipv4.frag_offset, 13);
  check_width("ipv4.ttl", ipv4.ttl, 8);
  check_width("ipv4.protocol", ipv4.protocol, 8);
  check_width("ipv4.src", ipv4.src, 32);
  check_width("ipv4.dst", ipv4.dst, 32);

  const std::size_t expected_options = ipv4.ihl >= 5 ? 4 * (ipv4.ihl - 5) : 0;
  if (ipv4.options.size() != expected_options) {
    throw std::invalid_argument("options length disagrees with ihl");
  }
  const std::size_t header_octets = 20 + ipv4.options.size();

  uint32_t total_len = ipv4.total_len;
  if (total_len == kAutoValue) {
    total_len = static_cast<uint32_t>(header_octets + payload.size());
  }
  check_width("ipv4.total_len", total_len, 16);

  std::vector<uint8_t> octets(14 + header_octets, 0);
  write_bits(octets, 0, 48, eth.dst_addr);
  write_bits(octets, 48, 48, eth.src_addr);
  write_bits(octets, 96, 16, eth.ether_type);

  const int base = 14 * 8;
  write_bits(octets, base + 0, 4, ipv4.version);
  write_bits(octets, base + 4, 4, ipv4.ihl);
  write_bits(octets, base + 8, 8, ipv4.dscp_ecn);
  write_bits(octets, base + 16, 16, total_len);
  write_bits(octets, base + 32, 16, ipv4.id);
  write_bits(octets, base + 48, 3, ipv4.flags);
  write_bits(octets, base + 51, 13, ipv4.frag_offset);
  write_bits(octets, base + 64, 8, ipv4.ttl);
  write_bits(octets, base + 72, 8, ipv4.protocol);
  write_bits(octets, base + 96, 32, ipv4.src);
  write_bits(octets, base + 128, 32, ipv4.dst);
  std::copy(ipv4.options.begin(), ipv4.options.end(), octets.begin() + 34);

  uint32_t checksum = ipv4.checksum;
  if (checksum == kAutoValue) {
    std::vector<uint8_t> header(octets.begin() + 14, octets.end());
    checksum = ipv4_header_checksum(header);
  }
  check_width("ipv4.checksum", checksum, 16);
  write_bits(octets, base + 80, 16, checksum);

  octets.insert(octets.end(), payload.begin(), payload.end());
  return PacketBytes(std::move(octets));
}

PacketBytes encode_frame(const EthernetFields& eth, const std::vector<uint8_t>& payload) {
  check_width("eth.dst_addr", eth.dst_addr, 48);
  check_width("eth.src_addr", eth.src_addr, 48);
  std::vector<uint8_t> octets(14, 0);
  write_bits(octets, 0, 48, eth.dst_addr);
  write_bits(octets, 48, 48, eth.src_addr);
  write_bits(octets, 96, 16, eth.ether_type);
  octets.insert(octets.end(), payload.begin(), payload.end());
  return PacketBytes(std::move(octets));
}

PacketSnapshot decode_packet(const PacketBytes& packet) {
  const std::vector<uint8_t>& octets = packet.octets();
  PacketSnapshot snap{packet, EthernetView{}, Ipv4Presence::kAbsent, std::nullopt};
  snap.eth.dst_addr = read_bits(octets, 0, 48);
  snap.eth.src_addr = read_bits(octets, 48, 48);
  snap.eth.ether_type = static_cast<uint16_t>(read_bits(octets, 96, 16));
  if (snap.eth.ether_type != kEtherTypeIpv4) return snap;

  if (octets.size() < 34) {
    snap.ipv4_presence = Ipv4Presence::kMalformed;
    return snap;
  }
  const uint32_t ihl = octets[14] & 0xf;
  if (ihl >= 5 && octets.size() < 14 + 4 * static_cast<std::size_t>(ihl)) {
    snap.ipv4_presence = Ipv4Presence::kMalformed;
    return snap;
  }

  Ipv4HeaderView v;
  const int base = 14 * 8;
  v.version = static_cast<uint32_t>(read_bits(octets, base + 0, 4));
  v.ihl = ihl;
  v.dscp_ecn = static_cast<uint32_t>(read_bits(octets, base + 8, 8));
  v.total_len = static_cast<uint32_t>(read_bits(octets, base + 16, 16));
  v.id = static_cast<uint32_t>(read_bits(octets, base + 32, 16));
  v.flags_frag = static_cast<uint32_t>(read_bits(octets, base + 48, 16));
  v.ttl = static_cast<uint32_t>(read_bits(octets, base + 64, 8));
  v.protocol = static_cast<uint32_t>(read_bits(octets, base + 72, 8));
  v.checksum = static_cast<uint32_t>(read_bits(octets, base + 80, 16));
  v.src = read_bits(octets, base + 96, 32);
  v.dst = read_bits(octets, base + 128, 32);
  if (ihl > 5) {
    v.options.assign(octets.begin() + 34, octets.begin() + 14 + 4 * ihl);
  }
  snap.ipv4_presence = Ipv4Presence::kPresent;
  snap.ipv4 = std::move(v);
  return snap;
}

uint16_t ipv4_header_checksum(const std::vector<uint8_t>& header_octets) {
  const std::size_t n = header_octets.size();
  if (n < 20 || n > 60 || n % 4 != 0) {
    throw BadHeaderLength("IPv4 header must be a multiple of 4 octets in [20, 60], got " +
                          std::to_string(n));
  }
  uint32_t acc = 0;
  for (std::size_t i = 0; i < n; i += 2) {
    if (i == 10) continue;  // the checksum field itself counts as zero
    acc += static_cast<uint32_t>(header_octets[i]) << 8 | header_octets[i + 1];
    acc = (acc & 0xffff) + (acc >> 16);
  }
  return static_cast<uint16_t>(~acc & 0xffff);
}

std::vector<uint8_t> ipv4_header_octets(const Ipv4HeaderView& view) {
  std::vector<uint8_t> header(20, 0);
  write_bits(header, 0, 4, view.version);
  write_bits(header, 4, 4, view.ihl);
  write_bits(header, 8, 8, view.dscp_ecn);
  write_bits(header, 16, 16, view.total_len);
  write_bits(header, 32, 16, view.id);
  write_bits(header, 48, 16, view.flags_frag);
  write_bits(header, 64, 8, view.ttl);
  write_bits(header, 72, 8, view.protocol);
  write_bits(header, 80, 16, view.checksum);
  write_bits(header, 96, 32, view.src);
  write_bits(header, 128, 32, view.dst);
  header.insert(header.end(), view.options.begin(), view.options.end());
  return header;
}

bool ipv4_checksum_valid(const PacketSnapshot& snapshot) {
  if (!snapshot.ipv4.has_value()) return false;
  const Ipv4HeaderView& v = *snapshot.ipv4;
  if (v.ihl < 5) return false;  // checksum is undefined over a short header
  return ipv4_header_checksum(ipv4_header_octets(v)) == v.checksum;
}

}  // namespace p6
