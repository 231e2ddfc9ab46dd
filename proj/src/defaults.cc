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

#include "p6/defaults.h"

namespace p6 {

const std::string& default_queries() {
  static const std::string kText = R"(# Bundled behavioral queries for IPv4 pipelines. Atoms that do not resolve
# against the deployed program are rewritten to undefined and noted, so the
# file runs unchanged against any program.

# 1: corrupted checksums never leave the switch
if (calcChksum(ipv4) != ing.ipv4.checksum)
then (egr.dropped)

# 2: only version-4 datagrams ride the IPv4 path
if (ing.ipv4.version != 4)
then (egr.dropped)

# 3: a header shorter than its fixed part is malformed
if (ing.ipv4.ihl < 5)
then (egr.dropped)

# 4: a datagram shorter than a bare header is malformed
if (ing.ipv4.total_len < 20)
then (egr.dropped)

# 5: expired datagrams are dropped, never forwarded
if (ing.ipv4.ttl <= 1)
then (egr.dropped)

# 6: the forwarding contract for healthy routable traffic; the MAC rewrite
# is only owed where a route exists
if (ing.ipv4.version == 4 && ing.ipv4.ihl >= 5 && ing.ipv4.total_len >= 20 &&
    ing.ipv4.ttl > 1 && calcChksum(ipv4) == ing.ipv4.checksum)
then (egr.dropped || !(table_val(ipv4_lpm, ing.ipv4.dst, smac) >= 0) ||
      egr.ethernet.src_addr == table_val(ipv4_lpm, ing.ipv4.dst, smac))
     (egr.dropped || !(table_val(ipv4_lpm, ing.ipv4.dst, dmac) >= 0) ||
      egr.ethernet.dst_addr == table_val(ipv4_lpm, ing.ipv4.dst, dmac))
     (egr.dropped || egr.ipv4.ttl == ing.ipv4.ttl - 1)
     (egr.dropped || calcChksum(ipv4) == egr.ipv4.checksum)
     pd: (egr.dropped || egr.port == table_val(ipv4_lpm, ing.ipv4.dst, port))

# 7: mirrored copies go to the session port and never carry denied traffic
clone if (clone_port(1) >= 0)
then (egr.dropped || egr.port == clone_port(1))
     pd: (!(table_val(acl, ing.ipv4.dst, code) >= 1) || egr.dropped)

# 8: replicated copies stay on group ports and fragments are never replicated
multicast if (mcast_has(2, 4) && ing.ipv4.dst >= 0xe0000000)
then (egr.dropped || mcast_has(2, egr.port))
     pd: (ing.ipv4.frag_offset == 0 || egr.dropped)
)";
  return kText;
}

const std::vector<std::string>& default_template_texts() {
  static const std::vector<std::string> kTexts = {
      R"(# A parser that skips checksum verification forwards corrupted
# datagrams; verify right after the header is extracted.
patch parser_verify_checksum
query 1
condition 0
anchor after_extract
needs checksum
---
verify_checksum({header})
)",
      R"(# Non-version-4 datagrams must not ride the IPv4 path.
patch parser_version_check
query 2
condition 0
anchor after_extract
needs version
---
if (hdr.{header}.version != 4) { reject }
)",
      R"(# The header length field cannot undercut the fixed header.
patch parser_ihl_bounds
query 3
condition 0
anchor after_extract
needs ihl
---
if (hdr.{header}.ihl < 5) { reject }
)",
      R"(# The total length field cannot undercut a bare header.
patch parser_total_len_bounds
query 4
condition 0
anchor after_extract
needs total_len
---
if (hdr.{header}.total_len < 20) { reject }
)",
      R"(# Expired datagrams are dropped at the door.
patch ttl_expiry_drop
query 5
condition 0
anchor after_extract
needs ttl
field ttl
---
if (hdr.{header}.{field} <= 1) { drop }
)",
      R"(# A hop that forgets to decrement must also refresh the checksum,
# or the repair itself would corrupt the datagram.
patch egress_ttl_decrement
query 6
condition 2
anchor egress_start
needs ttl checksum
---
decrement hdr.{header}.ttl
update_checksum({header})
)",
      R"(# Rewritten headers leave with a stale checksum unless egress
# refreshes it.
patch egress_checksum_refresh
query 6
condition 3
anchor egress_start
needs checksum
---
update_checksum({header})
)",
  };
  return kTexts;
}

std::vector<PatchTemplate> default_patch_library() {
  std::vector<PatchTemplate> library;
  library.reserve(default_template_texts().size());
  for (const std::string& text : default_template_texts()) {
    library.push_back(parse_patch_template(text));
  }
  return library;
}

}  // namespace p6
