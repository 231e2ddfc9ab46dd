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
//
// Assets compiled into the tool: the behavioral query file and the patch
// template library used when the command line supplies neither. The same
// content ships as plain files under fixtures/, kept in sync by test.

#ifndef P6_DEFAULTS_H_
#define P6_DEFAULTS_H_

#include <string>
#include <vector>

#include "p6/patcher.h"

namespace p6 {

// Eight queries covering IPv4 ingress hygiene, the unicast forwarding
// contract, clone sessions and multicast groups.
const std::string& default_queries();

// One file body per bundled template, in library order.
const std::vector<std::string>& default_template_texts();

// The parsed bundled library.
std::vector<PatchTemplate> default_patch_library();

}  // namespace p6

#endif  // P6_DEFAULTS_H_
