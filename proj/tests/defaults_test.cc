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

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "p6/p4q.h"

namespace p6 {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in.good()) << path;
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string fixture(const std::string& rel) { return std::string(P6_FIXTURE_DIR) + "/" + rel; }

TEST(DefaultsTest, QueriesParseWithTheExpectedShape) {
  const std::vector<Query> queries = parse_queries(default_queries());
  ASSERT_EQ(queries.size(), 8u);

  const std::vector<int> conds = {1, 1, 1, 1, 1, 5, 2, 2};
  for (std::size_t i = 0; i < queries.size(); ++i) {
    EXPECT_EQ(queries[i].id, static_cast<int>(i) + 1);
    EXPECT_EQ(queries[i].condition_count(), conds[i]) << "query " << i + 1;
    EXPECT_TRUE(queries[i].else_conds.empty());
  }
  EXPECT_EQ(queries[6].scope, QueryScope::kClone);
  EXPECT_EQ(queries[7].scope, QueryScope::kMulticast);

  // Exactly three platform-dependent conditions: the port columns of the
  // forwarding contract, the denied-traffic mirror rule and the fragment
  // replication rule.
  std::set<std::string> pd;
  for (const Query& q : queries) {
    for (int i = 0; i < q.condition_count(); ++i) {
      if (q.condition(i).platform_dependent) {
        pd.insert("q" + std::to_string(q.id) + "c" + std::to_string(i));
      }
    }
  }
  EXPECT_EQ(pd, (std::set<std::string>{"q6c4", "q7c1", "q8c1"}));
}

TEST(DefaultsTest, TemplatesParseAndCoverTheRepairableConditions) {
  const std::vector<PatchTemplate> library = default_patch_library();
  ASSERT_EQ(library.size(), 7u);

  std::set<std::string> ids;
  std::set<std::string> classes;
  for (const PatchTemplate& t : library) {
    ids.insert(t.patch_id);
    classes.insert("q" + std::to_string(t.query_id) + "c" + std::to_string(t.condition_index));
    EXPECT_FALSE(t.body.empty()) << t.patch_id;
  }
  EXPECT_EQ(ids.size(), 7u) << "duplicate patch ids";
  EXPECT_EQ(classes, (std::set<std::string>{"q1c0", "q2c0", "q3c0", "q4c0", "q5c0", "q6c2",
                                            "q6c3"}));
}

TEST(DefaultsTest, ShippedQueryFileMatchesTheEmbeddedText) {
  EXPECT_EQ(slurp(fixture("queries/default.p4q")), default_queries());
}

TEST(DefaultsTest, ShippedPatchFilesMatchTheEmbeddedTexts) {
  for (const std::string& text : default_template_texts()) {
    const PatchTemplate t = parse_patch_template(text);
    EXPECT_EQ(slurp(fixture("patches/" + t.patch_id + ".patch")), text) << t.patch_id;
  }
}

}  // namespace
}  // namespace p6
