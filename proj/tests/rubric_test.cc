// Copyright 2026 The btr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "btr/rubric.h"

#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "btr/error.h"
#include "btr/simulation.h"
#include "test_support.h"

namespace btr {
namespace {

constexpr const char* kValid = R"({
  "id": "tiny", "domain_name": "Tiny",
  "levels": ["low", "medium", "high"],
  "dimensions": [
    {"name": "a", "anchors": ["a1", "a2", "a3"]},
    {"name": "b", "anchors": ["b1", "b2", "b3"]}
  ]
})";

ErrorCode load_error(const std::string& text) {
  try {
    load_rubric(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "rubric loaded: " << text;
  return ErrorCode::kIo;
}

TEST(RubricTest, LoadsValidDocument) {
  const Rubric r = load_rubric(kValid);
  EXPECT_EQ(r.id(), "tiny");
  EXPECT_EQ(r.num_dimensions(), 2u);
  EXPECT_EQ(r.num_levels(), 3);
  EXPECT_EQ(r.dimension_index("b"), 1u);
  EXPECT_FALSE(r.dimension_index("c").has_value());
  EXPECT_EQ(r.level(3).label, "high");
  EXPECT_EQ(r.level_index("medium"), 2);
  EXPECT_EQ(r.dimensions()[0].anchor(1), "a1");
}

TEST(RubricTest, RoundTripsThroughJson) {
  const Rubric r = load_rubric(kValid);
  EXPECT_EQ(load_rubric(serialize_rubric(r)), r);
}

TEST(RubricTest, RejectsStructuralViolations) {
  EXPECT_EQ(load_error(R"({"id":"x","domain_name":"X","levels":["l"],
    "dimensions":[{"name":"a","anchors":["a1"]}]})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(load_error(R"({"id":"x","domain_name":"X","levels":["l","h"],
    "dimensions":[]})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(load_error(R"({"id":"x","domain_name":"X","levels":["l","h"],
    "dimensions":[{"name":"a","anchors":["a1","a2"]},{"name":"a","anchors":["b1","b2"]}]})"),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(load_error(R"({"id":"x","domain_name":"X","levels":["l","h"],
    "dimensions":[{"name":"a","anchors":["a1"]}]})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(load_error(R"({"id":"x","domain_name":"X","levels":["l","h"],
    "dimensions":[{"name":"a","anchors":["a1",""]}]})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(load_error(R"({"id":"x","domain_name":"X","levels":["l","l"],
    "dimensions":[{"name":"a","anchors":["a1","a2"]}]})"), ErrorCode::kInvalidArgument);
}

TEST(RubricTest, RejectsMalformedJson) {
  EXPECT_EQ(load_error("{not json"), ErrorCode::kParse);
  EXPECT_EQ(load_error("[]"), ErrorCode::kParse);
  EXPECT_EQ(load_error(R"({"id":"x","domain_name":"X","levels":["l","h"]})"),
            ErrorCode::kParse);
}

TEST(RubricTest, WithDimensionAppendsAndChecks) {
  const Rubric r = testing::make_lmh_rubric(2);
  const Rubric grown = r.with_dimension({"extra", {"x1", "x2", "x3"}});
  EXPECT_EQ(grown.num_dimensions(), 3u);
  EXPECT_EQ(grown.dimensions().back().name, "extra");
  EXPECT_THROW(r.with_dimension({"d1", {"x1", "x2", "x3"}}), Error);
  EXPECT_THROW(r.with_dimension({"short", {"x1", "x2"}}), Error);
}

TEST(RubricTest, LevelOutOfRangeThrows) {
  const Rubric r = testing::make_lmh_rubric(1);
  EXPECT_THROW(r.level(0), Error);
  EXPECT_THROW(r.level(4), Error);
  EXPECT_THROW(r.dimensions()[0].anchor(4), Error);
}

TEST(RubricTest, RenderListsEveryAnchor) {
  const Rubric r = load_rubric(kValid);
  const std::string text = render_rubric(r);
  for (const auto& d : r.dimensions()) {
    EXPECT_NE(text.find(d.name), std::string::npos);
    for (const auto& a : d.anchors) EXPECT_NE(text.find(a), std::string::npos);
  }
}

// Every rubric shipped in data/ must load and yield the three anchor
// archetypes at levels 1, (L+1)/2 and L.
TEST(RubricTest, RepositoryRubricsHaveAnchorArchetypes) {
  int seen = 0;
  for (const auto& entry :
       std::filesystem::directory_iterator(std::filesystem::path(BTR_DATA_DIR) / "rubrics")) {
    const Rubric r = load_rubric_file(entry.path().string());
    const auto anchors = sim::make_anchor_archetypes(r);
    ASSERT_EQ(anchors.size(), 3u);
    const int l = r.num_levels();
    const std::pair<const char*, int> expected[] = {
        {"low-logan", 1}, {"average-jessie", (l + 1) / 2}, {"high-harley", l}};
    for (int i = 0; i < 3; ++i) {
      EXPECT_EQ(anchors[i].id, expected[i].first);
      ASSERT_EQ(anchors[i].levels.size(), r.num_dimensions());
      for (int v : anchors[i].levels) EXPECT_EQ(v, expected[i].second);
    }
    ++seen;
  }
  EXPECT_GE(seen, 3);
}

TEST(RubricTest, AnchorArchetypesForEvenLevelCount) {
  const auto anchors = sim::make_anchor_archetypes(testing::make_rubric(2, 4));
  EXPECT_EQ(anchors[1].levels, (std::vector<int>{2, 2}));
  EXPECT_EQ(anchors[2].levels, (std::vector<int>{4, 4}));
}

}  // namespace
}  // namespace btr
