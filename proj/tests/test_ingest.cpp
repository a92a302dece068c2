#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "chopper/errors.hpp"
#include "chopper/ingest.hpp"
#include "support.hpp"

using namespace chopper;
namespace ts = chopper::testsupport;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

const char* kMinimal = R"({
  "schema": "chopper-profile-v1",
  "ranks": 1,
  "metrics": ["time"],
  "roots": [{"frame": {"name": "main"}, "metrics": {"time": [4]}}]
})";

}  // namespace

TEST_CASE("minimal canonical document") {
  ProfileFrame pf = read_canonical_text(kMinimal, "mini");
  CHECK(pf.graph().size() == 1);
  CHECK(pf.num_ranks() == 1);
  CHECK(pf.table().row_count() == 1);
  CHECK(pf.table().cell("time", 0, 0) == 4.0);
  CHECK(pf.exec_id() == "mini");
  CHECK(pf.graph().is_cct());
}

TEST_CASE("rank-array length must match the declared rank count") {
  const char* doc = R"({
    "schema": "chopper-profile-v1",
    "ranks": 2,
    "metrics": ["time"],
    "roots": [{"frame": {"name": "main"}, "metrics": {"time": [4]}}]
  })";
  CHECK_THROWS_AS(read_canonical_text(doc), SchemaError);
  try {
    read_canonical_text(doc);
  } catch (const SchemaError& e) {
    CHECK(e.path() == "/roots/0/metrics/time");
  }
}

TEST_CASE("three-node chain with two ranks yields six rows") {
  const char* doc = R"({
    "schema": "chopper-profile-v1",
    "ranks": 2,
    "metrics": ["time"],
    "roots": [{"frame": {"name": "a"}, "metrics": {"time": [1, 1]},
      "children": [{"frame": {"name": "b"}, "metrics": {"time": [2, 2]},
        "children": [{"frame": {"name": "c"}, "metrics": {"time": [3, 3]}}]}]}]
  })";
  ProfileFrame pf = read_canonical_text(doc);
  CHECK(pf.graph().size() == 3);
  CHECK(pf.table().row_count() == 6);
}

TEST_CASE("schema violations name the offending path") {
  SUBCASE("unknown schema tag") {
    const char* doc = R"({"schema": "something-else", "ranks": 1,
      "metrics": ["time"], "roots": []})";
    CHECK_THROWS_AS(read_canonical_text(doc), SchemaError);
  }
  SUBCASE("unversioned document") {
    const char* doc = R"({"ranks": 1, "metrics": ["time"], "roots": []})";
    CHECK_THROWS_AS(read_canonical_text(doc), SchemaError);
  }
  SUBCASE("negative line") {
    const char* doc = R"({"schema": "chopper-profile-v1", "ranks": 1,
      "metrics": ["time"],
      "roots": [{"frame": {"name": "m", "line": -3},
                 "metrics": {"time": [1]}}]})";
    try {
      read_canonical_text(doc);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(e.path() == "/roots/0/frame/line");
    }
  }
  SUBCASE("undeclared metric") {
    const char* doc = R"({"schema": "chopper-profile-v1", "ranks": 1,
      "metrics": ["time"],
      "roots": [{"frame": {"name": "m"}, "metrics": {"cycles": [1]}}]})";
    CHECK_THROWS_AS(read_canonical_text(doc), SchemaError);
  }
  SUBCASE("inclusive below exclusive") {
    const char* doc = R"json({"schema": "chopper-profile-v1", "ranks": 1,
      "metrics": ["time", "time (inc)"],
      "roots": [{"frame": {"name": "m"},
                 "metrics": {"time": [5], "time (inc)": [4]}}]})json";
    CHECK_THROWS_AS(read_canonical_text(doc), SchemaError);
  }
  SUBCASE("malformed json") {
    CHECK_THROWS_AS(read_canonical_text("{not json"), ParseError);
  }
}

TEST_CASE("from_literal basics") {
  SUBCASE("main with two children") {
    Literal lit{{Frame{"main", {}, {}},
                 {{"time", {1.0, 1.0}}},
                 {{Frame{"foo", {}, {}}, {{"time", {2.0, 2.0}}}, {}},
                  {Frame{"bar", {}, {}}, {{"time", {3.0, 3.0}}}, {}}}}};
    ProfileFrame pf = from_literal(lit);
    CHECK(pf.graph().size() == 3);
    CHECK(pf.num_ranks() == 2);
  }
  SUBCASE("missing name") {
    Literal lit{{Frame{"", {}, {}}, {{"time", {1.0}}}, {}}};
    CHECK_THROWS_AS(from_literal(lit), SchemaError);
  }
  SUBCASE("inconsistent rank counts") {
    Literal lit{{Frame{"a", {}, {}},
                 {{"time", {1.0, 2.0}}},
                 {{Frame{"b", {}, {}}, {{"time", {1.0}}}, {}}}}};
    CHECK_THROWS_AS(from_literal(lit), SchemaError);
  }
  SUBCASE("same name under different parents stays distinct") {
    Literal lit{{Frame{"main", {}, {}},
                 {{"time", {1.0}}},
                 {{Frame{"a", {}, {}},
                   {{"time", {1.0}}},
                   {{Frame{"kernel", {}, {}}, {{"time", {1.0}}}, {}}}},
                  {Frame{"b", {}, {}},
                   {{"time", {1.0}}},
                   {{Frame{"kernel", {}, {}}, {{"time", {1.0}}}, {}}}}}}};
    ProfileFrame pf = from_literal(lit);
    int kernels = 0;
    for (NodeId id = 0; id < pf.graph().size(); ++id)
      if (pf.graph().frame(id).name == "kernel") ++kernels;
    CHECK(kernels == 2);
  }
}

TEST_CASE("construct_from preserves order and stems exec ids") {
  fs::path a = write_temp("chopper_in_a.json", kMinimal);
  const char* second = R"({
    "schema": "chopper-profile-v1",
    "ranks": 1,
    "metrics": ["time"],
    "roots": [{"frame": {"name": "other"}, "metrics": {"time": [9]}}]
  })";
  fs::path b = write_temp("lulesh-64.json", second);

  std::vector<ProfileSource> sources;
  sources.emplace_back(a);
  sources.emplace_back(b);
  Literal lit{{Frame{"lit", {}, {}}, {{"time", {7.0}}}, {}}};
  sources.emplace_back(lit);

  auto frames = construct_from(std::move(sources));
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].exec_id() == "chopper_in_a");
  CHECK(frames[1].exec_id() == "lulesh-64");
  CHECK(frames[2].exec_id() == "literal");
  CHECK(frames[1].table().cell("time", 0, 0) == 9.0);
}

TEST_CASE("construct_from is all-or-nothing and identifies the bad source") {
  fs::path good = write_temp("chopper_good.json", kMinimal);
  fs::path bad = write_temp("chopper_bad.bin", "not a profile at all");
  std::vector<ProfileSource> sources;
  sources.emplace_back(good);
  sources.emplace_back(bad);
  try {
    construct_from(std::move(sources));
    FAIL("expected UnknownFormat");
  } catch (const UnknownFormat& e) {
    CHECK(e.index() == 1);
  }
  CHECK_THROWS_AS(construct_from({}), InvalidArity);
}

TEST_CASE("exec_id precedence: override beats document beats stem") {
  const char* doc = R"({
    "schema": "chopper-profile-v1",
    "exec_id": "from-doc",
    "ranks": 1,
    "metrics": ["time"],
    "roots": [{"frame": {"name": "main"}, "metrics": {"time": [4]}}]
  })";
  fs::path path = write_temp("stem-name.json", doc);

  CHECK(read_canonical(path).exec_id() == "from-doc");

  std::vector<ProfileSource> sources;
  sources.emplace_back(path, "override");
  CHECK(construct_from(std::move(sources))[0].exec_id() == "override");
}

TEST_CASE("detection is a pure function of bytes and extension") {
  fs::path path = write_temp("detect-me.json", kMinimal);
  ProfileSource source(path);
  SourceKind first = detect_kind(source);
  CHECK(first == SourceKind::canonical_json);
  CHECK(detect_kind(source) == first);

  // schema tag rescues an unknown extension
  fs::path odd = write_temp("detect-me.profile", kMinimal);
  CHECK(detect_kind(ProfileSource(odd)) == SourceKind::canonical_json);

  fs::path none = write_temp("detect-none.json", "{\"other\": 1}");
  CHECK(detect_kind(ProfileSource(none)) == SourceKind::unknown);
}

TEST_CASE("construct_from of a single source equals a direct read") {
  fs::path path = write_temp("single.json", kMinimal);
  std::vector<ProfileSource> sources;
  sources.emplace_back(path);
  auto frames = construct_from(std::move(sources));
  REQUIRE(frames.size() == 1);
  CHECK(ts::frames_equal(frames[0], read_canonical(path)));
}

TEST_CASE("property: canonical write-then-read round-trips") {
  std::mt19937 rng(23);
  ts::ProfileSpec spec;
  spec.max_nodes = 25;
  spec.ranks = 3;
  spec.num_metrics = 2;
  spec.null_probability = 0.25;
  spec.max_roots = 3;
  spec.with_locations = true;
  for (int iter = 0; iter < 30; ++iter) {
    ProfileFrame pf = ts::random_profile(rng, spec);
    ProfileFrame back = read_canonical_text(write_canonical(pf), "round");
    CHECK(ts::graphs_equal(pf.graph(), back.graph()));
    CHECK(pf.table() == back.table());
    CHECK(pf.exec_id() == back.exec_id());
  }
}
