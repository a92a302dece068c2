#include "doctest.h"

#include "chopper/errors.hpp"
#include "chopper/ingest.hpp"
#include "chopper/render.hpp"
#include "chopper/single_run.hpp"
#include "support.hpp"

using namespace chopper;
namespace ts = chopper::testsupport;

namespace {

ProfileFrame three_levels() {
  Literal lit{{Frame{"main", {}, {}},
               {{"time", {4.0}}},
               {{Frame{"solve", {}, {}},
                 {{"time", {3.0}}},
                 {{Frame{"kernel", {}, {}}, {{"time", {2.0}}}, {}}}},
                {Frame{"io", {}, {}}, {{"time", {1.0}}}, {}}}}};
  return from_literal(lit, "demo");
}

}  // namespace

TEST_CASE("render_tree basics") {
  RenderOptions opts;
  opts.metric = "time";

  SUBCASE("singleton") {
    Literal lit{{Frame{"main", {}, {}}, {{"time", {4.0}}}, {}}};
    CHECK(render_tree(from_literal(lit), opts) == "main 4.000\n");
  }
  SUBCASE("indentation follows depth") {
    std::string text = render_tree(three_levels(), opts);
    CHECK(text ==
          "main 4.000\n"
          "  solve 3.000\n"
          "    kernel 2.000\n"
          "  io 1.000\n");
  }
  SUBCASE("depth limit prunes to the roots") {
    opts.depth_limit = 1;
    CHECK(render_tree(three_levels(), opts) == "main 4.000\n");
  }
  SUBCASE("depth limit below one is rejected") {
    opts.depth_limit = 0;
    CHECK_THROWS_AS(render_tree(three_levels(), opts), InvalidThreshold);
  }
  SUBCASE("unknown metric") {
    opts.metric = "nope";
    CHECK_THROWS_AS(render_tree(three_levels(), opts), UnknownMetric);
  }
}

TEST_CASE("render_tree highlighting and color") {
  RenderOptions opts;
  opts.metric = "time";
  opts.highlight = {0, 1, 2};

  std::string plain = render_tree(three_levels(), opts);
  CHECK(plain ==
        "main 4.000 *\n"
        "  solve 3.000 *\n"
        "    kernel 2.000 *\n"
        "  io 1.000\n");
  CHECK(plain.find('\x1b') == std::string::npos);

  opts.color = true;
  std::string colored = render_tree(three_levels(), opts);
  CHECK(colored.find("\x1b[31m") != std::string::npos);
  CHECK(colored.find("io") > colored.find("\x1b[0m"));
}

TEST_CASE("render_tree output is byte-deterministic") {
  RenderOptions opts;
  opts.metric = "time";
  CHECK(render_tree(three_levels(), opts) ==
        render_tree(three_levels(), opts));
}

TEST_CASE("emit_table csv quoting and nulls") {
  TableView table;
  table.index_name = "exec";
  table.index = {"run \"a\"", "run,b"};
  table.columns = {"plain", "with null"};
  table.cells = {{nlohmann::json(1.5), nlohmann::json(nullptr)},
                 {nlohmann::json("x,y"), nlohmann::json(2.0)}};

  std::string csv = emit_table(table, TableFormat::csv);
  CHECK(csv ==
        "exec,plain,with null\n"
        "\"run \"\"a\"\"\",1.5,\n"
        "\"run,b\",\"x,y\",2.0\n");
}

TEST_CASE("emit_table json keeps nulls and row keys") {
  TableView table;
  table.index_name = "exec";
  table.index = {"r1"};
  table.columns = {"a", "b"};
  table.cells = {{nlohmann::json(2.0), nlohmann::json(nullptr)}};
  std::string text = emit_table(table, TableFormat::json);
  auto doc = nlohmann::json::parse(text);
  CHECK(doc["r1"]["a"] == 2.0);
  CHECK(doc["r1"]["b"].is_null());
}

TEST_CASE("emit_table tty aligns and formats") {
  TableView table;
  table.index_name = "name";
  table.index = {"alpha", "b"};
  table.columns = {"time"};
  table.cells = {{nlohmann::json(1.0)}, {nlohmann::json(12.3456)}};
  std::string tty = emit_table(table, TableFormat::tty);
  CHECK(tty ==
        "name     time\n"
        "alpha   1.000\n"
        "b      12.346\n");
}

TEST_CASE("a four-run three-function pivot makes a five-line csv") {
  std::vector<ProfileFrame> pfs;
  for (int i = 1; i <= 4; ++i) {
    Literal lit{{Frame{"main", {}, {}},
                 {{"time", {1.0 * i}}},
                 {{Frame{"a", {}, {}}, {{"time", {2.0 * i}}}, {}},
                  {Frame{"b", {}, {}}, {{"time", {0.5 * i}}}, {}}}}};
    pfs.push_back(from_literal(lit, "run" + std::to_string(i)));
  }
  PivotTable pivot = multirun_analysis(pfs);
  std::string csv = emit_table(to_table(pivot), TableFormat::csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("imbalance lowering carries the verbose list columns") {
  Literal lit{{Frame{"n", {}, {}}, {{"time", {1.0, 2.0, 3.0, 6.0}}}, {}}};
  ImbalanceResult result =
      load_imbalance(from_literal(lit), "time", {}, true);
  TableView table = to_table(result);
  CHECK(table.columns ==
        std::vector<std::string>{"name", "time.max", "time.mean",
                                 "time.imbalance", "time.ranks",
                                 "time.percentiles", "time.hist"});
  std::string csv = emit_table(table, TableFormat::csv);
  // the rank list lands in one quoted field
  CHECK(csv.find("\"[3,2,1,0]\"") != std::string::npos);
  std::string tty = emit_table(table, TableFormat::tty, 2);
  CHECK(tty.find("[3, 2, 1, 0]") != std::string::npos);
}

TEST_CASE("format_fixed never prints negative zero") {
  CHECK(format_fixed(-0.0, 3) == "0.000");
  CHECK(format_fixed(1.0 / 3.0, 3) == "0.333");
  CHECK(format_fixed(-1.5, 2) == "-1.50");
}
