#include <doctest.h>

#include <charconv>

#include "cmokg/plot.hpp"
#include "cmokg/report.hpp"

using namespace cmokg;

TEST_SUITE_BEGIN("report");

TEST_CASE("doubles format to shortest round-trip text") {
  for (double v : {0.1, 1.0 / 3.0, 66.0, -1.25e-7, 0.0}) {
    std::string s = format_double(v);
    double back = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(ec == std::errc());
    REQUIRE(ptr == s.data() + s.size());
    CHECK(back == v);
  }
  CHECK(format_double(66.0) == "66");
}

TEST_CASE("csv fields quote only when needed") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a;b") == "a;b");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("trace csv rows carry the fixed schema") {
  RunSummary run;
  run.problem_seed = 42;
  run.mode = Mode::BenchmarkBoth;
  IterationRecord rec;
  rec.iteration = 3;
  rec.location = Eigen::Vector2d(0.25, 0.75);
  rec.objective = kAllObjectives;
  rec.values = {1.5, -2.5};
  rec.cost = 11.0;
  rec.cumulative_cost = 99.0;
  run.trace.records.push_back(rec);
  IterationRecord single = rec;
  single.iteration = 4;
  single.objective = 0;
  single.values = {0.5};
  single.cost = 1.0;
  single.cumulative_cost = 100.0;
  run.trace.records.push_back(single);

  std::vector<RunSummary> runs = {run};
  std::string csv = trace_csv(runs);
  CHECK(csv.find("run_seed,mode,iter,x1,x2,m,y,cost,cum_cost\n") == 0);
  CHECK(csv.find("42,benchmark-both,3,0.25,0.75,ALL,1.5;-2.5,11,99\n") != std::string::npos);
  CHECK(csv.find("42,benchmark-both,4,0.25,0.75,1,0.5,1,100\n") != std::string::npos);
}

TEST_CASE("aggregate csv leaves the CI empty for single runs") {
  AggregateRow row;
  row.mode = Mode::CmokgExpectation;
  row.checkpoint = 66.0;
  row.mean_regret = 0.5;
  row.n_runs = 1;
  row.has_ci = false;
  std::vector<AggregateRow> rows = {row};
  std::string csv = aggregate_csv(rows);
  CHECK(csv.find("cmokg-expectation,66,0.5,,1\n") != std::string::npos);
}

TEST_CASE("aggregate csv parses back into series") {
  std::string csv =
      "mode,checkpoint_cost,mean_regret,ci95_halfwidth,n_runs\n"
      "alpha,25,1.5,0.2,5\n"
      "alpha,50,1.0,0.1,5\n"
      "beta,25,2.0,0.4,5\n"
      "beta,50,1.8,0.3,5\n";
  ParsedAggregate parsed = parse_aggregate_csv(csv);
  REQUIRE(parsed.series.size() == 2);
  CHECK(parsed.series[0].label == "alpha");
  CHECK(parsed.series[0].x == std::vector<double>{25, 50});
  CHECK(parsed.series[0].ci == std::vector<double>{0.2, 0.1});
  CHECK(parsed.warnings.empty());

  std::string svg = render_regret_svg(parsed.series);
  CHECK(svg == render_regret_svg(parsed.series));  // deterministic bytes
  size_t lines = 0, bands = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++lines;
    pos += 9;
  }
  pos = 0;
  while ((pos = svg.find("<polygon", pos)) != std::string::npos) {
    ++bands;
    pos += 8;
  }
  CHECK(lines == 2);
  CHECK(bands == 2);
  CHECK(svg.find("cumulative cost") != std::string::npos);
  CHECK(svg.find("mean Bayesian regret") != std::string::npos);
}

TEST_CASE("missing CI values drop the band with a warning") {
  std::string csv =
      "mode,checkpoint_cost,mean_regret,ci95_halfwidth,n_runs\n"
      "alpha,25,1.5,,1\n"
      "alpha,50,1.0,,1\n";
  ParsedAggregate parsed = parse_aggregate_csv(csv);
  REQUIRE(parsed.series.size() == 1);
  CHECK(parsed.series[0].ci.empty());
  CHECK(!parsed.warnings.empty());
  std::string svg = render_regret_svg(parsed.series);
  CHECK(svg.find("<polygon") == std::string::npos);
}

TEST_CASE("empty aggregate input is an error") {
  CHECK_THROWS(parse_aggregate_csv(""));
  CHECK_THROWS(parse_aggregate_csv("mode,checkpoint_cost,mean_regret,ci95_halfwidth,n_runs\n"));
}

TEST_CASE("fnv1a matches known vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_SUITE_END();
