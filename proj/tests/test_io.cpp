#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "abstain/errors.hpp"
#include "abstain/io.hpp"

using namespace abstain;

TEST_CASE("parse_jsonl maps textual annotations") {
  std::istringstream in(
      R"({"features":[1.0,2.0],"annotation":"yes"})"
      "\n"
      R"({"features":[3.0,4.0],"annotation":"title","score":0.7})"
      "\n\n"
      R"({"features":[5.0,6.0],"annotation":"no","meta":"doc-3"})"
      "\n"
      R"({"features":[7.0,8.0],"annotation":-1})"
      "\n");
  const auto ds = parse_jsonl(in);
  REQUIRE(ds.size() == 4);
  CHECK(ds.dim() == 2);
  CHECK(ds.annotations() == std::vector<int>{1, 1, -1, -1});
  CHECK(ds[1].score == 0.7);
  CHECK(ds[2].meta == "doc-3");
}

TEST_CASE("title policy can map title to -1") {
  std::istringstream in(R"({"features":[1.0],"annotation":"title"})");
  CHECK(parse_jsonl(in, TitlePolicy::kAsNo)[0].annotation == -1);
}

TEST_CASE("malformed records report their index") {
  auto check_record = [](const std::string& text, std::size_t index) {
    std::istringstream in(text);
    try {
      parse_jsonl(in);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      REQUIRE(e.record().has_value());
      CHECK(*e.record() == index);
    }
  };
  check_record("{\"features\":[1],\"annotation\":1}\n{\"features\":[1],\"annotation\":\"maybe\"}\n", 1);
  check_record("{\"features\":[1],\"annotation\":1}\n{not json\n", 1);
  check_record("{\"annotation\":1}\n", 0);
  check_record("{\"features\":[\"x\"],\"annotation\":1}\n", 0);
  check_record("{\"features\":[1],\"annotation\":0}\n", 0);
  check_record("{\"features\":[1],\"annotation\":1,\"score\":\"high\"}\n", 0);
}

TEST_CASE("jsonl round trip preserves every field") {
  std::vector<Example> records(2);
  records[0].features = {0.1, -1e-300, 12345.678901234567};
  records[0].annotation = -1;
  records[0].score = 0.123456789012345678;
  records[1].features = {1.0 / 3.0, 2.0, 3.0};
  records[1].meta = "m";
  const auto ds = make_dataset(records);

  const auto path = std::filesystem::temp_directory_path() / "abstain_test_io.jsonl";
  write_jsonl(path, ds);
  const auto back = read_jsonl(path);
  std::filesystem::remove(path);

  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back[i].features == ds[i].features);
    CHECK(back[i].annotation == ds[i].annotation);
    CHECK(back[i].score == ds[i].score);
    CHECK(back[i].meta == ds[i].meta);
  }
}

TEST_CASE("missing file is an IoError") {
  CHECK_THROWS_AS(read_jsonl("/nonexistent/dir/data.jsonl"), IoError);
}
