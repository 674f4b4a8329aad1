#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "abstain/core.hpp"
#include "abstain/errors.hpp"

using namespace abstain;

namespace {

Dataset small_dataset(std::size_t n, std::size_t dim = 2) {
  std::vector<Example> records;
  for (std::size_t i = 0; i < n; ++i) {
    Example e;
    e.features.assign(dim, static_cast<double>(i));
    e.annotation = (i % 3 == 0) ? -1 : 1;
    records.push_back(e);
  }
  return make_dataset(std::move(records));
}

}  // namespace

TEST_CASE("make_dataset infers dim and positive rate") {
  std::vector<Example> records(4);
  for (auto& r : records) r.features = {0.1, 0.2, 0.3};
  records[0].annotation = -1;
  const auto ds = make_dataset(records);
  CHECK(ds.size() == 4);
  CHECK(ds.dim() == 3);
  CHECK(ds.positive_rate() == doctest::Approx(0.75));
  CHECK_FALSE(ds.has_scores());
}

TEST_CASE("make_dataset rejects bad records and names them") {
  std::vector<Example> records(3);
  for (auto& r : records) r.features = {1.0, 2.0};
  records[1].features = {1.0};
  try {
    make_dataset(records);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(e.record().has_value());
    CHECK(*e.record() == 1);
  }

  records[1].features = {1.0, 2.0};
  records[2].annotation = 0;
  CHECK_THROWS_AS(make_dataset(records), ValidationError);

  records[2].annotation = 1;
  records[0].features[0] = std::nan("");
  CHECK_THROWS_AS(make_dataset(records), ValidationError);

  records[0].features[0] = 0.0;
  records[0].score = INFINITY;
  CHECK_THROWS_AS(make_dataset(records), ValidationError);

  CHECK_THROWS_AS(make_dataset({}), ValidationError);
}

TEST_CASE("subset keeps the requested order") {
  const auto ds = small_dataset(6);
  const std::vector<std::size_t> idx{4, 1};
  const auto sub = ds.subset(idx);
  REQUIRE(sub.size() == 2);
  CHECK(sub[0].features[0] == 4.0);
  CHECK(sub[1].features[0] == 1.0);
}

TEST_CASE("make_params derived constants") {
  const auto p = make_params(0.05, 2.0);
  CHECK(p.i_bar() == doctest::Approx(0.4853995605358224672837619552).epsilon(1e-14));
  CHECK(p.beta() == doctest::Approx(9.707991210716449345675239104).epsilon(1e-14));
  CHECK(p.gamma() == doctest::Approx(0.09338819768540808195849270786).epsilon(1e-14));
  CHECK(p.constraint_satisfied());

  const auto free_beta = make_params(0.05, 2.0, 1.0);
  CHECK(free_beta.beta() == 1.0);
  CHECK_FALSE(free_beta.constraint_satisfied());
}

TEST_CASE("make_params validation") {
  CHECK_THROWS_AS(make_params(0.05, 0.0), ValidationError);
  CHECK_THROWS_AS(make_params(0.05, -1.0), ValidationError);
  CHECK_THROWS_AS(make_params(0.0, 2.0), ValidationError);
  CHECK_THROWS_AS(make_params(1.0, 2.0), ValidationError);
  CHECK_THROWS_AS(make_params(1.5, 2.0), ValidationError);
  CHECK_THROWS_AS(make_params(0.05, 2.0, -1.0), ValidationError);
}

TEST_CASE("solved beta satisfies the constraint and grows with alpha") {
  for (double c = 0.01; c < 1.0; c += 0.01) {
    double previous = 0.0;
    for (double alpha = 0.5; alpha <= 8.0; alpha += 0.5) {
      const auto p = make_params(c, alpha);
      CHECK(p.constraint_satisfied());
      CHECK(p.beta() > previous);
      previous = p.beta();
    }
  }
}

TEST_CASE("kfold_split balances and partitions") {
  const auto eight = kfold_split(small_dataset(8), 4, 1);
  CHECK(eight.sizes() == std::vector<std::size_t>{2, 2, 2, 2});

  const auto ten = kfold_split(small_dataset(10), 4, 1);
  auto sizes = ten.sizes();
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{2, 2, 3, 3});

  std::set<std::size_t> seen;
  for (std::size_t f = 0; f < ten.k; ++f) {
    const auto test = ten.test_indices(f);
    const auto train = ten.train_indices(f);
    CHECK(test.size() + train.size() == 10);
    for (auto i : test) {
      CHECK(seen.insert(i).second);
      CHECK(std::find(train.begin(), train.end(), i) == train.end());
    }
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("kfold_split is deterministic per seed") {
  const auto ds = small_dataset(50);
  CHECK(kfold_split(ds, 5, 42).assignments == kfold_split(ds, 5, 42).assignments);
  CHECK(kfold_split(ds, 5, 42).assignments != kfold_split(ds, 5, 43).assignments);
}

TEST_CASE("kfold_split rejects bad k") {
  const auto ds = small_dataset(3);
  CHECK_THROWS_AS(kfold_split(ds, 1, 0), ValidationError);
  CHECK_THROWS_AS(kfold_split(ds, 4, 0), ValidationError);
  CHECK_NOTHROW(kfold_split(ds, 3, 0));
}

TEST_CASE("train_validation_split") {
  const auto ds = small_dataset(2000);
  const auto split = train_validation_split(ds, 500, 3);
  CHECK(split.train.size() == 1500);
  CHECK(split.validation.size() == 500);
  std::vector<std::size_t> all = split.train;
  all.insert(all.end(), split.validation.begin(), split.validation.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(2000);
  std::iota(expected.begin(), expected.end(), std::size_t{0});
  CHECK(all == expected);
  CHECK_THROWS_AS(train_validation_split(ds, 2000, 3), ValidationError);
  CHECK_THROWS_AS(train_validation_split(ds, 0, 3), ValidationError);
}
