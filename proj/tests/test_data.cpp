#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "adasdbo/data.hpp"
#include "adasdbo/errors.hpp"

using namespace adasdbo;
namespace fs = std::filesystem;

TEST_CASE("synthetic generator matches its distribution parameters") {
  RngSpec spec{123, "gen-test"};
  const std::size_t per_agent = 4000, p = 6;
  const double r = 0.8;
  const SyntheticDataset data = generate_synthetic(3, p, per_agent, 100, r, spec);

  REQUIRE(data.agents.size() == 3);
  REQUIRE(data.ground_truth.size() == p);

  for (std::size_t i = 0; i < 3; ++i) {
    const Dataset& d = data.agents[i].train;
    REQUIRE(d.size() == per_agent);
    // Empirical per-coordinate std close to (i+1) * r.
    double sum_sq = 0.0;
    for (double x : d.features) sum_sq += x * x;
    const double std_hat = std::sqrt(sum_sq / static_cast<double>(d.features.size()));
    const double want = static_cast<double>(i + 1) * r;
    CHECK(std_hat == doctest::Approx(want).epsilon(0.05));

    // Label residuals against the ground truth have std about 0.1.
    double resid_sq = 0.0;
    for (std::size_t e = 0; e < d.size(); ++e) {
      const auto xr = d.row(e);
      double signal = 0.0;
      for (std::size_t k = 0; k < p; ++k) signal += xr[k] * data.ground_truth[k];
      const double resid = d.labels[e] - signal;
      resid_sq += resid * resid;
    }
    const double resid_std = std::sqrt(resid_sq / static_cast<double>(d.size()));
    CHECK(resid_std == doctest::Approx(0.1).epsilon(0.10));
  }
}

TEST_CASE("doubling r doubles the feature scale") {
  RngSpec spec{9, "r-scale"};
  const auto a = generate_synthetic(2, 4, 2000, 10, 1.0, spec);
  const auto b = generate_synthetic(2, 4, 2000, 10, 2.0, spec);
  double sa = 0.0, sb = 0.0;
  for (double x : a.agents[1].train.features) sa += x * x;
  for (double x : b.agents[1].train.features) sb += x * x;
  CHECK(std::sqrt(sb / sa) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("same RngSpec reproduces bitwise-identical datasets") {
  RngSpec spec{77, "identical"};
  const auto a = generate_synthetic(2, 5, 50, 50, 1.5, spec);
  const auto b = generate_synthetic(2, 5, 50, 50, 1.5, spec);
  CHECK(a.ground_truth == b.ground_truth);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.agents[i].train.features == b.agents[i].train.features);
    CHECK(a.agents[i].train.labels == b.agents[i].train.labels);
    CHECK(a.agents[i].validation.features == b.agents[i].validation.features);
  }
}

TEST_CASE("generator argument validation") {
  RngSpec spec{1, ""};
  CHECK_THROWS_AS(generate_synthetic(0, 4, 10, 10, 1.0, spec), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(2, 4, 0, 10, 1.0, spec), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(2, 4, 10, 10, 0.0, spec), std::invalid_argument);
}

TEST_CASE("idx parsing of a hand-crafted file") {
  const auto dir = testsupport::fresh_temp_dir("idx");
  const std::string img = (dir / "img.idx").string(), lab = (dir / "lab.idx").string();
  testsupport::write_idx(img, lab, 2, 2, 2, {0, 255, 128, 64, 10, 20, 30, 40}, {1, 0});

  const Dataset d = load_idx(img, lab);
  REQUIRE(d.size() == 2);
  REQUIRE(d.feature_dim == 4);
  CHECK(d.features[0] == 0.0);
  CHECK(d.features[1] == 1.0);
  CHECK(d.features[2] == doctest::Approx(128.0 / 255.0));
  CHECK(d.features[3] == doctest::Approx(64.0 / 255.0));
  CHECK(d.class_labels[0] == 1);
  CHECK(d.class_labels[1] == 0);
  fs::remove_all(dir);
}

TEST_CASE("idx round-trips against the test writer") {
  const auto dir = testsupport::fresh_temp_dir("idx-rt");
  const std::string img = (dir / "img.idx").string(), lab = (dir / "lab.idx").string();
  std::vector<unsigned char> pixels(5 * 9);
  std::vector<unsigned char> labels(5);
  Rng rng(5, "idx-bytes");
  for (auto& b : pixels) b = static_cast<unsigned char>(rng.index(256));
  for (auto& l : labels) l = static_cast<unsigned char>(rng.index(10));
  testsupport::write_idx(img, lab, 5, 3, 3, pixels, labels);

  const Dataset d = load_idx(img, lab);
  REQUIRE(d.size() == 5);
  for (std::size_t i = 0; i < pixels.size(); ++i)
    CHECK(d.features[i] == doctest::Approx(pixels[i] / 255.0).epsilon(1e-15));
  for (std::size_t i = 0; i < 5; ++i) CHECK(d.class_labels[i] == labels[i]);
  fs::remove_all(dir);
}

TEST_CASE("idx rejects malformed files") {
  const auto dir = testsupport::fresh_temp_dir("idx-bad");
  const std::string img = (dir / "img.idx").string(), lab = (dir / "lab.idx").string();

  SUBCASE("empty payload with count zero parses") {
    testsupport::write_idx(img, lab, 0, 2, 2, {}, {});
    const Dataset d = load_idx(img, lab);
    CHECK(d.size() == 0);
  }
  SUBCASE("image magic on the label file") {
    testsupport::write_idx(img, lab, 1, 1, 1, {42}, {1});
    // Swap the arguments: label file parsed as images has the wrong magic.
    CHECK_THROWS_AS(load_idx(lab, img), ParseError);
  }
  SUBCASE("count mismatch") {
    testsupport::write_idx(img, (dir / "extra.idx").string(), 1, 1, 1, {42}, {1});
    testsupport::write_idx((dir / "img2.idx").string(), lab, 2, 1, 1, {4, 5}, {0, 1});
    CHECK_THROWS_AS(load_idx(img, lab), ParseError);
  }
  SUBCASE("truncated pixel payload") {
    testsupport::write_idx(img, lab, 2, 2, 2, {1, 2, 3, 4, 5}, {0, 1});  // 3 bytes short
    CHECK_THROWS_AS(load_idx(img, lab), ParseError);
  }
  fs::remove_all(dir);
}

namespace {

Dataset toy_dataset(std::size_t n, int classes) {
  Dataset d;
  d.feature_dim = 2;
  d.num_classes = classes;
  for (std::size_t i = 0; i < n; ++i) {
    d.features.push_back(static_cast<double>(i));
    d.features.push_back(static_cast<double>(2 * i));
    d.class_labels.push_back(static_cast<int>(i) % classes);
  }
  return d;
}

}  // namespace

TEST_CASE("equal partition sizes") {
  Rng rng(1, "partition");
  const Dataset ten = toy_dataset(10, 2);
  auto shards = partition(ten, 5, PartitionPolicy::equal, 0.0, rng);
  for (const Dataset& s : shards) CHECK(s.size() == 2);

  const Dataset eleven = toy_dataset(11, 2);
  shards = partition(eleven, 5, PartitionPolicy::equal, 0.0, rng);
  CHECK(shards[0].size() == 3);
  for (std::size_t i = 1; i < 5; ++i) CHECK(shards[i].size() == 2);
}

TEST_CASE("partition shards are disjoint and cover the input") {
  Rng rng(2, "partition-cover");
  const Dataset data = toy_dataset(23, 3);
  for (auto policy : {PartitionPolicy::equal, PartitionPolicy::by_class_skew}) {
    auto shards = partition(data, 4, policy, 0.5, rng);
    // Multiset equality via the first feature coordinate, which is unique.
    std::multiset<double> seen;
    std::size_t total = 0;
    for (const Dataset& s : shards) {
      total += s.size();
      for (std::size_t e = 0; e < s.size(); ++e) seen.insert(s.row(e)[0]);
    }
    CHECK(total == data.size());
    std::multiset<double> want;
    for (std::size_t e = 0; e < data.size(); ++e) want.insert(data.row(e)[0]);
    CHECK(seen == want);
  }
}

TEST_CASE("csv export writes feature columns then the label column") {
  const auto dir = testsupport::fresh_temp_dir("csv-export");
  Dataset d;
  d.feature_dim = 2;
  d.features = {0.5, -1.25, 3.0, 0.0};
  d.labels = {2.5, -7.0};
  const std::string path = (dir / "data.csv").string();
  export_csv(d, path);

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "0.5,-1.25,2.5");
  REQUIRE(std::getline(in, line));
  CHECK(line == "3,0,-7");
  fs::remove_all(dir);
}

TEST_CASE("class skew sends the requested share home") {
  Rng rng(3, "partition-skew");
  Dataset d;
  d.feature_dim = 1;
  d.num_classes = 4;
  for (int c = 0; c < 4; ++c)
    for (int k = 0; k < 40; ++k) {
      d.features.push_back(c * 100.0 + k);
      d.class_labels.push_back(c);
    }
  auto shards = partition(d, 4, PartitionPolicy::by_class_skew, 0.3, rng);
  for (int c = 0; c < 4; ++c) {
    std::size_t at_home = 0;
    const Dataset& home = shards[c];
    for (std::size_t e = 0; e < home.size(); ++e)
      if (home.class_labels[e] == c) ++at_home;
    CHECK(at_home >= static_cast<std::size_t>(0.3 * 40));
  }
  CHECK_THROWS_AS(partition(d, 4, PartitionPolicy::by_class_skew, 1.5, rng),
                  std::invalid_argument);
}
