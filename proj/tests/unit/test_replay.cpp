#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "laprep/chain.hpp"
#include "laprep/error.hpp"
#include "laprep/replay.hpp"
#include "laprep/rng.hpp"
#include "paths.hpp"

using namespace laprep;
using namespace laprep::replay;

namespace {

// Trajectories whose stored "state" is the time index, so offsets are visible.
ReplayBuffer time_buffer(std::size_t trajectories, std::size_t t) {
  std::vector<StateIndex> flat;
  for (std::size_t i = 0; i < trajectories; ++i) {
    for (std::size_t s = 0; s <= t; ++s) flat.push_back(static_cast<StateIndex>(s));
  }
  return ReplayBuffer(t, flat);
}

}  // namespace

TEST_CASE("collect shapes and determinism") {
  const auto spec = grid::GridSpec::load(maze_path("fourroom"));
  const auto one = collect(spec, 1, 50, 9);
  CHECK(one.total_transitions() == 50);
  CHECK(one.num_trajectories() == 1);
  CHECK(one.trajectory(0).size() == 51);
  one.validate(spec);

  const auto a = collect(spec, 30, 50, 4);
  CHECK(a == collect(spec, 30, 50, 4));
  CHECK_FALSE(a == collect(spec, 30, 50, 5));
  CHECK(a.head(3).num_trajectories() == 3);
  CHECK(a.head(3).at(2, 7) == a.at(2, 7));
  CHECK(episodes_for(1000, 50) == 20);
  CHECK(episodes_for(1001, 50) == 21);
}

TEST_CASE("validate rejects teleports") {
  const auto spec = grid::GridSpec::parse("...\n");
  ReplayBuffer ok(2, {0, 1, 2});
  ok.validate(spec);
  ReplayBuffer bad(2, {0, 2, 2});
  CHECK_THROWS_AS(bad.validate(spec), Error);
}

TEST_CASE("empirical visitation approaches the exact stationary distribution") {
  const auto spec = grid::GridSpec::load(maze_path("fourroom"));
  const auto buffer = collect(spec, 20'000, 50, 1);
  const auto freq = empirical_distribution(buffer, spec.num_states());
  const auto model = chain::ChainModel::build(spec, {0.0, true, 50});
  double tv = 0.0;
  for (std::size_t s = 0; s < freq.size(); ++s) tv += std::abs(freq[s] - model.rho(static_cast<Eigen::Index>(s)));
  CHECK(0.5 * tv < 0.02);
  CHECK(std::abs(std::accumulate(freq.begin(), freq.end(), 0.0) - 1.0) < 1e-12);
}

TEST_CASE("sample_state") {
  Rng rng = make_stream(2, "test");
  SUBCASE("constant trajectory") {
    ReplayBuffer buffer(3, {5, 5, 5, 5});
    for (int i = 0; i < 100; ++i) CHECK(sample_state(buffer, rng) == 5);
  }
  SUBCASE("two trajectories equally likely, last state never drawn") {
    ReplayBuffer buffer(2, {0, 0, 9, 1, 1, 9});
    int zeros = 0;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) {
      const auto s = sample_state(buffer, rng);
      REQUIRE(s != 9);
      zeros += s == 0;
    }
    CHECK(std::abs(zeros / static_cast<double>(n) - 0.5) < 0.01);
  }
  SUBCASE("empty buffer") {
    ReplayBuffer empty;
    CHECK_THROWS_AS(sample_state(empty, rng), Error);
  }
}

TEST_CASE("sample_pair") {
  Rng rng = make_stream(3, "test");
  const auto buffer = time_buffer(4, 50);
  SUBCASE("lambda 0 gives consecutive states") {
    for (int i = 0; i < 10'000; ++i) {
      const auto p = sample_pair(buffer, 0.0, rng);
      CHECK(p.tau == 1);
      CHECK(p.v == p.u + 1);
    }
  }
  SUBCASE("pairs stay inside one episode") {
    for (int i = 0; i < 50'000; ++i) {
      const auto p = sample_pair(buffer, 0.9, rng);
      REQUIRE(p.tau >= 1);
      CHECK(p.v == p.u + p.tau);
      CHECK(p.v <= 50);
    }
  }
  SUBCASE("stuck sampler reports") {
    const auto short_buffer = time_buffer(1, 1);
    try {
      sample_pair(short_buffer, 0.99999, rng);
      FAIL("expected SamplingStuck");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SamplingStuck);
    }
  }
}

TEST_CASE("geometric tau law before discarding") {
  Rng rng = make_stream(4, "tau");
  const int n = 1'000'000;
  std::vector<int> counts(8, 0);
  for (int i = 0; i < n; ++i) {
    const auto tau = geometric_tau(rng, 0.9);
    REQUIRE(tau >= 1);
    if (tau < counts.size()) ++counts[tau];
  }
  for (std::size_t tau = 1; tau < counts.size(); ++tau) {
    const double expected = std::pow(0.9, static_cast<double>(tau) - 1.0) * 0.1;
    CHECK(std::abs(counts[tau] / static_cast<double>(n) - expected) < 0.003);
  }
  Rng zero = make_stream(4, "zero");
  for (int i = 0; i < 100; ++i) CHECK(geometric_tau(zero, 0.0) == 1);
}

TEST_CASE("negative pairs are independent draws") {
  Rng rng = make_stream(5, "neg");
  {
    ReplayBuffer single(1, {7, 7});
    const auto [a, b] = sample_negative_pair(single, rng);
    CHECK(a == 7);
    CHECK(b == 7);
  }
  const auto spec = grid::GridSpec::load(maze_path("fourroom"));
  const auto buffer = collect(spec, 200, 50, 5);
  const int n = 100'000;
  std::vector<double> xs(n), ys(n);
  std::vector<double> first(spec.num_states(), 0.0), second(spec.num_states(), 0.0), marginal(spec.num_states(), 0.0);
  Rng other = make_stream(6, "neg");
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = sample_negative_pair(buffer, rng);
    xs[i] = a;
    ys[i] = b;
    first[a] += 1.0 / n;
    second[b] += 1.0 / n;
    marginal[sample_state(buffer, other)] += 1.0 / n;
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 0.01);
  double tv1 = 0, tv2 = 0;
  for (std::size_t s = 0; s < first.size(); ++s) {
    tv1 += std::abs(first[s] - marginal[s]);
    tv2 += std::abs(second[s] - marginal[s]);
  }
  CHECK(0.5 * tv1 < 0.03);
  CHECK(0.5 * tv2 < 0.03);
}

TEST_CASE("csv round trip") {
  const auto spec = grid::GridSpec::load(maze_path("tworoom"));
  const auto buffer = collect(spec, 3, 50, 8);
  const auto path = std::filesystem::temp_directory_path() / "laprep_buffer_test.csv";
  buffer.save_csv(path, "0123456789abcdef");
  CHECK(ReplayBuffer::load_csv(path) == buffer);
  std::filesystem::remove(path);
}
