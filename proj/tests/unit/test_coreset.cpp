#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "lcg/coreset.hpp"
#include "lcg/error.hpp"
#include "support/oracles.hpp"

using namespace lcg;
using namespace lcg::testing;

namespace {

// A fitted-looking model built directly from per-point clusters and distances.
ClusterModel synthetic_model(const std::vector<std::uint32_t>& assignment, const std::vector<double>& distance,
                             std::size_t k) {
  ClusterModel m;
  m.k = k;
  m.dim = 1;
  m.centroids.assign(k, 0.0f);
  m.assignment = assignment;
  m.distance = distance;
  return m;
}

std::vector<CoreEntry> entries_of(const CoreSet& cs, std::uint32_t cluster) {
  std::vector<CoreEntry> out;
  for (const auto& e : cs.entries)
    if (e.pseudo_label == cluster) out.push_back(e);
  return out;
}

}  // namespace

TEST_CASE("three percent of a hundred is three, the three closest") {
  Rng rng(1);
  std::vector<double> d(100);
  for (auto& v : d) v = rng.uniform();
  const auto m = synthetic_model(std::vector<std::uint32_t>(100, 0), d, 1);
  const auto cs = select_coreset(m, CoresetMode::nearest_fraction, 0.03);
  REQUIRE(cs.size() == 3);
  auto sorted = d;
  std::sort(sorted.begin(), sorted.end());
  std::multiset<double> got;
  for (const auto& e : cs.entries) got.insert(e.distance);
  CHECK(got == std::multiset<double>(sorted.begin(), sorted.begin() + 3));
  for (const auto& e : cs.entries) CHECK(d[e.id] == e.distance);
}

TEST_CASE("small clusters keep at least one point") {
  const auto m = synthetic_model({0, 1, 1, 1}, {0.5, 3.0, 1.0, 2.0}, 2);
  const auto cs = select_coreset(m, CoresetMode::nearest_fraction, 0.03);
  REQUIRE(cs.size() == 2);
  CHECK(cs.entries[0] == CoreEntry{0, 0, 0.5});
  CHECK(cs.entries[1] == CoreEntry{2, 1, 1.0});
}

TEST_CASE("nearest-rank percentile with strict threshold") {
  std::vector<double> d;
  for (int i = 1; i <= 10; ++i) d.push_back(i);
  const auto m = synthetic_model(std::vector<std::uint32_t>(10, 0), d, 1);
  const auto cs = select_coreset(m, CoresetMode::distance_percentile, 90);
  REQUIRE(cs.gamma_per_cluster.size() == 1);
  CHECK(cs.gamma_per_cluster[0] == 9.0);
  REQUIRE(cs.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(cs.entries[i].distance == double(i + 1));

  SUBCASE("all-equal distances fall back to the closest point") {
    const auto flat = synthetic_model({0, 0, 0}, {2.0, 2.0, 2.0}, 1);
    const auto one = select_coreset(flat, CoresetMode::distance_percentile, 50);
    REQUIRE(one.size() == 1);
    CHECK(one.entries[0].id == 0);
  }
}

TEST_CASE("ties are broken by id and input order does not matter") {
  // Same multiset of (cluster, distance) under a permutation of ids.
  Rng rng(4);
  const std::size_t n = 300;
  std::vector<std::uint32_t> a(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = static_cast<std::uint32_t>(rng.below(3));
    d[i] = std::floor(rng.uniform() * 10) / 10;  // many ties
  }
  const auto cs = select_coreset(synthetic_model(a, d, 3), CoresetMode::nearest_fraction, 0.1);

  for (std::uint32_t c = 0; c < 3; ++c) {
    const auto chosen = entries_of(cs, c);
    std::vector<std::pair<double, RecordId>> members;
    for (std::size_t i = 0; i < n; ++i)
      if (a[i] == c) members.push_back({d[i], static_cast<RecordId>(i)});
    std::sort(members.begin(), members.end());
    const std::size_t want = std::max<std::size_t>(1, members.size() / 10);
    REQUIRE(chosen.size() == want);
    std::set<RecordId> expected;
    for (std::size_t i = 0; i < want; ++i) expected.insert(members[i].second);
    std::set<RecordId> got;
    for (const auto& e : chosen) got.insert(e.id);
    CHECK(got == expected);
  }

  // Output order is (cluster, id) regardless of how distances were laid out.
  for (std::size_t i = 1; i < cs.size(); ++i) {
    const auto& p = cs.entries[i - 1];
    const auto& q = cs.entries[i];
    CHECK((p.pseudo_label < q.pseudo_label || (p.pseudo_label == q.pseudo_label && p.id < q.id)));
  }
}

TEST_CASE("coreset and remainder partition the ids") {
  const auto b = gaussian_blobs({{0, 0}, {3, 0}, {0, 3}}, 70, 0.6, 8);
  const auto m = kmeans_fit(b.points, {.k = 3, .seed = 2});
  for (auto [mode, p] : {std::pair{CoresetMode::nearest_fraction, 0.03}, {CoresetMode::nearest_fraction, 1.0},
                         {CoresetMode::distance_percentile, 90.0}}) {
    const auto cs = select_coreset(m, mode, p);
    const auto rest = remainder_ids(cs, b.points.rows);
    CHECK(cs.size() + rest.size() == b.points.rows);
    std::set<RecordId> all;
    for (const auto& e : cs.entries) all.insert(e.id);
    for (auto id : rest) CHECK(all.insert(id).second);
    CHECK(all.size() == b.points.rows);
    for (const auto& e : cs.entries) CHECK(e.pseudo_label == m.assignment[e.id]);
  }
}

TEST_CASE("invalid parameters") {
  const auto m = synthetic_model({0, 0}, {1, 2}, 1);
  CHECK_THROWS_AS(select_coreset(m, CoresetMode::nearest_fraction, 0.0), ConfigError);
  CHECK_THROWS_AS(select_coreset(m, CoresetMode::nearest_fraction, 1.5), ConfigError);
  CHECK_THROWS_AS(select_coreset(m, CoresetMode::distance_percentile, 0.0), ConfigError);
  CHECK_THROWS_AS(select_coreset(m, CoresetMode::distance_percentile, 101), ConfigError);
  CHECK_THROWS_AS(parse_coreset_mode("random"), ConfigError);
  CHECK(parse_coreset_mode("distance_percentile") == CoresetMode::distance_percentile);
}

TEST_CASE("coreset file round trip") {
  TempDir dir;
  const auto m = synthetic_model({0, 1, 1, 0, 1}, {0.25, 0.1, 0.3, 0.125, 0.2}, 2);
  const auto cs = select_coreset(m, CoresetMode::nearest_fraction, 0.5);
  write_coreset(dir / "c.jsonl", cs);
  const auto back = read_coreset(dir / "c.jsonl", 2);
  CHECK(back.entries == cs.entries);
  CHECK_THROWS_AS(read_coreset(dir / "c.jsonl", 1), DataError);
}
