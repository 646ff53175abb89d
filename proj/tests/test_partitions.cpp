#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "bgsol/partition.hpp"
#include "bgsol/samplers.hpp"

using namespace bgsol;

namespace {

Partition naive_q1(const Partition& s) {
  std::vector<i64> v;
  for (i64 k : s.piles()) v.push_back(k - 1);
  v.push_back(s.length());
  return ord(std::move(v));
}

// Partition counts via Euler's pentagonal-number recurrence; independent of
// the enumerator under test.
std::vector<i64> partition_counts(i64 up_to) {
  std::vector<i64> p(static_cast<std::size_t>(up_to) + 1, 0);
  p[0] = 1;
  for (i64 n = 1; n <= up_to; ++n) {
    i64 total = 0;
    for (i64 k = 1;; ++k) {
      const i64 g1 = k * (3 * k - 1) / 2;
      const i64 g2 = k * (3 * k + 1) / 2;
      if (g1 > n && g2 > n) break;
      const i64 sign = (k % 2 == 1) ? 1 : -1;
      if (g1 <= n) total += sign * p[static_cast<std::size_t>(n - g1)];
      if (g2 <= n) total += sign * p[static_cast<std::size_t>(n - g2)];
    }
    p[static_cast<std::size_t>(n)] = total;
  }
  return p;
}

}  // namespace

TEST_CASE("ord sorts descending and drops zeros", "[partitions]") {
  CHECK(ord({2, 1, 0, 3}) == Partition{3, 2, 1});
  CHECK(ord({0, 0, 0}) == Partition{});
  CHECK(ord({6, 4, 2, 1, 0, 0, 6}) == Partition{6, 6, 4, 2, 1});
  CHECK_THROWS_AS(ord({1, -2}), std::invalid_argument);
}

TEST_CASE("ord is idempotent and permutation-invariant", "[partitions]") {
  RngStream rng(7101);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<i64> v;
    const int len = static_cast<int>(rng.uniform_int(0, 12));
    for (int i = 0; i < len; ++i) v.push_back(rng.uniform_int(0, 9));
    const Partition once = ord(v);
    CHECK(ord(once.piles()) == once);
    std::shuffle(v.begin(), v.end(),
                 std::mt19937_64(static_cast<u64>(rep)));
    CHECK(ord(v) == once);
  }
}

TEST_CASE("q1_move matches the definition", "[partitions]") {
  CHECK(q1_move(Partition{3, 2, 1}) == Partition{3, 2, 1});
  CHECK(q1_move(Partition{1, 1, 1}) == Partition{3});
  const Partition s{7, 5, 3, 2, 1, 1};
  const Partition next = q1_move(s);
  CHECK(next == Partition{6, 6, 4, 2, 1});
  CHECK(next.total() == 19);
  CHECK(q1_move(Partition{}) == Partition{});
}

TEST_CASE("q1_move merge pass agrees with sort-based oracle", "[partitions]") {
  RngStream rng(20261);
  for (int rep = 0; rep < 5000; ++rep) {
    const i64 n = rng.uniform_int(1, 200);
    const Partition s = random_partition(n, rng);
    CHECK(q1_move(s) == naive_q1(s));
  }
}

TEST_CASE("staircases are fixed points of q1_move", "[partitions]") {
  for (i64 k = 1; k <= 300; ++k) {
    const Partition t = staircase(k);
    REQUIRE(q1_move(t) == t);
  }
}

TEST_CASE("qp_move with p=1 equals q1_move", "[partitions]") {
  RngStream rng(88);
  for (int rep = 0; rep < 200; ++rep) {
    const Partition s = random_partition(rng.uniform_int(1, 120), rng);
    BernoulliField field(1.0, static_cast<u64>(rep));
    CHECK(qp_move(s, field) == q1_move(s));
  }
}

TEST_CASE("qp_move conserves the number of cards", "[partitions]") {
  RngStream rng(3);
  const double ps[] = {0.2, 0.5, 0.9, 1.0};
  int moves = 0;
  for (double p : ps) {
    BernoulliField field(p, 515 + static_cast<u64>(p * 100));
    Partition s = random_partition(400, rng);
    const i64 n = s.total();
    for (int i = 0; i < 3000; ++i) {
      s = qp_move(s, field);
      ++moves;
      REQUIRE(s.total() == n);
    }
  }
  CHECK(moves >= 10000);
}

TEST_CASE("qp_move step bounds on pile count and largest pile", "[partitions]") {
  RngStream rng(99);
  BernoulliField field(0.5, 1234);
  for (int rep = 0; rep < 2000; ++rep) {
    const Partition s = random_partition(rng.uniform_int(1, 150), rng);
    const Partition next = qp_move(s, field);
    CHECK(next.length() - s.length() <= 1);
    CHECK(next.largest() <= std::max(s.largest(), s.length()));
  }
}

TEST_CASE("transition distribution on tiny states", "[partitions]") {
  SECTION("S=(1,1), p=1/2") {
    const auto dist = qp_transition_distribution(Partition{1, 1}, 0.5);
    REQUIRE(dist.size() == 2);
    CHECK_THAT(dist.at(Partition{1, 1}), Catch::Matchers::WithinAbs(0.75, 1e-15));
    CHECK_THAT(dist.at(Partition{2}), Catch::Matchers::WithinAbs(0.25, 1e-15));
  }
  SECTION("S=(3), p=1/2") {
    const auto dist = qp_transition_distribution(Partition{3}, 0.5);
    REQUIRE(dist.size() == 2);
    CHECK_THAT(dist.at(Partition{3}), Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(dist.at(Partition{2, 1}), Catch::Matchers::WithinAbs(0.5, 1e-15));
  }
  SECTION("p=1 is the point mass at q1_move(S)") {
    RngStream rng(17);
    for (int rep = 0; rep < 50; ++rep) {
      const Partition s = random_partition(rng.uniform_int(1, 30), rng);
      if (s.length() > 24) continue;
      const auto dist = qp_transition_distribution(s, 1.0);
      REQUIRE(dist.size() == 1);
      CHECK(dist.begin()->first == q1_move(s));
      CHECK_THAT(dist.begin()->second, Catch::Matchers::WithinAbs(1.0, 1e-15));
    }
  }
}

TEST_CASE("transition distribution sums to one", "[partitions]") {
  RngStream rng(404);
  const double ps[] = {0.3, 0.5, 0.8};
  for (double p : ps) {
    for (int rep = 0; rep < 60; ++rep) {
      Partition s = random_partition(rng.uniform_int(1, 40), rng);
      if (s.length() > 18) continue;
      const auto dist = qp_transition_distribution(s, p);
      double total = 0.0;
      for (const auto& [state, prob] : dist) {
        CHECK(prob >= 0.0);
        CHECK(state.total() == s.total());
        total += prob;
      }
      CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
  }
  CHECK_THROWS_AS(qp_transition_distribution(ord(std::vector<i64>(25, 1)), 0.5),
                  guard_error);
}

TEST_CASE("qp_move frequencies match the exact kernel", "[partitions]") {
  const int draws = 40000;
  int merged = 0;
  BernoulliField field(0.5, 991);
  for (int i = 0; i < draws; ++i)
    if (qp_move(Partition{1, 1}, field) == Partition{2}) ++merged;
  const double freq = static_cast<double>(merged) / draws;
  const double se = std::sqrt(0.25 * 0.75 / draws);
  CHECK(std::abs(freq - 0.25) <= 4.0 * se);
}

TEST_CASE("rho examples and metric axioms", "[partitions]") {
  CHECK(rho(Partition{3, 2, 1}, Partition{3, 2, 1}) == 0);
  CHECK(rho(Partition{3, 1}, Partition{2, 2}) == 1);
  CHECK(rho(Partition{5, 3, 2, 1}, Partition{4, 4, 3}) == 1);

  RngStream rng(5150);
  for (int rep = 0; rep < 1200; ++rep) {
    const Partition a = random_partition(rng.uniform_int(0, 60), rng);
    const Partition b = random_partition(rng.uniform_int(0, 60), rng);
    const Partition c = random_partition(rng.uniform_int(0, 60), rng);
    CHECK(rho(a, b) >= 0);
    CHECK((rho(a, b) == 0) == (a == b));
    CHECK(rho(a, b) == rho(b, a));
    CHECK(rho(a, c) <= rho(a, b) + rho(b, c));
  }
}

TEST_CASE("triangular target profiles", "[partitions]") {
  CHECK(triangular_target(1.0, 10).profile == Partition{4, 3, 2, 1});

  const Partition half = triangular_target(0.5, 100).profile;
  REQUIRE(half.length() == 19);
  CHECK(half.pile(1) == 10);
  CHECK(half.pile(2) == 9);
  CHECK(half.pile(3) == 9);
  CHECK(half.pile(4) == 8);
  CHECK(half.pile(5) == 8);

  for (i64 k = 1; k <= 60; ++k)
    CHECK(triangular_target(1.0, k * (k + 1) / 2).profile == staircase(k));

  SECTION("asymptotic size of the profile") {
    const double ps[] = {0.3, 0.5, 1.0};
    for (double p : ps) {
      for (i64 n : {1000, 10000, 100000}) {
        const TriangularTarget t = triangular_target(p, n);
        const double nd = static_cast<double>(n);
        CHECK(std::abs(static_cast<double>(t.profile.largest()) - std::sqrt(2 * nd * p)) <= 2.0);
        CHECK(std::abs(static_cast<double>(t.profile.length()) - std::sqrt(2 * nd / p)) <=
              1.0 / p + 2.0);
      }
    }
  }
}

TEST_CASE("near-triangular configuration t0", "[partitions]") {
  CHECK(t0_config(11) == Partition{5, 3, 2, 1});
  CHECK(t0_config(6) == Partition{3, 2, 1});
  CHECK(t0_config(8) == Partition{4, 3, 1});
  for (i64 n = 1; n <= 400; ++n) CHECK(t0_config(n).total() == n);
}

TEST_CASE("rough-triangle membership", "[partitions]") {
  CHECK(in_rough_triangle(Partition{4, 3, 2, 1}, 0.1, 1.0));
  CHECK_FALSE(in_rough_triangle(Partition{10}, 0.1, 1.0));
  CHECK(in_rough_triangle(t0_config(11), 0.4, 1.0));
}

TEST_CASE("nondegeneracy of the target ball", "[partitions]") {
  CHECK(is_nondegenerate(0.5, 10000));
  CHECK_FALSE(is_nondegenerate(0.01, 10));
  // For fixed eps the condition holds for every large enough n.
  for (i64 n = 100; n <= 2000; ++n) CHECK(is_nondegenerate(0.3, n));
}

TEST_CASE("reasonable-set membership", "[partitions]") {
  CHECK(in_g(Partition{3, 2, 1}, 2.0, 2.0));
  for (i64 n : {4, 9, 100}) {
    std::vector<i64> single{n};
    CHECK_FALSE(in_g(Partition::from_sorted(std::move(single)), 1.0, 1.0));
  }
  for (i64 n : {1, 2, 5, 11, 50, 1234, 100000}) CHECK(in_g(t0_config(n), 2.0, 2.0));
}

TEST_CASE("partial order on profiles", "[partitions]") {
  CHECK(leq(Partition{3, 2, 1}, Partition{4, 2, 1}));
  CHECK_FALSE(leq(Partition{3, 2, 1}, Partition{3, 2}));
  CHECK_FALSE(leq(Partition{2, 2}, Partition{3, 1}));
  RngStream rng(77);
  for (int rep = 0; rep < 300; ++rep) {
    const Partition a = random_partition(rng.uniform_int(0, 40), rng);
    CHECK(leq(a, a));
  }
}

TEST_CASE("partition enumeration", "[partitions]") {
  const auto p3 = enumerate_partitions(3);
  REQUIRE(p3.size() == 3);
  CHECK(p3[0] == Partition{3});
  CHECK(p3[1] == Partition{2, 1});
  CHECK(p3[2] == Partition{1, 1, 1});

  CHECK(enumerate_partitions(6).size() == 11);
  CHECK(enumerate_partitions(20).size() == 627);

  SECTION("counts match the pentagonal recurrence") {
    const auto counts = partition_counts(28);
    for (i64 n = 0; n <= 28; ++n) {
      const auto all = enumerate_partitions(n);
      CHECK(static_cast<i64>(all.size()) == counts[static_cast<std::size_t>(n)]);
      std::set<Partition> uniq(all.begin(), all.end());
      CHECK(uniq.size() == all.size());
      for (const auto& s : all) CHECK(s.total() == n);
      for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i] < all[i - 1]);
    }
  }

  CHECK_THROWS_AS(enumerate_partitions(41), guard_error);
}

TEST_CASE("canonical text round-trips", "[partitions]") {
  CHECK(render_partition(Partition{5, 3, 2, 1}) == "5,3,2,1");
  CHECK(render_partition(Partition{}) == "");
  CHECK(parse_partition("5,3,2,1") == Partition{5, 3, 2, 1});
  CHECK(parse_partition("") == Partition{});
  CHECK(parse_partition("1,2") == Partition{2, 1});
  CHECK_THROWS_AS(parse_partition("3,,1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_partition("3,-1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_partition("3,"), std::invalid_argument);
  CHECK_THROWS_AS(parse_partition("a"), std::invalid_argument);
  CHECK_THROWS_AS(parse_partition("0"), std::invalid_argument);

  RngStream rng(31337);
  for (int rep = 0; rep < 400; ++rep) {
    const Partition s = random_partition(rng.uniform_int(0, 80), rng);
    CHECK(parse_partition(render_partition(s)) == s);
  }
}

TEST_CASE("bernoulli field validation and stream determinism", "[partitions]") {
  CHECK_THROWS_AS(BernoulliField(0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(BernoulliField(-0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(BernoulliField(1.5, 1), std::invalid_argument);

  SECTION("identical seeds give identical move sequences") {
    for (double p : {0.3, 0.7}) {
      BernoulliField a(p, 42), b(p, 42);
      Partition sa = t0_config(60), sb = sa;
      for (int i = 0; i < 200; ++i) {
        sa = qp_move(sa, a);
        sb = qp_move(sb, b);
        REQUIRE(sa == sb);
      }
    }
  }
  SECTION("derived streams differ") {
    RngStream a = RngStream::derive(9, 0);
    RngStream b = RngStream::derive(9, 1);
    bool differ = false;
    for (int i = 0; i < 16 && !differ; ++i) differ = a.next_u64() != b.next_u64();
    CHECK(differ);
  }
}
