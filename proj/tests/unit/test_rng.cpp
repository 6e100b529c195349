#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "mclt/parallel.hpp"
#include "mclt/rng.hpp"

using namespace mclt;

// Known-answer vectors of the Random123 reference implementation.
TEST_CASE("philox matches the reference known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::encrypt({0, 0, 0, 0}, {0, 0}) ==
        C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::encrypt({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                            {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::encrypt({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                            {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of seed, replicate and step") {
  const CounterRng rng(42);
  auto a = rng.stream(7, 3);
  auto b = rng.stream(7, 3);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  CHECK(rng.word(7, 3) != rng.word(8, 3));
  CHECK(rng.word(7, 3) != rng.word(7, 4));
  CHECK(CounterRng(43).word(7, 3) != rng.word(7, 3));
  // High replicate bits reach the counter.
  CHECK(rng.word(1, 0) != rng.word(1 + (std::uint64_t{1} << 32), 0));
}

TEST_CASE("unit conversions stay in range") {
  CHECK(to_unit(0) == 0.0);
  CHECK(to_unit(~std::uint64_t{0}) < 1.0);
  CHECK(to_unit_open(0) > 0.0);
  CHECK(to_unit_open(~std::uint64_t{0}) == 1.0);
}

TEST_CASE("uniform and normal draws have the right first two moments") {
  const CounterRng rng(9);
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    auto s = rng.stream(i, 0);
    const double u = s.uniform();
    const double z = s.normal();
    su += u;
    su2 += u * u;
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(su2 / n - 1.0 / 3) < 4 * std::sqrt(4.0 / 45 / n));
  CHECK(std::abs(sn / n) < 4 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("derived seeds differ per tag") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(derive_seed(5, t));
  CHECK(seen.size() == 1000);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 5) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
