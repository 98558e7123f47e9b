#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "fase/attack.hpp"
#include "fase/errors.hpp"
#include "support.hpp"

using namespace fase;

namespace {

const CacheGeometry kDesk{4, 4, 64};
const CacheGeometry kRocket{64, 8, 64};

AttackConfig desk_attack(Mitigation mode, std::vector<std::uint32_t> secret, bool critical = true) {
  AttackConfig c;
  c.geometry = kDesk;
  c.mode = mode;
  c.victim.secret = std::move(secret);
  c.victim.critical = critical;
  return c;
}

LeakageScore score(const AttackConfig& c, const ProbeMatrix& m) {
  return infer_secret(m, c.victim.secret, default_threshold(c.latencies));
}

}  // namespace

TEST_CASE("prime covers every line once") {
  CHECK(prime(kDesk).size() == 16);
  CHECK(prime(kRocket).size() == 512);
  std::vector<std::pair<std::uint64_t, std::uint32_t>> blocks;
  for (const auto& ev : prime(kRocket)) {
    const AddrParts p = decompose(ev.address, kRocket);
    CHECK(p.tag >= kAttackerTagBase);
    CHECK(p.tag < kAttackerTagBase + kRocket.num_ways);
    blocks.emplace_back(p.tag, p.set_index);
  }
  std::sort(blocks.begin(), blocks.end());
  CHECK(std::adjacent_find(blocks.begin(), blocks.end()) == blocks.end());
}

TEST_CASE("probe_events is prime in reverse way order") {
  const auto p = prime(kDesk);
  const auto q = probe_events(kDesk);
  REQUIRE(p.size() == q.size());
  for (std::uint32_t w = 0; w < 4; ++w) {
    for (std::uint32_t s = 0; s < 4; ++s) CHECK(q[(3 - w) * 4 + s] == p[w * 4 + s]);
  }
}

TEST_CASE("probe timings") {
  SimConfig sc;
  sc.geometry = kDesk;
  sc.mode = Mitigation::kBaseline;
  Simulator sim(sc);
  sim.add_process(1, prime(kDesk));
  sim.add_process(2);
  const SliceStats first = sim.run_slice(1, 16);
  CHECK(first.misses == 16);

  SUBCASE("a second prime hits everywhere") {
    sim.append_events(1, prime(kDesk));
    CHECK(sim.run_slice(1, 16).hits == 16);
  }
  SUBCASE("no victim: ways x hit per set") {
    CHECK(probe(sim, 1) == std::vector<Cycles>(4, 4 * 30));
  }
  SUBCASE("one victim line in set 2 costs exactly one miss there") {
    sim.append_events(2, std::vector<TraceEvent>{
                             TraceEvent::load(fase::testing::block_addr(kDesk, kVictimTagBase, 2))});
    sim.run_slice(2, 1);
    CHECK(probe(sim, 1) == std::vector<Cycles>{120, 120, 3 * 30 + 120, 120});
  }
}

TEST_CASE("probe after a naive flush misses on every line") {
  SimConfig sc;
  sc.geometry = kDesk;
  sc.mode = Mitigation::kNaive;
  Simulator sim(sc);
  sim.add_process(1, prime(kDesk));
  sim.add_process(2);
  sim.run_slice(1, 16);
  sim.context_switch(1, 2);
  sim.context_switch(2, 1);
  CHECK(probe(sim, 1) == std::vector<Cycles>(4, 4 * 120));
}

TEST_CASE("baseline leaks the secret") {
  const AttackConfig c = desk_attack(Mitigation::kBaseline, {0, 2, 3});
  const ProbeMatrix m = run_prime_probe(c);
  CHECK(m.samples == 100);
  for (std::uint32_t r = 0; r < m.samples; ++r) {
    CHECK(m.at(r, 0) == 3 * 30 + 120);
    CHECK(m.at(r, 1) == 4 * 30);
  }
  const LeakageScore s = score(c, m);
  CHECK(s.accuracy == 1.0);
  CHECK(s.exact);
  CHECK(s.recovered == std::vector<std::uint32_t>{0, 2, 3});
}

TEST_CASE("flushing modes hide the secret") {
  for (Mitigation mode : {Mitigation::kNaive, Mitigation::kLlsf, Mitigation::kClsf}) {
    CAPTURE(to_string(mode));
    const AttackConfig c = desk_attack(mode, {0, 2, 3});
    const ProbeMatrix m = run_prime_probe(c);
    for (Cycles v : m.latencies) CHECK(v == 4 * 120);
    const LeakageScore s = score(c, m);
    CHECK(s.accuracy == 0.0);
    CHECK(s.recovered.empty());
  }
}

TEST_CASE("llsf and naive give identical probe matrices") {
  const ProbeMatrix naive = run_prime_probe(desk_attack(Mitigation::kNaive, {1, 3}));
  const ProbeMatrix llsf = run_prime_probe(desk_attack(Mitigation::kLlsf, {1, 3}));
  CHECK(naive == llsf);
}

TEST_CASE("clsf without a critical segment is as leaky as baseline") {
  const AttackConfig c = desk_attack(Mitigation::kClsf, {0, 2, 3}, false);
  const ProbeMatrix clsf = run_prime_probe(c);
  const ProbeMatrix base = run_prime_probe(desk_attack(Mitigation::kBaseline, {0, 2, 3}, false));
  CHECK(clsf == base);
  CHECK(score(c, clsf).accuracy == 1.0);
}

TEST_CASE("empty secret") {
  const AttackConfig c = desk_attack(Mitigation::kBaseline, {});
  const LeakageScore s = score(c, run_prime_probe(c));
  CHECK(s.recovered.empty());
  CHECK(s.accuracy == 1.0);
  CHECK(s.exact);
}

TEST_CASE("relabelling sets permutes the probe matrix the same way") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 20; ++round) {
    std::vector<std::uint32_t> perm(kDesk.num_sets);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::uint32_t> secret;
    for (std::uint32_t s = 0; s < kDesk.num_sets; ++s) {
      if (rng() % 2) secret.push_back(s);
    }
    std::vector<std::uint32_t> mapped;
    for (std::uint32_t s : secret) mapped.push_back(perm[s]);

    AttackConfig a = desk_attack(Mitigation::kBaseline, secret);
    AttackConfig b = desk_attack(Mitigation::kBaseline, mapped);
    a.samples = b.samples = 5;
    const ProbeMatrix ma = run_prime_probe(a);
    const ProbeMatrix mb = run_prime_probe(b);
    for (std::uint32_t r = 0; r < 5; ++r) {
      for (std::uint32_t s = 0; s < kDesk.num_sets; ++s) CHECK(ma.at(r, s) == mb.at(r, perm[s]));
    }
  }
}

TEST_CASE("victim touching more lines per set evicts more ways") {
  AttackConfig c = desk_attack(Mitigation::kBaseline, {1});
  c.victim.accesses_per_set = 3;
  c.samples = 2;
  const ProbeMatrix m = run_prime_probe(c);
  CHECK(m.at(0, 1) == 30 + 3 * 120);
  CHECK(m.at(0, 0) == 4 * 30);
}

TEST_CASE("bounded noise below the margin keeps recovery exact") {
  AttackConfig c = desk_attack(Mitigation::kBaseline, {0, 2, 3});
  c.noise = {20, 99};
  const ProbeMatrix m = run_prime_probe(c);
  const Cycles floor = 4 * 30;
  for (Cycles v : m.latencies) CHECK(v >= floor);
  CHECK(score(c, m).exact);

  AttackConfig same = c;
  CHECK(run_prime_probe(same) == m);
  same.noise.seed = 100;
  CHECK_FALSE(run_prime_probe(same) == m);
}

TEST_CASE("infer_secret") {
  ProbeMatrix m;
  m.samples = 2;
  m.num_sets = 3;
  m.latencies = {120, 210, 120, 120, 210, 130};
  SUBCASE("threshold relative to the quietest set") {
    const LeakageScore s = infer_secret(m, {1}, 45);
    CHECK(s.recovered == std::vector<std::uint32_t>{1});
    CHECK(s.exact);
  }
  SUBCASE("partial recovery") {
    const LeakageScore s = infer_secret(m, {1, 2}, 45);
    CHECK(s.accuracy == doctest::Approx(0.5));
    CHECK_FALSE(s.exact);
  }
  SUBCASE("false positives do not count against accuracy") {
    const LeakageScore s = infer_secret(m, {1}, 1);
    CHECK(s.recovered == std::vector<std::uint32_t>{1, 2});
    CHECK(s.accuracy == 1.0);
    CHECK_FALSE(s.exact);
  }
  SUBCASE("empty secret with a detection scores zero") {
    CHECK(infer_secret(m, {}, 45).accuracy == 0.0);
  }
  SUBCASE("empty matrix") { CHECK_THROWS_AS(infer_secret(ProbeMatrix{}, {}, 45), ConfigError); }
}

TEST_CASE("attack config validation") {
  AttackConfig c = desk_attack(Mitigation::kBaseline, {0});
  CHECK_NOTHROW(c.validate());
  SUBCASE("zero samples") {
    c.samples = 0;
    CHECK_THROWS_AS(run_prime_probe(c), ConfigError);
  }
  SUBCASE("secret outside the cache") {
    c.victim.secret = {4};
    CHECK_THROWS_AS(run_prime_probe(c), ConfigError);
  }
  SUBCASE("same pid") {
    c.victim_pid = c.attacker_pid;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("victim trace count must match samples") {
    c.samples = 3;
    CHECK_THROWS_AS(run_prime_probe(c, {{}, {}}), ConfigError);
  }
}

TEST_CASE("csv outputs") {
  ProbeMatrix m;
  m.samples = 2;
  m.num_sets = 2;
  m.latencies = {120, 210, 120, 120};
  std::ostringstream a;
  write_probe_matrix_csv(a, m);
  CHECK(a.str() == "120,210\n120,120\n");

  LeakageScore s;
  s.secret = {0, 2, 3};
  s.recovered = {0, 2};
  s.accuracy = 2.0 / 3.0;
  std::ostringstream b;
  write_leakage_csv(b, s);
  CHECK(b.str() == "secret,recovered,accuracy,exact\n0;2;3,0;2,0.6667,0\n");
}
