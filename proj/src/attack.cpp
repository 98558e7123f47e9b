#include "fase/attack.hpp"

#include <algorithm>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <random>
#include <string>

#include "fase/errors.hpp"

namespace fase {

namespace {

Address block_address(const CacheGeometry& g, std::uint64_t tag, std::uint32_t set_index) {
  return recompose(AddrParts{tag, set_index, 0}, g);
}

std::vector<std::uint32_t> sorted_unique(std::vector<std::uint32_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<double> ProbeMatrix::set_means() const {
  std::vector<double> means(num_sets, 0.0);
  if (samples == 0) return means;
  for (std::uint32_t r = 0; r < samples; ++r) {
    for (std::uint32_t s = 0; s < num_sets; ++s) means[s] += static_cast<double>(at(r, s));
  }
  for (double& m : means) m /= samples;
  return means;
}

void AttackConfig::validate() const {
  geometry.validate();
  latencies.validate();
  cost.validate();
  if (samples == 0) throw ConfigError("samples must be >= 1");
  if (attacker_pid == victim_pid) throw ConfigError("attacker and victim pids must differ");
  if (victim.accesses_per_set == 0) throw ConfigError("accesses_per_set must be >= 1");
  for (std::uint32_t s : victim.secret) {
    if (s >= geometry.num_sets) {
      throw ConfigError("secret set index " + std::to_string(s) + " >= num_sets " +
                        std::to_string(geometry.num_sets));
    }
  }
}

std::vector<TraceEvent> prime(const CacheGeometry& geometry, std::uint64_t tag_base) {
  std::vector<TraceEvent> events;
  events.reserve(geometry.num_lines());
  for (std::uint32_t w = 0; w < geometry.num_ways; ++w) {
    for (std::uint32_t s = 0; s < geometry.num_sets; ++s) {
      events.push_back(TraceEvent::load(block_address(geometry, tag_base + w, s)));
    }
  }
  return events;
}

std::vector<TraceEvent> probe_events(const CacheGeometry& geometry, std::uint64_t tag_base) {
  std::vector<TraceEvent> events;
  events.reserve(geometry.num_lines());
  for (std::uint32_t w = geometry.num_ways; w-- > 0;) {
    for (std::uint32_t s = 0; s < geometry.num_sets; ++s) {
      events.push_back(TraceEvent::load(block_address(geometry, tag_base + w, s)));
    }
  }
  return events;
}

std::vector<Cycles> probe(Simulator& sim, Pid attacker, std::uint64_t tag_base) {
  const CacheGeometry& g = sim.config().geometry;
  const auto events = probe_events(g, tag_base);
  sim.append_events(attacker, events);
  std::vector<Cycles> timings;
  timings.reserve(events.size());
  sim.run_slice(attacker, events.size(), &timings);
  if (timings.size() != events.size()) throw ConfigError("probe slice did not run to completion");
  std::vector<Cycles> per_set(g.num_sets, 0);
  for (std::size_t i = 0; i < timings.size(); ++i) per_set[i % g.num_sets] += timings[i];
  return per_set;
}

std::vector<TraceEvent> victim_events(const CacheGeometry& geometry, const VictimModel& victim) {
  std::vector<TraceEvent> events;
  if (victim.critical) events.push_back(TraceEvent::scf(true));
  for (std::uint32_t s : victim.secret) {
    for (std::uint32_t j = 0; j < victim.accesses_per_set; ++j) {
      events.push_back(TraceEvent::load(block_address(geometry, kVictimTagBase + j, s)));
    }
  }
  if (victim.critical) events.push_back(TraceEvent::scf(false));
  return events;
}

ProbeMatrix run_prime_probe(const AttackConfig& config) {
  config.validate();
  const auto events = victim_events(config.geometry, config.victim);
  return run_prime_probe(config, std::vector<std::vector<TraceEvent>>(config.samples, events));
}

ProbeMatrix run_prime_probe(const AttackConfig& config,
                            const std::vector<std::vector<TraceEvent>>& victim_traces) {
  config.validate();
  if (victim_traces.size() != config.samples) {
    throw ConfigError("need one victim trace per sample");
  }
  SimConfig sc;
  sc.geometry = config.geometry;
  sc.mode = config.mode;
  sc.cost = config.cost;
  sc.latencies = config.latencies;
  Simulator sim(sc);
  sim.add_process(config.attacker_pid);
  sim.add_process(config.victim_pid);

  const CacheGeometry& g = config.geometry;
  const auto prime_trace = prime(g);
  std::mt19937_64 rng(config.noise.seed);
  const auto eps = static_cast<std::int64_t>(config.noise.epsilon);
  std::uniform_int_distribution<std::int64_t> jitter(-eps, eps);
  const Cycles floor = config.latencies.hit * g.num_ways;

  ProbeMatrix matrix;
  matrix.samples = config.samples;
  matrix.num_sets = g.num_sets;
  matrix.latencies.reserve(std::size_t{config.samples} * g.num_sets);
  for (std::uint32_t sample = 0; sample < config.samples; ++sample) {
    sim.append_events(config.attacker_pid, prime_trace);
    sim.run_slice(config.attacker_pid, prime_trace.size());
    sim.context_switch(config.attacker_pid, config.victim_pid);
    const auto& vt = victim_traces[sample];
    sim.append_events(config.victim_pid, vt);
    sim.run_slice(config.victim_pid, vt.size());
    sim.context_switch(config.victim_pid, config.attacker_pid);
    for (Cycles c : probe(sim, config.attacker_pid)) {
      if (eps > 0) {
        const std::int64_t noisy = static_cast<std::int64_t>(c) + jitter(rng);
        c = static_cast<Cycles>(std::max<std::int64_t>(noisy, static_cast<std::int64_t>(floor)));
      }
      matrix.latencies.push_back(c);
    }
  }
  return matrix;
}

double default_threshold(const Latencies& latencies) {
  return static_cast<double>(latencies.miss - latencies.hit) / 2.0;
}

LeakageScore infer_secret(const ProbeMatrix& matrix, std::vector<std::uint32_t> secret,
                          double threshold) {
  if (matrix.samples == 0 || matrix.num_sets == 0) throw ConfigError("empty probe matrix");
  LeakageScore score;
  score.secret = sorted_unique(std::move(secret));
  const auto means = matrix.set_means();
  const double quietest = *std::min_element(means.begin(), means.end());
  for (std::uint32_t s = 0; s < matrix.num_sets; ++s) {
    if (means[s] - quietest > threshold) score.recovered.push_back(s);
  }
  std::vector<std::uint32_t> hit;
  std::set_intersection(score.recovered.begin(), score.recovered.end(), score.secret.begin(),
                        score.secret.end(), std::back_inserter(hit));
  score.exact = score.recovered == score.secret;
  if (score.secret.empty()) {
    score.accuracy = score.recovered.empty() ? 1.0 : 0.0;
  } else {
    score.accuracy = static_cast<double>(hit.size()) / static_cast<double>(score.secret.size());
  }
  return score;
}

void write_probe_matrix_csv(std::ostream& out, const ProbeMatrix& matrix) {
  for (std::uint32_t r = 0; r < matrix.samples; ++r) {
    for (std::uint32_t s = 0; s < matrix.num_sets; ++s) {
      if (s != 0) out << ',';
      out << matrix.at(r, s);
    }
    out << '\n';
  }
}

namespace {

void write_set_list(std::ostream& out, const std::vector<std::uint32_t>& sets) {
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (i != 0) out << ';';
    out << sets[i];
  }
}

}  // namespace

void write_leakage_csv(std::ostream& out, const LeakageScore& score) {
  out << "secret,recovered,accuracy,exact\n";
  write_set_list(out, score.secret);
  out << ',';
  write_set_list(out, score.recovered);
  out << ',' << std::fixed << std::setprecision(4) << score.accuracy
      << std::defaultfloat << ',' << (score.exact ? 1 : 0) << '\n';
}

}  // namespace fase
