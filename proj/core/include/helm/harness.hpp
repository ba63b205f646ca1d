#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "helm/bms.hpp"
#include "helm/compiler.hpp"
#include "helm/network.hpp"

namespace helm::harness {

// Seeded generator. The mt19937_64 word sequence is fixed by the standard;
// draws are derived from it by hand so they match on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  // Uniform in [0, n).
  std::size_t index(std::size_t n);
  // Uniform in [0, 1).
  double uniform();
  double exponential();

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed for trial `trial` of run `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

enum class Orientation {
  kRooted,  // every node's parent is a random earlier node
  kMixed,   // same skeleton, each link oriented at random (multi-parent nodes)
};

// Random singly-connected network. State counts are uniform in
// [2, max_states]; rows are flat-Dirichlet draws. Deterministic in `seed`.
VariableNetwork random_polytree(std::size_t nodes, std::size_t max_states, std::uint64_t seed,
                                Orientation orientation = Orientation::kRooted);

// Nodes without children, in index order.
std::vector<std::size_t> leaves(const VariableNetwork& network);

struct PolicyRun {
  std::size_t activations = 0;
  long long micros = 0;
  double oracle_deviation = 0.0;  // max |BEL - exact| over all nodes and states
};

struct BenchmarkRecord {
  std::uint64_t seed = 0;
  std::size_t trial = 0;
  std::size_t nodes = 0;
  std::size_t links = 0;
  std::size_t evidence = 0;
  std::map<bms::SchedulerPolicy, PolicyRun> runs;
  double policy_disagreement = 0.0;  // max belief difference between policies
  bool failed = false;
  std::string failure;
};

// A run is marked failed when any oracle deviation exceeds this.
inline constexpr double kOracleTolerance = 1e-6;

struct BenchmarkOptions {
  double tolerance = bms::kDefaultTolerance;
  bool timing = true;  // false: micros recorded as 0 for byte-stable output
};

// Per trial: k distinct random leaves get random hard states, posted at
// once; every policy propagates from the same initial state.
std::vector<BenchmarkRecord> scheduler_benchmark(const VariableNetwork& network, std::size_t k,
                                                 const std::vector<bms::SchedulerPolicy>& policies,
                                                 std::uint64_t seed, std::size_t trials,
                                                 const BenchmarkOptions& options = {});

struct SweepConfig {
  std::size_t nodes = 24;
  std::size_t max_states = 3;
  std::size_t evidence = 8;
  std::size_t trials = 100;
  std::uint64_t seed = 7;
  Orientation orientation = Orientation::kRooted;
  bool fresh_network_per_trial = true;
  std::vector<bms::SchedulerPolicy> policies{std::begin(bms::kAllPolicies),
                                             std::end(bms::kAllPolicies)};
  BenchmarkOptions options;
};

// Generates the network(s) and runs the benchmark. With fresh networks,
// trial t uses random_polytree(nodes, max_states, trial_seed(seed, t)).
std::vector<BenchmarkRecord> scheduler_sweep(const SweepConfig& config);

struct SweepSummary {
  std::map<bms::SchedulerPolicy, double> median_activations;
  double max_policy_disagreement = 0.0;
  double max_oracle_deviation = 0.0;
  std::size_t runs = 0;
  std::size_t failed = 0;
  std::size_t lifo_below_fifo = 0;   // trials with count(LIFO) < count(FIFO)
  std::size_t fifo_below_dedup = 0;  // trials with count(FIFO) < count(FIFO-dedup)
  bool ordering_holds = false;       // medians LIFO >= FIFO >= FIFO-dedup
};

SweepSummary summarize(const std::vector<BenchmarkRecord>& records);

// Header "policy,nodes,links,evidence,activations,micros,seed,trial", one
// row per (trial, policy).
std::string to_csv(const std::vector<BenchmarkRecord>& records);
// Human-readable medians, violations and the published reference counts.
std::string summary_text(const SweepSummary& summary);

inline constexpr int kReferenceCounts[] = {195, 108, 71};  // LIFO, FIFO, FIFO-dedup

struct EvidenceCase {
  std::string name;
  std::vector<Evidence> evidence;
};

struct RankRow {
  std::string id;
  double probability = 0.0;
};

struct CaseResult {
  EvidenceCase input;
  std::vector<RankRow> bms;
  std::vector<RankRow> prospector;
  bool top_agrees = false;
  double mean_rank_difference = 0.0;
};

struct AgreementReport {
  std::vector<CaseResult> cases;
  double top_agreement_rate = 0.0;
  double mean_rank_difference = 0.0;
};

// Hard detected / not-detected on each observation, one case each.
std::vector<EvidenceCase> single_attribute_cases(const FeatureModel& model);

AgreementReport compare_engines(const FeatureModel& model, const std::vector<EvidenceCase>& cases);
std::string to_json(const AgreementReport& report);
// Reads [{"name", "evidence": [{node, form, value}]}].
std::vector<EvidenceCase> load_cases(std::string_view text);

// A binary class variable with conditionally independent binary features,
// expressed for both engines with consistent parameters.
struct NaiveBayesPair {
  VariableNetwork variables;
  PropositionNetwork propositions;
  std::string class_node;
  std::vector<std::string> features;
};

NaiveBayesPair random_naive_bayes(std::size_t features, std::uint64_t seed);

}  // namespace helm::harness
