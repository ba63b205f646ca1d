#include "helm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "evidence_json.hpp"
#include "helm/error.hpp"
#include "helm/oracle.hpp"
#include "helm/prospector.hpp"

namespace helm::harness {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

std::size_t Rng::index(std::size_t n) {
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r;
  do {
    r = next();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::exponential() { return -std::log1p(-uniform()); }

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  // splitmix64 finalizer over (seed, trial)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

Distribution flat_dirichlet(Rng& rng, std::size_t n) {
  Distribution out(n);
  double total = 0.0;
  for (double& v : out) {
    // Keep every entry strictly positive so random hard evidence is never
    // impossible.
    v = rng.exponential() + 1e-3;
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

std::string node_name(std::size_t i, std::size_t n) {
  const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
  std::string digits = std::to_string(i);
  return "n" + std::string(width - digits.size(), '0') + digits;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

VariableNetwork random_polytree(std::size_t nodes, std::size_t max_states, std::uint64_t seed,
                                Orientation orientation) {
  if (nodes < 1 || max_states < 2) {
    throw Error(ErrorCode::kInvalidArgument, "random_polytree needs nodes >= 1, max_states >= 2");
  }
  Rng rng(seed);
  std::vector<VariableNode> out(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    out[i].id = node_name(i, nodes);
    out[i].label = out[i].id;
    const std::size_t states = 2 + rng.index(max_states - 1);
    for (std::size_t s = 0; s < states; ++s) out[i].states.push_back("s" + std::to_string(s));
  }
  for (std::size_t i = 1; i < nodes; ++i) {
    const std::size_t other = rng.index(i);
    const bool reversed = orientation == Orientation::kMixed && rng.index(2) == 1;
    if (reversed) {
      out[other].parents.push_back(out[i].id);
    } else {
      out[i].parents.push_back(out[other].id);
    }
  }
  for (auto& node : out) {
    if (node.parents.empty()) {
      node.prior = flat_dirichlet(rng, node.states.size());
      continue;
    }
    std::size_t rows = 1;
    for (const auto& p : node.parents) {
      const auto index = static_cast<std::size_t>(std::stoul(p.substr(1)));
      rows *= out[index].states.size();
    }
    for (std::size_t r = 0; r < rows; ++r) node.cpt.push_back(flat_dirichlet(rng, node.states.size()));
  }
  return VariableNetwork(std::move(out));
}

std::vector<std::size_t> leaves(const VariableNetwork& network) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < network.size(); ++i) {
    if (network.children(i).empty()) out.push_back(i);
  }
  return out;
}

std::vector<BenchmarkRecord> scheduler_benchmark(const VariableNetwork& network, std::size_t k,
                                                 const std::vector<bms::SchedulerPolicy>& policies,
                                                 std::uint64_t seed, std::size_t trials,
                                                 const BenchmarkOptions& options) {
  auto model = std::make_shared<const bms::Model>(network);
  const auto candidates = leaves(network);
  if (k > candidates.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "evidence count " + std::to_string(k) + " exceeds leaf count " +
                    std::to_string(candidates.size()));
  }
  const bms::BeliefState initial = bms::BeliefState::init_equilibrium(model);
  std::vector<BenchmarkRecord> records;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng(trial_seed(seed, trial));
    BenchmarkRecord record;
    record.seed = seed;
    record.trial = trial;
    record.nodes = network.size();
    record.links = network.link_count();
    record.evidence = k;

    // Partial Fisher-Yates over the leaves.
    std::vector<std::size_t> pool = candidates;
    std::vector<Evidence> evidence;
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
      const VariableNode& node = network.node(pool[i]);
      evidence.push_back(Evidence::hard(node.id, node.states[rng.index(node.states.size())]));
    }

    Posterior exact;
    try {
      exact = reference_posterior(network, evidence);
    } catch (const Error& e) {
      record.failed = true;
      record.failure = std::string("oracle: ") + e.what();
    }

    std::vector<std::vector<Distribution>> beliefs;
    for (bms::SchedulerPolicy policy : policies) {
      PolicyRun run;
      bms::BeliefState state = initial;
      try {
        for (const auto& e : evidence) state.post_evidence(e);
        const auto start = std::chrono::steady_clock::now();
        run.activations = state.propagate_to_equilibrium(policy, options.tolerance);
        const auto stop = std::chrono::steady_clock::now();
        if (options.timing) {
          run.micros = std::chrono::duration_cast<std::chrono::microseconds>(stop - start).count();
        }
        std::vector<Distribution> bel;
        for (std::size_t i = 0; i < network.size(); ++i) {
          bel.push_back(state.belief(i));
          if (!exact.empty()) {
            const auto& truth = exact.at(network.node(i).id);
            for (std::size_t s = 0; s < truth.size(); ++s) {
              run.oracle_deviation = std::max(run.oracle_deviation, std::abs(bel[i][s] - truth[s]));
            }
          }
        }
        beliefs.push_back(std::move(bel));
      } catch (const Error& e) {
        record.failed = true;
        record.failure = std::string(bms::policy_name(policy)) + ": " + e.what();
      }
      if (run.oracle_deviation > kOracleTolerance) {
        record.failed = true;
        record.failure = std::string(bms::policy_name(policy)) + ": oracle deviation " +
                         std::to_string(run.oracle_deviation);
      }
      record.runs[policy] = run;
    }
    for (std::size_t p = 1; p < beliefs.size(); ++p) {
      for (std::size_t i = 0; i < beliefs[p].size(); ++i) {
        for (std::size_t s = 0; s < beliefs[p][i].size(); ++s) {
          record.policy_disagreement =
              std::max(record.policy_disagreement, std::abs(beliefs[p][i][s] - beliefs[0][i][s]));
        }
      }
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<BenchmarkRecord> scheduler_sweep(const SweepConfig& config) {
  std::vector<BenchmarkRecord> records;
  if (!config.fresh_network_per_trial) {
    const auto network = random_polytree(config.nodes, config.max_states, config.seed,
                                         config.orientation);
    return scheduler_benchmark(network, config.evidence, config.policies, config.seed,
                               config.trials, config.options);
  }
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t seed = trial_seed(config.seed, trial);
    const auto network = random_polytree(config.nodes, config.max_states, seed, config.orientation);
    auto one = scheduler_benchmark(network, config.evidence, config.policies, seed, 1,
                                   config.options);
    one.front().seed = config.seed;
    one.front().trial = trial;
    records.push_back(std::move(one.front()));
  }
  return records;
}

SweepSummary summarize(const std::vector<BenchmarkRecord>& records) {
  SweepSummary summary;
  std::map<bms::SchedulerPolicy, std::vector<double>> counts;
  for (const auto& record : records) {
    ++summary.runs;
    if (record.failed) ++summary.failed;
    summary.max_policy_disagreement =
        std::max(summary.max_policy_disagreement, record.policy_disagreement);
    for (const auto& [policy, run] : record.runs) {
      counts[policy].push_back(static_cast<double>(run.activations));
      summary.max_oracle_deviation = std::max(summary.max_oracle_deviation, run.oracle_deviation);
    }
    auto count = [&](bms::SchedulerPolicy p) -> std::optional<std::size_t> {
      auto it = record.runs.find(p);
      if (it == record.runs.end()) return std::nullopt;
      return it->second.activations;
    };
    auto lifo = count(bms::SchedulerPolicy::kLifo);
    auto fifo = count(bms::SchedulerPolicy::kFifo);
    auto dedup = count(bms::SchedulerPolicy::kFifoDedup);
    if (lifo && fifo && *lifo < *fifo) ++summary.lifo_below_fifo;
    if (fifo && dedup && *fifo < *dedup) ++summary.fifo_below_dedup;
  }
  for (auto& [policy, values] : counts) summary.median_activations[policy] = median(values);
  auto med = [&](bms::SchedulerPolicy p) {
    auto it = summary.median_activations.find(p);
    return it == summary.median_activations.end() ? 0.0 : it->second;
  };
  summary.ordering_holds = summary.median_activations.size() == 3 &&
                           med(bms::SchedulerPolicy::kLifo) >= med(bms::SchedulerPolicy::kFifo) &&
                           med(bms::SchedulerPolicy::kFifo) >= med(bms::SchedulerPolicy::kFifoDedup);
  return summary;
}

std::string to_csv(const std::vector<BenchmarkRecord>& records) {
  std::ostringstream out;
  out << bms::kRunRecordHeader << ",seed,trial\n";
  for (const auto& record : records) {
    for (const auto& [policy, run] : record.runs) {
      bms::RunRecord row{policy, record.nodes, record.links, record.evidence, run.activations,
                         run.micros};
      out << bms::to_csv_row(row) << ',' << record.seed << ',' << record.trial << '\n';
    }
  }
  return out.str();
}

std::string summary_text(const SweepSummary& summary) {
  std::ostringstream out;
  out << "runs: " << summary.runs << ", failed: " << summary.failed << "\n";
  out << "median activations:";
  for (const auto& [policy, value] : summary.median_activations) {
    out << " " << bms::policy_name(policy) << "=" << value;
  }
  out << "\n";
  out << "ordering lifo >= fifo >= fifo-dedup (medians): "
      << (summary.ordering_holds ? "holds" : "VIOLATED") << "\n";
  out << "individual violations: lifo<fifo in " << summary.lifo_below_fifo
      << " trials, fifo<fifo-dedup in " << summary.fifo_below_dedup << " trials\n";
  out << "max belief disagreement between policies: " << summary.max_policy_disagreement << "\n";
  out << "max deviation from exact posterior: " << summary.max_oracle_deviation << "\n";
  out << "published reference (24 nodes, 23 links, 8 evidence; network not available): lifo="
      << kReferenceCounts[0] << " fifo=" << kReferenceCounts[1]
      << " fifo-dedup=" << kReferenceCounts[2] << "\n";
  return out.str();
}

std::vector<EvidenceCase> single_attribute_cases(const FeatureModel& model) {
  std::vector<EvidenceCase> cases;
  for (const auto& obs : compiler::observations(model)) {
    for (std::string_view answer : {compiler::kDetected, compiler::kNotDetected}) {
      cases.push_back({obs.id + "=" + std::string(answer),
                       {Evidence::hard(obs.id, std::string(answer))}});
    }
  }
  return cases;
}

namespace {

std::map<std::string, std::size_t> positions(const std::vector<RankRow>& rows) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) out[rows[i].id] = i + 1;
  return out;
}

}  // namespace

AgreementReport compare_engines(const FeatureModel& model, const std::vector<EvidenceCase>& cases) {
  auto bms_model = std::make_shared<const bms::Model>(compiler::compile_bms(model));
  auto pro_model = std::make_shared<const prospector::Model>(compiler::compile_prospector(model));
  const auto bms_initial = bms::BeliefState::init_equilibrium(bms_model);
  const prospector::State pro_initial(pro_model);

  AgreementReport report;
  std::size_t agree = 0;
  double rank_sum = 0.0;
  for (const auto& input : cases) {
    CaseResult result;
    result.input = input;
    bms::BeliefState b = bms_initial;
    prospector::State p = pro_initial;
    for (const auto& e : input.evidence) {
      b.post_evidence(e);
      p.post(e);
    }
    b.propagate_to_equilibrium();
    p.propagate();
    for (const auto& r : b.rank_states(std::string(compiler::kClassNode))) {
      result.bms.push_back({r.state, r.probability});
    }
    for (const auto& r : p.rank_classes()) result.prospector.push_back({r.id, r.probability});
    result.top_agrees = result.bms.front().id == result.prospector.front().id;
    const auto bms_pos = positions(result.bms);
    const auto pro_pos = positions(result.prospector);
    double diff = 0.0;
    for (const auto& [id, pos] : bms_pos) {
      diff += std::abs(static_cast<double>(pos) - static_cast<double>(pro_pos.at(id)));
    }
    result.mean_rank_difference = diff / static_cast<double>(bms_pos.size());
    if (result.top_agrees) ++agree;
    rank_sum += result.mean_rank_difference;
    report.cases.push_back(std::move(result));
  }
  if (!cases.empty()) {
    report.top_agreement_rate = static_cast<double>(agree) / static_cast<double>(cases.size());
    report.mean_rank_difference = rank_sum / static_cast<double>(cases.size());
  }
  return report;
}

std::string to_json(const AgreementReport& report) {
  using detail::Json;
  Json doc = Json::object();
  doc["reference"] = Json{
      {"note", "published comparison on 52 plan-view images (not available here)"},
      {"top_ranked_same_images", "39/52"},
      {"rank_differences", 4}};
  auto rows = [](const std::vector<RankRow>& ranking) {
    Json out = Json::array();
    for (const auto& r : ranking) out.push_back(Json{{"class", r.id}, {"probability", r.probability}});
    return out;
  };
  Json cases = Json::array();
  for (const auto& result : report.cases) {
    Json evidence = Json::array();
    for (const auto& e : result.input.evidence) {
      evidence.push_back(
          Json{{"node", e.node}, {"form", e.form_name()}, {"value", detail::evidence_value(e)}});
    }
    cases.push_back(Json{{"name", result.input.name},
                         {"evidence", std::move(evidence)},
                         {"bms", rows(result.bms)},
                         {"prospector", rows(result.prospector)},
                         {"top_agrees", result.top_agrees},
                         {"mean_rank_difference", result.mean_rank_difference}});
  }
  doc["cases"] = std::move(cases);
  doc["top_agreement_rate"] = report.top_agreement_rate;
  doc["mean_rank_difference"] = report.mean_rank_difference;
  return doc.dump(2) + "\n";
}

std::vector<EvidenceCase> load_cases(std::string_view text) {
  const detail::Json doc = detail::parse(text);
  if (!doc.is_array()) detail::schema_error("cases", "must be a JSON array");
  std::vector<EvidenceCase> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "cases[" + std::to_string(i) + "]";
    const auto& item = doc[i];
    if (!item.is_object()) detail::schema_error(where, "must be an object");
    EvidenceCase c;
    c.name = detail::get<std::string>(detail::field(item, "name", where), where + ".name");
    const auto& evidence = detail::field(item, "evidence", where);
    if (!evidence.is_array()) detail::schema_error(where + ".evidence", "must be an array");
    for (std::size_t j = 0; j < evidence.size(); ++j) {
      c.evidence.push_back(
          detail::evidence_from_json(evidence[j], where + ".evidence[" + std::to_string(j) + "]"));
    }
    out.push_back(std::move(c));
  }
  return out;
}

NaiveBayesPair random_naive_bayes(std::size_t features, std::uint64_t seed) {
  Rng rng(seed);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  NaiveBayesPair out;
  out.class_node = "H";
  const double prior = between(0.05, 0.95);

  std::vector<VariableNode> variables;
  variables.push_back({"H", "hypothesis", {"true", "false"}, {}, {prior, 1.0 - prior}, {}});
  std::vector<PropositionNode> props;
  props.push_back({"H", "hypothesis", prior, false, 1.0, PropositionNode{}.answers});
  std::vector<EvidentialLink> links;

  for (std::size_t f = 0; f < features; ++f) {
    const std::string id = "F" + std::to_string(f);
    out.features.push_back(id);
    const double given_h = between(0.02, 0.98);
    const double given_not_h = between(0.02, 0.98);
    variables.push_back({id, id, {"true", "false"}, {"H"}, {},
                         {{given_h, 1.0 - given_h}, {given_not_h, 1.0 - given_not_h}}});
    const double p_f = prior * given_h + (1.0 - prior) * given_not_h;
    props.push_back({id, id, p_f, true, 1.0, PropositionNode{}.answers});
    links.push_back({id, "H", prior * given_h / p_f, prior * (1.0 - given_h) / (1.0 - p_f)});
  }
  out.variables = VariableNetwork(std::move(variables));
  out.propositions = PropositionNetwork(std::move(props), std::move(links), {"H"});
  return out;
}

}  // namespace helm::harness
