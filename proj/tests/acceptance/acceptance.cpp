// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "helm/compiler.hpp"
#include "helm/error.hpp"
#include "helm/harness.hpp"
#include "helm/merit.hpp"
#include "helm/oracle.hpp"
#include "helm/prospector.hpp"
#include "helm/serialize.hpp"
#include "helm/session.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace helm;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

// Random evidence on up to `max_count` distinct nodes: hard, virtual, or
// graded on binary nodes.
std::vector<Evidence> random_evidence(const VariableNetwork& net, std::mt19937_64& rng, std::size_t max_count) {
  std::uniform_real_distribution<> u(0.05, 1.0);
  std::vector<std::size_t> order(net.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(0, std::min(max_count, net.size()))(rng);
  std::vector<Evidence> out;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& node = net.node(order[i]);
    const std::size_t form = rng() % (node.states.size() == 2 ? 3 : 2);
    if (form == 0) {
      out.push_back(Evidence::hard(node.id, node.states[rng() % node.states.size()]));
    } else if (form == 1) {
      std::vector<double> lik(node.states.size());
      for (auto& v : lik) v = u(rng);
      out.push_back(Evidence::likelihood(node.id, lik));
    } else {
      out.push_back(Evidence::graded(node.id, std::min(0.95, u(rng))));
    }
  }
  return out;
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  const std::size_t trials = 500;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= trials; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 1 + rng() % 12;
    const auto orientation = rng() % 2 ? harness::Orientation::kMixed : harness::Orientation::kRooted;
    const auto net = harness::random_polytree(n, 4, rng(), orientation);
    const auto evidence = random_evidence(net, rng, 6);
    auto state = bms::BeliefState::init_equilibrium(net);
    for (const auto& e : evidence) state.post_evidence(e);
    state.propagate_to_equilibrium();
    const auto exact = exact_posterior(net, evidence);
    for (std::size_t i = 0; i < net.size(); ++i) {
      worst = std::max(worst, testing::max_abs_diff(state.belief(i), exact.at(net.node(i).id)));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-6 && elapsed < 60.0,
          fmt("%.0f polytrees, max deviation %.2e, %.2f s", trials, worst, elapsed)};
}

Outcome prospector_exactness() {
  double worst = 0.0;
  const auto stern = testing::stern_model();
  const auto variables = compiler::compile_bms(stern);
  const auto model = std::make_shared<const prospector::Model>(compiler::compile_prospector(stern));
  const auto& classes = variables.node(variables.require("class")).states;
  std::size_t stern_cases = 0;
  for (const auto& obs : compiler::observations(stern)) {
    for (std::string_view value : {compiler::kDetected, compiler::kNotDetected}) {
      prospector::State state(model);
      state.post_answer(obs.id, std::string(value));
      state.propagate();
      const auto exact = exact_posterior(variables, {Evidence::hard(obs.id, std::string(value))});
      for (std::size_t c = 0; c < classes.size(); ++c) {
        worst = std::max(worst, std::abs(state.probability(classes[c]) - exact.at("class")[c]));
      }
      ++stern_cases;
    }
  }
  const std::size_t models = 100;
  std::size_t nb_cases = 0;
  for (std::uint64_t seed = 1; seed <= models; ++seed) {
    const auto pair = harness::random_naive_bayes(1 + seed % 6, seed);
    const auto pm = std::make_shared<const prospector::Model>(pair.propositions);
    for (const auto& f : pair.features) {
      const auto& states = pair.variables.node(pair.variables.require(f)).states;
      for (std::size_t s = 0; s < 2; ++s) {
        prospector::State state(pm);
        state.post_graded_evidence(f, s == 0 ? 1.0 : 0.0);
        state.propagate();
        const auto exact = exact_posterior(pair.variables, {Evidence::hard(f, states[s])});
        worst = std::max(worst, std::abs(state.probability(pair.class_node) - exact.at(pair.class_node)[0]));
        ++nb_cases;
      }
    }
  }
  return {worst <= 1e-6, fmt("%.0f stern cases, %.0f naive-Bayes models (%.0f cases), max deviation %.2e",
                             stern_cases, models, nb_cases, worst)};
}

Outcome engine_agreement() {
  const auto stern = testing::stern_model();
  const auto cases = harness::single_attribute_cases(stern);
  const auto report = harness::compare_engines(stern, cases);
  std::size_t agree = 0;
  for (const auto& c : report.cases) agree += c.top_agrees;
  return {cases.size() == 6 && agree == cases.size(),
          fmt("top class identical in %.0f/%.0f cases (image-level 39/52 not reproducible)", agree, cases.size())};
}

Outcome scheduler_ordering() {
  const auto start = Clock::now();
  harness::SweepConfig config;
  config.nodes = 24;
  config.evidence = 8;
  config.trials = 100;
  const auto records = harness::scheduler_sweep(config);
  const auto summary = harness::summarize(records);
  const double elapsed = seconds_since(start);
  const auto& m = summary.median_activations;
  const bool pass = summary.ordering_holds && summary.max_policy_disagreement <= 1e-8 && summary.failed == 0 &&
                    elapsed < 30.0;
  std::string detail = fmt("medians lifo=%.1f fifo=%.1f fifo-dedup=%.1f, ", m.at(bms::SchedulerPolicy::kLifo),
                           m.at(bms::SchedulerPolicy::kFifo), m.at(bms::SchedulerPolicy::kFifoDedup));
  detail += fmt("disagreement %.2e, %.2f s; ", summary.max_policy_disagreement, elapsed);
  detail += fmt("published reference lifo=%.0f fifo=%.0f fifo-dedup=%.0f (not asserted)",
                harness::kReferenceCounts[0], harness::kReferenceCounts[1], harness::kReferenceCounts[2]);
  return {pass, detail};
}

double brute_delta(const VariableNetwork& net, const std::vector<Evidence>& evidence, const std::string& question,
                   const merit::VariableTarget& target) {
  const auto now = exact_posterior(net, evidence);
  const std::size_t t = *net.node(net.require(target.node)).state_index(target.state);
  const auto& answers = net.node(net.require(question)).states;
  double total = 0.0;
  for (std::size_t a = 0; a < answers.size(); ++a) {
    const double p = now.at(question)[a];
    if (p <= 0.0) continue;
    auto with = evidence;
    with.push_back(Evidence::hard(question, answers[a]));
    total += p * std::abs(exact_posterior(net, with).at(target.node)[t] - now.at(target.node)[t]);
  }
  return total;
}

Outcome merit_correctness() {
  double worst = 0.0, worst_martingale = 0.0;
  std::size_t checked = 0;
  auto check_state = [&](const VariableNetwork& net, const std::vector<Evidence>& evidence,
                         const merit::VariableTarget& target, const std::vector<std::string>& questions) {
    auto state = bms::BeliefState::init_equilibrium(net);
    for (const auto& e : evidence) state.post_evidence(e);
    state.propagate_to_equilibrium();
    const double q_now = merit::current_value(state, target);
    for (const auto& q : questions) {
      worst = std::max(worst, std::abs(merit::merit(state, q, target).delta_p - brute_delta(net, evidence, q, target)));
      double signed_sum = 0.0;
      for (const auto& o : merit::answer_outcomes(state, q, target)) signed_sum += o.probability * (o.value - q_now);
      worst_martingale = std::max(worst_martingale, std::abs(signed_sum));
      ++checked;
    }
  };

  const auto stern = compiler::compile_bms(testing::stern_model());
  const std::vector<std::string> questions{"stern.square", "stern.round", "stern.tapered"};
  for (const auto& cls : stern.node(stern.require("class")).states) {
    check_state(stern, {}, {"class", cls}, questions);
    check_state(stern, {Evidence::graded("stern.round", 0.7)}, {"class", cls}, {"stern.square", "stern.tapered"});
  }
  const std::size_t trees = 50;
  for (std::uint64_t seed = 1; seed <= trees; ++seed) {
    std::mt19937_64 rng(seed + 90000);
    const auto net = harness::random_polytree(2 + rng() % 7, 3, rng(), harness::Orientation::kMixed);
    auto evidence = random_evidence(net, rng, 2);
    std::set<std::string> observed;
    for (const auto& e : evidence) observed.insert(e.node);
    const auto& t = net.node(rng() % net.size());
    std::vector<std::string> qs;
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (!observed.count(net.node(i).id)) qs.push_back(net.node(i).id);
    }
    check_state(net, evidence, {t.id, t.states[rng() % t.states.size()]}, qs);
  }
  return {worst <= 1e-9 && worst_martingale < 1e-6,
          fmt("%.0f merits (stern + %.0f polytrees), max deviation %.2e, martingale %.2e", checked, trees, worst,
              worst_martingale)};
}

Outcome compiler_goldens() {
  const auto stern = testing::stern_model();
  const auto net = compiler::compile_bms(stern);
  const bool bms_golden =
      save_network(net) == read_file(testing::source_path("models/golden/stern-plan-view.bms.json"));
  const bool pro_golden = save_network(compiler::compile_prospector(stern)) ==
                          read_file(testing::source_path("models/golden/stern-plan-view.prospector.json"));
  auto entry = [&](const std::string& attr, const std::string& cls) {
    const auto& type_states = net.node(net.require("stern")).states;
    const auto& comp = stern.components.front();
    const std::string& type = comp.membership.at(cls);
    const std::size_t row = std::find(type_states.begin(), type_states.end(), type) - type_states.begin();
    return net.node(net.require("stern." + attr)).cpt.at(row).at(0);
  };
  const double tapered = entry("tapered", "Sverdlov");
  const double square = entry("square", "Sverdlov");
  const double round = entry("round", "Virginia");
  return {bms_golden && pro_golden && tapered == 1.0 && square == 0.1 && round == 0.0,
          std::string("goldens ") + (bms_golden && pro_golden ? "identical" : "DIFFER") +
              fmt(", tapered|Sverdlov=%.17g square|Sverdlov=%.17g round|Virginia=%.17g", tapered, square, round)};
}

Outcome session_replay() {
  const auto model = session::CompiledModel::compile("stern-plan-view", testing::stern_model());
  double worst_replay = 0.0, worst_perm = 0.0;
  std::size_t journals = 0;
  for (int j = 1; j <= 20; ++j) {
    char name[64];
    std::snprintf(name, sizeof name, "tests/data/journals/journal-%02d.json", j);
    const std::string text = read_file(testing::source_path(name));
    const auto doc = nlohmann::json::parse(text);
    const auto kind = session::parse_engine(doc["engine"].get<std::string>());
    const auto journal = session::import_journal(text);
    const auto replayed = session::Session::replay(model, kind, journal);
    for (const auto& [id, dist] : replayed.beliefs()) {
      worst_replay = std::max(worst_replay,
                              testing::max_abs_diff(dist, doc["beliefs"][id].get<std::vector<double>>()));
    }
    auto order = journal;
    std::mt19937_64 rng(j);
    for (int p = 0; p < 5; ++p) {
      std::shuffle(order.begin(), order.end(), rng);
      const auto permuted = session::Session::replay(model, kind, order);
      const auto a = replayed.beliefs(), b = permuted.beliefs();
      for (const auto& [id, dist] : a) worst_perm = std::max(worst_perm, testing::max_abs_diff(dist, b.at(id)));
    }
    ++journals;
  }
  return {journals == 20 && worst_replay <= 1e-9 && worst_perm <= 1e-6,
          fmt("%.0f journals, replay deviation %.2e, permutation deviation %.2e", journals, worst_replay,
              worst_perm)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle-equivalence", oracle_equivalence},   {"prospector-exactness", prospector_exactness},
      {"engine-agreement", engine_agreement},       {"scheduler-ordering", scheduler_ordering},
      {"merit-correctness", merit_correctness},     {"compiler-goldens", compiler_goldens},
      {"session-replay", session_replay},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %-22s %s\n", out.pass ? "PASS" : "FAIL", name, out.detail.c_str());
    std::fflush(stdout);
    failures += !out.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
