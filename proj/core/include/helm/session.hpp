#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "helm/bms.hpp"
#include "helm/compiler.hpp"
#include "helm/merit.hpp"
#include "helm/prospector.hpp"

namespace helm::session {

enum class EngineKind { kBms, kProspector };
std::string_view engine_name(EngineKind kind);
EngineKind parse_engine(std::string_view name);

enum class Source { kVolunteered, kAsked };
std::string_view source_name(Source source);
Source parse_source(std::string_view name);

enum class StopReason { kNone, kConfident, kExhausted, kOperator };
std::string_view reason_name(StopReason reason);

struct Status {
  bool active = true;
  StopReason reason = StopReason::kNone;

  // "active", "stopped(confident)", ...
  std::string to_string() const;
};

struct JournalEntry {
  std::size_t seq = 0;
  Evidence evidence;
  Source source = Source::kVolunteered;
  std::chrono::system_clock::time_point timestamp{};
};

// A feature model compiled for both engines; shared by every session on it.
struct CompiledModel {
  std::string name;
  FeatureModel features;
  std::shared_ptr<const bms::Model> bms;
  std::shared_ptr<const prospector::Model> prospector;
  std::vector<compiler::Observation> observations;

  static std::shared_ptr<const CompiledModel> compile(std::string name, FeatureModel features);
  bool askable(const std::string& node) const;
};

struct RankEntry {
  std::string id;
  double probability = 0.0;
};

struct Options {
  double confidence_threshold = 0.95;
  bool stop_on_zero_merit = false;
  bms::SchedulerPolicy policy = bms::SchedulerPolicy::kFifoDedup;
};

// Mixed-initiative consultation. The journal fully determines the engine
// state: revising an answer replays the journal from scratch.
class Session {
 public:
  static Session start(std::shared_ptr<const CompiledModel> model, EngineKind engine,
                       std::string id = {}, Options options = {});
  // Fresh session fed the given journal, in order.
  static Session replay(std::shared_ptr<const CompiledModel> model, EngineKind engine,
                        const std::vector<JournalEntry>& journal, std::string id = {},
                        Options options = {});

  const std::string& id() const { return id_; }
  EngineKind engine() const { return engine_; }
  const CompiledModel& model() const { return *model_; }
  std::shared_ptr<const CompiledModel> model_ptr() const { return model_; }
  const Options& options() const { return options_; }
  Status status() const { return status_; }

  // Posts evidence and propagates. On failure the session is untouched.
  void volunteer(const Evidence& evidence);
  void answer(const std::string& question, const std::string& value);
  void answer(const Evidence& evidence);
  void post(const Evidence& evidence, Source source);

  // Next question by merit against the current leader; nullopt once every
  // askable is answered (or, optionally, nothing has positive merit).
  std::optional<std::string> ask() const;
  std::vector<merit::MeritRecord> merits() const;

  std::vector<RankEntry> ranking() const;
  std::map<std::string, Distribution> beliefs() const;
  // Answer names for a question node.
  std::vector<std::string> answers(const std::string& question) const;

  Status stop_check(std::optional<double> threshold = std::nullopt);
  void stop(StopReason reason = StopReason::kOperator);

  const std::vector<JournalEntry>& journal() const { return journal_; }
  std::set<std::string> answered() const;
  std::vector<std::string> unanswered() const;

  const bms::BeliefState* bms_state() const { return std::get_if<bms::BeliefState>(&engine_state_); }
  const prospector::State* prospector_state() const {
    return std::get_if<prospector::State>(&engine_state_);
  }

 private:
  using EngineState = std::variant<bms::BeliefState, prospector::State>;

  Session(std::shared_ptr<const CompiledModel> model, EngineKind engine, std::string id,
          Options options);
  EngineState fresh_state() const;
  void apply(EngineState& state, const Evidence& evidence) const;
  void require_active() const;

  std::shared_ptr<const CompiledModel> model_;
  EngineKind engine_;
  std::string id_;
  Options options_;
  EngineState engine_state_;
  std::vector<JournalEntry> journal_;
  std::size_t next_seq_ = 1;
  Status status_;
};

// Journal persistence: JSON list of {seq, node, form, value, source}. Import
// also accepts an object holding that list under "journal".
std::string export_journal(const std::vector<JournalEntry>& journal);
std::vector<JournalEntry> import_journal(std::string_view text);

}  // namespace helm::session
