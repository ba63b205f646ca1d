#include "helm/session.hpp"

#include <algorithm>
#include <atomic>

#include "evidence_json.hpp"
#include "helm/error.hpp"

namespace helm::session {

std::string_view engine_name(EngineKind kind) {
  return kind == EngineKind::kBms ? "bms" : "prospector";
}

EngineKind parse_engine(std::string_view name) {
  if (name == "bms") return EngineKind::kBms;
  if (name == "prospector") return EngineKind::kProspector;
  throw Error(ErrorCode::kInvalidArgument, "unknown engine '" + std::string(name) + "'");
}

std::string_view source_name(Source source) {
  return source == Source::kAsked ? "asked" : "volunteered";
}

Source parse_source(std::string_view name) {
  if (name == "asked") return Source::kAsked;
  if (name == "volunteered") return Source::kVolunteered;
  throw Error(ErrorCode::kInvalidArgument, "unknown evidence source '" + std::string(name) + "'");
}

std::string_view reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::kNone: return "none";
    case StopReason::kConfident: return "confident";
    case StopReason::kExhausted: return "exhausted";
    case StopReason::kOperator: return "operator";
  }
  return "none";
}

std::string Status::to_string() const {
  if (active) return "active";
  return "stopped(" + std::string(reason_name(reason)) + ")";
}

std::shared_ptr<const CompiledModel> CompiledModel::compile(std::string name,
                                                            FeatureModel features) {
  auto model = std::make_shared<CompiledModel>();
  model->name = std::move(name);
  model->bms = std::make_shared<const bms::Model>(compiler::compile_bms(features));
  model->prospector =
      std::make_shared<const prospector::Model>(compiler::compile_prospector(features));
  model->observations = compiler::observations(features);
  model->features = std::move(features);
  return model;
}

bool CompiledModel::askable(const std::string& node) const {
  return std::any_of(observations.begin(), observations.end(),
                     [&](const compiler::Observation& o) { return o.id == node; });
}

namespace {

std::string generate_id() {
  static std::atomic<unsigned long long> counter{0};
  return "s" + std::to_string(++counter);
}

}  // namespace

Session::Session(std::shared_ptr<const CompiledModel> model, EngineKind engine, std::string id,
                 Options options)
    : model_(std::move(model)),
      engine_(engine),
      id_(id.empty() ? generate_id() : std::move(id)),
      options_(options),
      engine_state_(fresh_state()) {}

Session::EngineState Session::fresh_state() const {
  if (engine_ == EngineKind::kBms) return bms::BeliefState::init_equilibrium(model_->bms);
  return prospector::State(model_->prospector);
}

Session Session::start(std::shared_ptr<const CompiledModel> model, EngineKind engine,
                       std::string id, Options options) {
  if (!model) throw Error(ErrorCode::kInvalidArgument, "no model");
  return Session(std::move(model), engine, std::move(id), options);
}

Session Session::replay(std::shared_ptr<const CompiledModel> model, EngineKind engine,
                        const std::vector<JournalEntry>& journal, std::string id,
                        Options options) {
  Session session = start(std::move(model), engine, std::move(id), options);
  for (const auto& entry : journal) session.post(entry.evidence, entry.source);
  return session;
}

void Session::apply(EngineState& state, const Evidence& evidence) const {
  if (auto* belief = std::get_if<bms::BeliefState>(&state)) {
    belief->post_evidence(evidence);
    belief->propagate_to_equilibrium(options_.policy);
  } else {
    auto& props = std::get<prospector::State>(state);
    props.post(evidence);
    props.propagate();
  }
}

void Session::require_active() const {
  if (!status_.active) {
    throw Error(ErrorCode::kSessionStopped, "session " + id_ + " is " + status_.to_string());
  }
}

void Session::volunteer(const Evidence& evidence) { post(evidence, Source::kVolunteered); }

void Session::answer(const std::string& question, const std::string& value) {
  answer(Evidence::hard(question, value));
}

void Session::answer(const Evidence& evidence) { post(evidence, Source::kAsked); }

void Session::post(const Evidence& evidence, Source source) {
  require_active();
  if (source == Source::kAsked && !model_->askable(evidence.node)) {
    if (engine_ == EngineKind::kBms) model_->bms->network().require(evidence.node);
    else model_->prospector->network().require(evidence.node);
    throw Error(ErrorCode::kNotAskable, "'" + evidence.node + "' is not a question");
  }
  JournalEntry entry{next_seq_, evidence, source, std::chrono::system_clock::now()};
  const bool revision = std::any_of(journal_.begin(), journal_.end(), [&](const JournalEntry& e) {
    return e.evidence.node == evidence.node;
  });
  if (!revision) {
    EngineState next = engine_state_;
    apply(next, evidence);
    engine_state_ = std::move(next);
    journal_.push_back(std::move(entry));
  } else {
    std::vector<JournalEntry> revised;
    for (const auto& e : journal_) {
      if (e.evidence.node != evidence.node) revised.push_back(e);
    }
    revised.push_back(std::move(entry));
    EngineState next = fresh_state();
    for (const auto& e : revised) apply(next, e.evidence);
    engine_state_ = std::move(next);
    journal_ = std::move(revised);
  }
  ++next_seq_;
}

std::vector<RankEntry> Session::ranking() const {
  std::vector<RankEntry> out;
  if (const auto* belief = bms_state()) {
    for (const auto& r : belief->rank_states(std::string(compiler::kClassNode))) {
      out.push_back({r.state, r.probability});
    }
  } else {
    for (const auto& r : prospector_state()->rank_classes()) out.push_back({r.id, r.probability});
  }
  return out;
}

std::vector<merit::MeritRecord> Session::merits() const {
  const std::string leader = ranking().front().id;
  const auto pending = unanswered();
  if (const auto* belief = bms_state()) {
    std::map<std::string, double> costs;
    for (const auto& o : model_->observations) costs[o.id] = o.cost;
    return merit::merit_table(*belief, pending,
                              {std::string(compiler::kClassNode), leader}, costs);
  }
  return merit::merit_table(*prospector_state(), pending, leader);
}

std::optional<std::string> Session::ask() const {
  require_active();
  return merit::select(merits(), {options_.stop_on_zero_merit});
}

std::map<std::string, Distribution> Session::beliefs() const {
  std::map<std::string, Distribution> out;
  if (const auto* belief = bms_state()) {
    for (std::size_t i = 0; i < belief->network().size(); ++i) {
      out.emplace(belief->network().node(i).id, belief->belief(i));
    }
  } else {
    for (const auto& [id, p] : prospector_state()->snapshot()) out.emplace(id, Distribution{p, 1.0 - p});
  }
  return out;
}

std::vector<std::string> Session::answers(const std::string& question) const {
  if (const auto* belief = bms_state()) {
    return belief->network().node(belief->network().require(question)).states;
  }
  const auto& net = prospector_state()->network();
  return net.node(net.require(question)).answers;
}

Status Session::stop_check(std::optional<double> threshold) {
  if (!status_.active) return status_;
  const double limit = threshold.value_or(options_.confidence_threshold);
  if (ranking().front().probability >= limit) {
    status_ = {false, StopReason::kConfident};
  } else if (unanswered().empty()) {
    status_ = {false, StopReason::kExhausted};
  }
  return status_;
}

void Session::stop(StopReason reason) {
  if (status_.active) status_ = {false, reason};
}

std::set<std::string> Session::answered() const {
  std::set<std::string> out;
  for (const auto& e : journal_) out.insert(e.evidence.node);
  return out;
}

std::vector<std::string> Session::unanswered() const {
  const auto done = answered();
  std::vector<std::string> out;
  for (const auto& o : model_->observations) {
    if (!done.count(o.id)) out.push_back(o.id);
  }
  return out;
}

std::string export_journal(const std::vector<JournalEntry>& journal) {
  detail::Json doc = detail::Json::array();
  for (const auto& entry : journal) {
    detail::Json item = detail::Json::object();
    item["seq"] = entry.seq;
    item["node"] = entry.evidence.node;
    item["form"] = entry.evidence.form_name();
    item["value"] = detail::evidence_value(entry.evidence);
    item["source"] = source_name(entry.source);
    doc.push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

std::vector<JournalEntry> import_journal(std::string_view text) {
  detail::Json doc = detail::parse(text);
  // Recorded fixtures wrap the list as {"journal": [...], ...}.
  if (doc.is_object() && doc.contains("journal")) doc = detail::Json(doc["journal"]);
  if (!doc.is_array()) detail::schema_error("journal", "must be a JSON array");
  std::vector<JournalEntry> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "journal[" + std::to_string(i) + "]";
    JournalEntry entry;
    entry.evidence = detail::evidence_from_json(doc[i], where);
    entry.seq = i + 1;
    if (const auto* seq = detail::optional_field(doc[i], "seq")) {
      entry.seq = detail::get<std::size_t>(*seq, where + ".seq");
    }
    if (const auto* source = detail::optional_field(doc[i], "source")) {
      try {
        entry.source = parse_source(detail::get<std::string>(*source, where + ".source"));
      } catch (const Error& e) {
        detail::schema_error(where + ".source", e.what());
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace helm::session
