// helm: command-line entry point. Exit 0 on success, 1 on usage errors,
// 2 on data or validation errors.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "helm/compiler.hpp"
#include "helm/error.hpp"
#include "helm/harness.hpp"
#include "helm/serialize.hpp"
#include "helm/service.hpp"
#include "helm/session.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

std::shared_ptr<const helm::session::CompiledModel> load_model(const std::string& path) {
  auto features = helm::load_feature_model(helm::read_file(path));
  return helm::session::CompiledModel::compile(fs::path(path).stem().string(), std::move(features));
}

void print_ranking(std::ostream& out, const helm::session::Session& s, std::size_t limit) {
  const auto rows = s.ranking();
  for (std::size_t i = 0; i < rows.size() && i < limit; ++i) {
    out << "  " << std::setw(2) << i + 1 << ". " << std::left << std::setw(16) << rows[i].id
        << std::right << std::fixed << std::setprecision(4) << rows[i].probability << "\n";
  }
  out.unsetf(std::ios::fixed);
}

void print_merits(std::ostream& out, const helm::session::Session& s) {
  out << "  question            deltaP     cost   merit\n";
  for (const auto& m : s.merits()) {
    out << "  " << std::left << std::setw(18) << m.question << std::right << std::fixed
        << std::setprecision(4) << std::setw(8) << m.delta_p << std::setw(8) << m.cost
        << std::setw(8) << m.merit << "\n";
  }
  out.unsetf(std::ios::fixed);
}

// Input lines:
//   <answer>           answers the proposed question
//   <node>=<state>     volunteers a hard observation
//   <node>~<p>         volunteers a graded observation, p in [0,1]
//   rank | merits | quit
int classify(const std::string& model_path, const std::string& engine, double threshold,
             std::istream& in, std::ostream& out) {
  auto model = load_model(model_path);
  helm::session::Options options;
  options.confidence_threshold = threshold;
  auto s = helm::session::Session::start(model, helm::session::parse_engine(engine), {}, options);
  out << "model " << model->name << ", engine " << engine << "\n";
  print_ranking(out, s, 5);

  std::string line;
  while (s.stop_check().active) {
    const auto question = s.ask();
    if (!question) break;
    const auto answers = s.answers(*question);
    out << "? " << *question << " [";
    for (std::size_t i = 0; i < answers.size(); ++i) out << (i ? "/" : "") << answers[i];
    out << "] " << std::flush;
    if (!std::getline(in, line)) {
      out << "\n";
      break;
    }
    line.erase(0, line.find_first_not_of(" \t"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    if (line == "quit") {
      s.stop();
      break;
    }
    if (line == "rank") {
      print_ranking(out, s, model->features.classes.size());
      continue;
    }
    if (line == "merits") {
      print_merits(out, s);
      continue;
    }
    try {
      if (auto eq = line.find('='); eq != std::string::npos) {
        s.volunteer(helm::Evidence::hard(line.substr(0, eq), line.substr(eq + 1)));
      } else if (auto tilde = line.find('~'); tilde != std::string::npos) {
        s.volunteer(helm::Evidence::graded(line.substr(0, tilde), std::stod(line.substr(tilde + 1))));
      } else {
        s.answer(*question, line);
      }
    } catch (const helm::Error& e) {
      out << "  " << helm::code_name(e.code()) << ": " << e.what() << "\n";
      continue;
    } catch (const std::invalid_argument&) {
      out << "  not a number: " << line << "\n";
      continue;
    }
    print_ranking(out, s, 5);
  }
  out << "status " << s.stop_check().to_string() << "\n";
  print_ranking(out, s, model->features.classes.size());
  return 0;
}

int compile(const std::string& model_path, const std::string& out_dir) {
  const auto features = helm::load_feature_model(helm::read_file(model_path));
  const std::string stem = fs::path(model_path).stem().string();
  const auto prospector = helm::compiler::compile_prospector_report(features);
  for (const auto& issue : prospector.report.warnings()) {
    std::cerr << "warning: " << issue.code << " " << issue.node << ": " << issue.message << "\n";
  }
  fs::create_directories(out_dir);
  const auto bms_path = (fs::path(out_dir) / (stem + ".bms.json")).string();
  const auto pro_path = (fs::path(out_dir) / (stem + ".prospector.json")).string();
  helm::write_file(bms_path, helm::save_network(helm::compiler::compile_bms(features)));
  helm::write_file(pro_path, helm::save_network(prospector.network));
  std::cout << bms_path << "\n" << pro_path << "\n";
  return 0;
}

int eval(const std::string& model_path, const std::string& engine,
         const std::vector<std::string>& journals) {
  auto model = load_model(model_path);
  const auto kind = helm::session::parse_engine(engine);
  Json out = Json::array();
  for (const auto& path : journals) {
    const auto journal = helm::session::import_journal(helm::read_file(path));
    const auto s = helm::session::Session::replay(model, kind, journal);
    Json ranking = Json::array();
    for (const auto& r : s.ranking()) ranking.push_back(Json{{"class", r.id}, {"probability", r.probability}});
    out.push_back(Json{{"journal", path}, {"ranking", std::move(ranking)}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

std::atomic<bool> g_interrupted{false};

int serve(helm::service::ServeConfig config) {
  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  helm::service::Server server(config);
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  try {
    server.run([&](int port) {
      std::cerr << "serving " << config.models_dir.string() << " on http://" << config.host << ":"
                << port << "\n";
    });
  } catch (...) {
    done = true;
    watcher.join();
    throw;
  }
  done = true;
  watcher.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"helm: ship-image classification engines, benchmarks and service"};
  app.require_subcommand(1);

  std::string model_path;
  std::string engine = "bms";
  double threshold = 0.95;
  auto* classify_cmd = app.add_subcommand("classify", "interactive classification session");
  classify_cmd->add_option("--model", model_path, "feature model JSON")->required();
  classify_cmd->add_option("--engine", engine, "bms or prospector")
      ->check(CLI::IsMember({"bms", "prospector"}));
  classify_cmd->add_option("--threshold", threshold, "stop when the leader reaches this");

  std::string out_dir = ".";
  auto* compile_cmd = app.add_subcommand("compile", "compile a feature model to network files");
  compile_cmd->add_option("--model", model_path, "feature model JSON")->required();
  compile_cmd->add_option("--out-dir", out_dir, "output directory");

  std::vector<std::string> journals;
  auto* eval_cmd = app.add_subcommand("eval", "replay journal files and print rankings");
  eval_cmd->add_option("--model", model_path, "feature model JSON")->required();
  eval_cmd->add_option("--engine", engine, "bms or prospector")
      ->check(CLI::IsMember({"bms", "prospector"}));
  eval_cmd->add_option("journals", journals, "journal files")->required();

  helm::harness::SweepConfig sweep;
  std::string orientation = "rooted";
  std::vector<std::string> policies;
  bool deterministic = false;
  bool same_network = false;
  auto* bench_cmd = app.add_subcommand("bench-sched", "scheduler update-count benchmark (CSV)");
  bench_cmd->add_option("--nodes", sweep.nodes)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--evidence", sweep.evidence);
  bench_cmd->add_option("--trials", sweep.trials)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", sweep.seed);
  bench_cmd->add_option("--max-states", sweep.max_states)->check(CLI::Range(2, 16));
  bench_cmd->add_option("--orientation", orientation)->check(CLI::IsMember({"rooted", "mixed"}));
  bench_cmd->add_option("--policies", policies, "lifo, fifo, fifo-dedup")->delimiter(',');
  bench_cmd->add_flag("--deterministic", deterministic, "record micros as 0");
  bench_cmd->add_flag("--same-network", same_network, "one network for every trial");

  std::string cases_path;
  auto* compare_cmd = app.add_subcommand("compare", "BMS vs PROSPECTOR rankings (JSON)");
  compare_cmd->add_option("--model", model_path, "feature model JSON")->required();
  compare_cmd->add_option("--cases", cases_path, "evidence cases JSON (default: single attributes)");

  helm::service::ServeConfig serve_config;
  if (const char* dir = std::getenv("HELM_MODELS_DIR")) serve_config.models_dir = dir;
  else serve_config.models_dir = "models";
  std::string models_dir = serve_config.models_dir.string();
  std::string journal_dir;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP/JSON session service");
  serve_cmd->add_option("--port", serve_config.port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", serve_config.host);
  serve_cmd->add_option("--models-dir", models_dir, "overrides HELM_MODELS_DIR");
  serve_cmd->add_option("--journal-dir", journal_dir, "session journals written here on shutdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*classify_cmd) return classify(model_path, engine, threshold, std::cin, std::cout);
    if (*compile_cmd) return compile(model_path, out_dir);
    if (*eval_cmd) return eval(model_path, engine, journals);
    if (*bench_cmd) {
      sweep.orientation = orientation == "mixed" ? helm::harness::Orientation::kMixed
                                                 : helm::harness::Orientation::kRooted;
      if (!policies.empty()) {
        sweep.policies.clear();
        for (const auto& p : policies) sweep.policies.push_back(helm::bms::parse_policy(p));
      }
      sweep.options.timing = !deterministic;
      sweep.fresh_network_per_trial = !same_network;
      const auto records = helm::harness::scheduler_sweep(sweep);
      std::cout << helm::harness::to_csv(records);
      std::cerr << helm::harness::summary_text(helm::harness::summarize(records));
      return 0;
    }
    if (*compare_cmd) {
      const auto features = helm::load_feature_model(helm::read_file(model_path));
      const auto cases = cases_path.empty()
                             ? helm::harness::single_attribute_cases(features)
                             : helm::harness::load_cases(helm::read_file(cases_path));
      std::cout << helm::harness::to_json(helm::harness::compare_engines(features, cases));
      return 0;
    }
    if (*serve_cmd) {
      serve_config.models_dir = models_dir;
      serve_config.journal_dir = journal_dir;
      return serve(serve_config);
    }
  } catch (const helm::Error& e) {
    std::cerr << "error: " << helm::code_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == helm::ErrorCode::kInvalidArgument ? kUsageError : kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
