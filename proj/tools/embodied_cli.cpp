// Command line front end: serve the console API, replay session logs,
// simulate gestures on the virtual device, check protocol vectors and run
// the study tooling.

#include <csignal>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "embodied/console_service.hpp"
#include "embodied/gesture.hpp"
#include "embodied/protocol.hpp"
#include "embodied/session_log.hpp"
#include "embodied/study.hpp"
#include "embodied/virtual_device.hpp"

namespace {

using namespace embodied;

ConsoleService* g_service = nullptr;

void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

int cmd_serve(const std::string& config_path, bool stub_all) {
  ServiceConfig config = config_path.empty() ? ServiceConfig{} : load_config(config_path);
  apply_env_overrides(config);
  if (stub_all) force_stubs(config);
  Application app = build_application(config);
  ConsoleService service(*app.controller, app.virtual_device, app.info);
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int port = service.start(config.host, config.port);
  std::cerr << "listening on http://" << config.host << ":" << port << " (stt " << app.info.stt << ", llm "
            << app.info.llm << ", tts " << app.info.tts << ", device " << app.info.device << ")\n";
  service.wait();
  service.stop();
  g_service = nullptr;
  return 0;
}

int cmd_replay(const std::string& path, bool json_out) {
  auto result = read_log(std::filesystem::path(path));
  if (result.error && result.records.empty()) throw *result.error;
  const ConversationHistory history = history_from_records(result.records);
  std::cout << "session " << history.session_id << ": " << history.turns.size() << " turns, "
            << history.exchanges() << " exchanges\n";
  for (const auto& r : result.records) {
    if (json_out) {
      std::cout << to_line(r) << "\n";
      continue;
    }
    std::cout << "[" << r.turn_index << "] " << to_string(r.role);
    if (r.sentiment) std::cout << " (" << to_name(*r.sentiment) << ")";
    if (r.repaired) std::cout << " [repaired]";
    std::cout << ": " << (r.role == Role::System ? "<pre-prompt>" : r.text) << "\n";
  }
  if (result.error) {
    std::cerr << "warning: " << result.error->what() << "; later records ignored\n";
    return 2;
  }
  return 0;
}

int cmd_simulate(const std::string& label, std::uint64_t seed, double max_deg, double max_time_frac,
                 const std::string& table_path) {
  auto sentiment = from_name(label);
  if (!sentiment && label.size() == 1) sentiment = from_wire_char(label[0]);
  if (!sentiment) {
    std::cerr << "unknown gesture '" << label << "' (greeting, happy, sad, serious, dance or a..e)\n";
    return 1;
  }
  link::DeviceOptions opts;
  if (!table_path.empty()) opts.table = gesture::load_table(table_path);
  opts.jitter = {max_deg, max_time_frac, seed};
  link::VirtualDevice device(opts);
  const auto frame = link::encode_command(*sentiment);
  std::cerr << "command " << link::to_hex(frame) << "\n";
  device.receive(frame, 0);
  const auto end = static_cast<std::int64_t>(device.timeline().back().t_ms) + 100;
  for (const auto& f : device.step(end)) std::cout << dump(to_json(f)) << "\n";
  return 0;
}

int cmd_link_check(const std::string& path) {
  const auto vectors = link::load_vectors(path);
  int failures = 0;
  for (const auto& v : vectors) {
    const auto got = link::try_decode(v.bytes);
    const bool ok = got == v.expected;
    if (!ok) ++failures;
    std::cout << (ok ? "PASS " : "FAIL ") << "line " << v.line << " " << link::to_hex(v.bytes) << " -> "
              << link::format_result(got) << " (expected " << link::format_result(v.expected) << ")\n";
  }
  std::cout << vectors.size() - failures << "/" << vectors.size() << " vectors pass\n";
  return failures == 0 ? 0 : 1;
}

int cmd_study_summarize(const std::string& path) {
  study::print_summary(std::cout, study::summarize(study::ingest_csv(path)));
  return 0;
}

int cmd_study_assign(std::size_t n, std::uint64_t seed) {
  const auto orders = study::counterbalance(n, seed);
  for (std::size_t i = 0; i < orders.size(); ++i) {
    std::cout << "P" << (i + 1) << "," << study::to_string(orders[i]) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embodied conversational agent runtime"};
  app.require_subcommand(1);

  std::string config_path;
  bool stub_all = false;
  auto* serve = app.add_subcommand("serve", "Run the session loop and console HTTP API");
  serve->add_option("--config", config_path, "JSON config file");
  serve->add_flag("--stub-all", stub_all, "Use deterministic stub STT/LLM/TTS clients");

  std::string log_path;
  bool replay_json = false;
  auto* replay = app.add_subcommand("replay", "Rebuild and print a session from its log");
  replay->add_option("log", log_path, "Session log (.jsonl)")->required();
  replay->add_flag("--json", replay_json, "Print records as JSON lines");

  std::string gesture_label;
  std::uint64_t seed = 0;
  double max_deg = 5.0;
  double max_time_frac = 0.1;
  std::string table_path;
  auto* simulate = app.add_subcommand("simulate", "Play one gesture on the virtual device and print telemetry");
  simulate->add_option("--gesture", gesture_label, "greeting|happy|sad|serious|dance")->required();
  simulate->add_option("--seed", seed, "Jitter seed");
  simulate->add_option("--max-deg", max_deg, "Angle jitter bound in degrees");
  simulate->add_option("--max-time-frac", max_time_frac, "Timing jitter fraction");
  simulate->add_option("--table", table_path, "Gesture table file");

  std::string vectors_path;
  auto* link_cmd = app.add_subcommand("link", "Device link tools");
  link_cmd->require_subcommand(1);
  auto* check = link_cmd->add_subcommand("check", "Decode a conformance vector file");
  check->add_option("vectors", vectors_path, "Vector file")->required();

  std::string csv_path;
  std::size_t n_participants = 6;
  std::uint64_t study_seed = 0;
  auto* study_cmd = app.add_subcommand("study", "Pilot study tooling");
  study_cmd->require_subcommand(1);
  auto* summarize = study_cmd->add_subcommand("summarize", "Per-item Likert statistics");
  summarize->add_option("csv", csv_path, "Survey CSV")->required();
  auto* assign = study_cmd->add_subcommand("assign", "Counterbalanced condition order");
  assign->add_option("--n", n_participants, "Number of participants");
  assign->add_option("--seed", study_seed, "Shuffle seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return cmd_serve(config_path, stub_all);
    if (*replay) return cmd_replay(log_path, replay_json);
    if (*simulate) return cmd_simulate(gesture_label, seed, max_deg, max_time_frac, table_path);
    if (*check) return cmd_link_check(vectors_path);
    if (*summarize) return cmd_study_summarize(csv_path);
    if (*assign) return cmd_study_assign(n_participants, study_seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
