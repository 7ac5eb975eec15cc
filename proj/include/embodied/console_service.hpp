#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

#include "embodied/broadcast.hpp"
#include "embodied/config.hpp"
#include "embodied/session_controller.hpp"
#include "embodied/virtual_device.hpp"

namespace httplib {
class Server;
}

namespace embodied {

nlohmann::json to_json(const SessionLogRecord& record);
nlohmann::json to_json(const link::TelemetryFrame& frame);
/// Serializes for the wire, replacing invalid UTF-8.
std::string dump(const nlohmann::json& j);

struct AdapterInfo {
  std::string stt;
  std::string llm;
  std::string tts;
  std::string device;
};

/// HTTP front end for one SessionController.
///
///   POST /session/start       200 {session_id}      409 SessionActive
///   POST /session/stop        200 {}                409 SessionBusy | NoSession
///   POST /session/ptt         200 {state}           409 SessionBusy
///   GET  /session/transcript  200 {session_id, records: [SessionLogRecord...]}
///   GET  /healthz             200 {status, state, adapters}
///   GET  /events              text/event-stream of ServiceEvent
///   GET  /telemetry           text/event-stream of TelemetryFrame
///
/// Errors use the body {code, message, state}.
class ConsoleService {
 public:
  /// `device` may be null (serial transport has no telemetry).
  ConsoleService(SessionController& controller, std::shared_ptr<link::DeviceHandle> device, AdapterInfo info);
  ~ConsoleService();
  ConsoleService(const ConsoleService&) = delete;
  ConsoleService& operator=(const ConsoleService&) = delete;

  /// Binds and starts serving on a background thread. Port 0 picks a free
  /// port. Returns the bound port; throws Error{"BindFailed"}.
  int start(const std::string& host, int port);
  /// Blocks until stop() is called.
  void wait();
  void stop();

  Broadcaster<nlohmann::json>& telemetry() noexcept { return telemetry_; }

 private:
  void routes();
  void telemetry_loop();

  SessionController& controller_;
  std::shared_ptr<link::DeviceHandle> device_;
  AdapterInfo info_;
  std::unique_ptr<httplib::Server> server_;
  Broadcaster<nlohmann::json> telemetry_;
  std::atomic<bool> running_{false};
  std::thread server_thread_;
  std::thread telemetry_thread_;
};

/// A runtime assembled from configuration: clients, audio, device link and
/// the session controller.
struct Application {
  std::shared_ptr<link::DeviceHandle> virtual_device;  // null for serial
  std::unique_ptr<SessionController> controller;
  AdapterInfo info;
};

/// Default stub scripts used when the config names no files.
std::vector<std::string> default_stub_transcripts();
std::vector<std::string> default_stub_replies();

Application build_application(const ServiceConfig& config);

}  // namespace embodied
