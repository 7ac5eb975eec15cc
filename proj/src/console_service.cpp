#include "embodied/console_service.hpp"

#include <chrono>

#include <httplib.h>

namespace embodied {

namespace {

using nlohmann::json;
using SteadyClock = std::chrono::steady_clock;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(dump(body), "application/json");
}

void send_error(httplib::Response& res, const ServiceError& e) {
  send_json(res, e.http_status(),
            {{"code", e.code()}, {"message", e.what()}, {"state", to_string(e.state())}});
}

// Streams JSON values from a subscription as server-sent events.
template <typename T>
void serve_stream(httplib::Response& res, Broadcaster<T>& source, const std::atomic<bool>& running,
                  const char* event_name) {
  auto sub = source.subscribe();
  res.set_header("Cache-Control", "no-cache");
  res.set_chunked_content_provider(
      "text/event-stream",
      [sub, &running, event_name](std::size_t, httplib::DataSink& sink) {
        if (!running.load()) return false;
        std::string chunk;
        if (auto value = sub->pop(std::chrono::milliseconds(500))) {
          chunk = std::string("event: ") + event_name + "\ndata: " + dump(*value) + "\n\n";
          for (auto& more : sub->drain()) chunk += std::string("event: ") + event_name + "\ndata: " + dump(more) + "\n\n";
        } else {
          if (sub->closed()) return false;
          chunk = ": keepalive\n\n";
        }
        return sink.write(chunk.data(), chunk.size());
      });
}

}  // namespace

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

json to_json(const SessionLogRecord& r) {
  return json{{"session_id", r.session_id},
              {"turn", r.turn_index},
              {"role", to_string(r.role)},
              {"text", r.text},
              {"sentiment", r.sentiment ? json(std::string(1, to_wire_char(*r.sentiment))) : json(nullptr)},
              {"timestamp_ms", r.timestamp_ms},
              {"repaired", r.repaired},
              {"word_count", r.word_count}};
}

json to_json(const link::TelemetryFrame& f) {
  json angles = json::object();
  for (auto j : gesture::kAllJoints) angles[std::string(gesture::to_string(j))] = gesture::at(f.angles, j);
  return json{{"t_ms", f.t_ms},
              {"angles", angles},
              {"active_gesture", f.active_gesture ? json(std::string(to_name(*f.active_gesture))) : json(nullptr)}};
}

ConsoleService::ConsoleService(SessionController& controller, std::shared_ptr<link::DeviceHandle> device,
                               AdapterInfo info)
    : controller_(controller),
      device_(std::move(device)),
      info_(std::move(info)),
      server_(std::make_unique<httplib::Server>()) {
  routes();
}

ConsoleService::~ConsoleService() { stop(); }

void ConsoleService::routes() {
  auto& srv = *server_;

  srv.Post("/session/start", [this](const httplib::Request&, httplib::Response& res) {
    try {
      send_json(res, 200, {{"session_id", controller_.start_session()}});
    } catch (const ServiceError& e) {
      send_error(res, e);
    }
  });

  srv.Post("/session/stop", [this](const httplib::Request&, httplib::Response& res) {
    try {
      controller_.stop_session();
      send_json(res, 200, json::object());
    } catch (const ServiceError& e) {
      send_error(res, e);
    }
  });

  srv.Post("/session/ptt", [this](const httplib::Request&, httplib::Response& res) {
    try {
      const SessionState s = controller_.push_to_talk();
      send_json(res, 200, {{"state", to_string(s)}});
    } catch (const ServiceError& e) {
      send_error(res, e);
    }
  });

  srv.Get("/session/transcript", [this](const httplib::Request&, httplib::Response& res) {
    json records = json::array();
    for (const auto& r : controller_.transcript()) records.push_back(to_json(r));
    auto id = controller_.session_id();
    send_json(res, 200,
              {{"session_id", id ? json(*id) : json(nullptr)},
               {"state", to_string(controller_.state())},
               {"records", records}});
  });

  srv.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              {{"status", "ok"},
               {"state", to_string(controller_.state())},
               {"adapters", {{"stt", info_.stt}, {"llm", info_.llm}, {"tts", info_.tts}, {"device", info_.device}}}});
  });

  srv.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
    serve_stream(res, controller_.events(), running_, "event");
  });

  srv.Get("/telemetry", [this](const httplib::Request&, httplib::Response& res) {
    serve_stream(res, telemetry_, running_, "telemetry");
  });

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    }
    send_json(res, 500, {{"code", "InternalError"}, {"message", message}, {"state", nullptr}});
  });
}

void ConsoleService::telemetry_loop() {
  auto next = SteadyClock::now();
  while (running_.load()) {
    for (const auto& frame : device_->step()) telemetry_.publish(to_json(frame));
    next += std::chrono::milliseconds(50);
    std::this_thread::sleep_until(next);
  }
}

int ConsoleService::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("BindFailed", "cannot listen on " + host + ":" + std::to_string(port));
  running_ = true;
  if (device_) telemetry_thread_ = std::thread([this] { telemetry_loop(); });
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void ConsoleService::wait() {
  if (server_thread_.joinable()) server_thread_.join();
}

void ConsoleService::stop() {
  const bool was_running = running_.exchange(false);
  if (was_running) {
    telemetry_.close_all();
    server_->stop();
  }
  if (server_thread_.joinable() && server_thread_.get_id() != std::this_thread::get_id()) server_thread_.join();
  if (telemetry_thread_.joinable()) telemetry_thread_.join();
}

std::vector<std::string> default_stub_transcripts() {
  return {"hello there", "can you help me with five across", "thank you so much"};
}

std::vector<std::string> default_stub_replies() {
  return {R"({"Response": "Hello! I'm happy to help you today.", "Sentiment": "a"})",
          R"({"Response": "Sure! Read me the clue for five across and we can work it out together.", "Sentiment": "b"})",
          R"({"Response": "You're welcome! That was fun. Let's celebrate!", "Sentiment": "e"})"};
}

Application build_application(const ServiceConfig& config) {
  validate(config);
  Application app;
  SessionRuntime rt;

  if (config.stt == AdapterKind::Live) {
    rt.stt = std::make_unique<HttpStt>(stt_endpoint_from_env(config.stt_model));
  } else {
    rt.stt = std::make_unique<StubStt>(config.stub_transcripts.empty() ? default_stub_transcripts()
                                                                        : load_script(config.stub_transcripts));
  }
  if (config.llm == AdapterKind::Live) {
    rt.llm = std::make_unique<HttpLlm>(llm_endpoint_from_env(config.llm_model));
  } else {
    rt.llm = std::make_unique<StubLlm>(config.stub_replies.empty() ? default_stub_replies()
                                                                    : load_script(config.stub_replies));
  }
  if (config.tts == AdapterKind::Live) {
    rt.tts = std::make_unique<EspeakTts>(config.tts_executable);
  } else {
    rt.tts = std::make_unique<StubTts>();
  }
  app.info = {std::string(to_string(config.stt)) + ":" + rt.stt->name(),
              std::string(to_string(config.llm)) + ":" + rt.llm->name(),
              std::string(to_string(config.tts)) + ":" + rt.tts->name(), std::string(to_string(config.device))};

  switch (config.audio_source) {
    case AudioSourceKind::Synthetic:
      rt.open_source = [] {
        audio::AudioSegment seg = audio::silence(0.2);
        audio::append(seg, audio::tone(1.0));
        audio::append(seg, audio::silence(1.0));
        return std::make_unique<audio::SegmentSource>(std::move(seg));
      };
      break;
    case AudioSourceKind::Wav: {
      const auto wav = audio::read_wav(config.audio_wav);
      rt.open_source = [wav] { return std::make_unique<audio::SegmentSource>(wav); };
      break;
    }
    case AudioSourceKind::Command: {
      const auto cmd = config.capture_command;
      rt.open_source = [cmd] { return std::make_unique<audio::CommandSource>(cmd); };
      break;
    }
  }
  if (config.playback_command.empty()) {
    rt.sink = std::make_unique<audio::NullSink>(config.playback_time_scale);
  } else {
    rt.sink = std::make_unique<audio::CommandSink>(config.playback_command);
  }

  if (config.device == DeviceTransport::Virtual) {
    link::DeviceOptions opts;
    if (!config.gesture_table.empty()) opts.table = gesture::load_table(config.gesture_table);
    opts.jitter = config.jitter;
    const auto t0 = SteadyClock::now();
    app.virtual_device = std::make_shared<link::DeviceHandle>(std::move(opts), [t0] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(SteadyClock::now() - t0).count();
    });
    rt.device = app.virtual_device;
  } else {
    rt.device = std::make_shared<link::SerialLink>(config.serial_port, config.baud);
  }

  rt.endpointer = config.endpointer;
  rt.voice = config.voice;
  rt.brevity_limit = config.brevity_limit;
  rt.max_exchanges = config.max_exchanges;
  rt.log_dir = config.log_dir;
  app.controller = std::make_unique<SessionController>(std::move(rt));
  return app;
}

}  // namespace embodied
