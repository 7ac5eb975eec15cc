#include <doctest.h>

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <mutex>

#include <httplib.h>

#include "embodied/console_service.hpp"

using namespace embodied;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

// Blocks playback until released so a test can act while the agent speaks.
class GatedSink : public audio::AudioSink {
 public:
  void play(const audio::AudioSegment&) override {
    std::unique_lock lock(mutex_);
    playing_ = true;
    cv_.notify_all();
    cv_.wait(lock, [this] { return open_; });
    playing_ = false;
  }
  void release() {
    std::lock_guard lock(mutex_);
    open_ = true;
    cv_.notify_all();
  }
  bool wait_playing(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, timeout, [this] { return playing_; });
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  bool open_ = false;
  bool playing_ = false;
};

audio::AudioSegment utterance() {
  auto seg = audio::tone(0.4);
  audio::append(seg, audio::silence(1.1));
  return seg;
}

SessionRuntime stub_runtime(std::unique_ptr<audio::AudioSink> sink, std::shared_ptr<link::DeviceSender> device,
                            std::filesystem::path log_dir = {}) {
  SessionRuntime rt;
  rt.stt = std::make_unique<StubStt>(std::vector<std::string>{"hello", "tell me a joke"});
  rt.llm = std::make_unique<StubLlm>(std::vector<std::string>{
      R"({"Response": "Hi there!", "Sentiment": "a"})", R"({"Response": "Why did the robot dance?", "Sentiment": "e"})"});
  rt.tts = std::make_unique<StubTts>();
  rt.open_source = [] { return std::make_unique<audio::SegmentSource>(utterance()); };
  rt.sink = std::move(sink);
  rt.device = std::move(device);
  rt.log_dir = std::move(log_dir);
  return rt;
}

struct Fixture {
  GatedSink* gate = nullptr;
  std::shared_ptr<link::RecordingSender> device = std::make_shared<link::RecordingSender>();
  std::unique_ptr<SessionController> controller;
  std::unique_ptr<ConsoleService> service;
  std::unique_ptr<httplib::Client> client;

  explicit Fixture(bool gated, std::filesystem::path log_dir = {}) {
    std::unique_ptr<audio::AudioSink> sink;
    if (gated) {
      auto g = std::make_unique<GatedSink>();
      gate = g.get();
      sink = std::move(g);
    } else {
      sink = std::make_unique<audio::NullSink>();
    }
    controller = std::make_unique<SessionController>(stub_runtime(std::move(sink), device, std::move(log_dir)));
    service = std::make_unique<ConsoleService>(*controller, nullptr, AdapterInfo{"stub", "stub", "stub", "virtual"});
    const int port = service->start("127.0.0.1", 0);
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(5, 0);
  }
  ~Fixture() {
    if (gate) gate->release();
    service->stop();
    controller.reset();
  }

  json post(const std::string& path, int expected_status) {
    auto res = client->Post(path);
    REQUIRE(res);
    CHECK(res->status == expected_status);
    return json::parse(res->body);
  }
  json get(const std::string& path) {
    auto res = client->Get(path);
    REQUIRE(res);
    CHECK(res->status == 200);
    return json::parse(res->body);
  }
  bool wait_turns(std::uint64_t n) {
    return controller->wait_for([n](SessionState s, std::uint64_t t) { return t >= n && s == SessionState::Idle; },
                                5s);
  }
};

}  // namespace

TEST_CASE("push-to-talk from Idle enters Listening") {
  Fixture f(false);
  const auto body = f.post("/session/ptt", 200);
  CHECK(body["state"] == "Listening");
  CHECK(f.wait_turns(1));
}

TEST_CASE("push-to-talk while Speaking is rejected with SessionBusy") {
  Fixture f(true);
  f.post("/session/ptt", 200);
  REQUIRE(f.gate->wait_playing(5s));
  CHECK(f.controller->state() == SessionState::Speaking);
  const auto body = f.post("/session/ptt", 409);
  CHECK(body["code"] == "SessionBusy");
  CHECK(body["state"] == "Speaking");
  CHECK(body.contains("message"));
  CHECK(f.controller->state() == SessionState::Speaking);
  f.gate->release();
  CHECK(f.wait_turns(1));
}

TEST_CASE("transcript after two exchanges has five records") {
  const auto dir = std::filesystem::temp_directory_path() / "embodied_console_test_logs";
  std::filesystem::remove_all(dir);
  Fixture f(false, dir);
  f.post("/session/ptt", 200);
  REQUIRE(f.wait_turns(1));
  f.post("/session/ptt", 200);
  REQUIRE(f.wait_turns(2));

  const auto body = f.get("/session/transcript");
  REQUIRE(body["records"].size() == 5);
  CHECK(body["session_id"] == *f.controller->session_id());
  CHECK(body["records"][0]["role"] == "system");
  CHECK(body["records"][1]["text"] == "hello");
  CHECK(body["records"][2]["text"] == "Hi there!");
  CHECK(body["records"][2]["sentiment"] == "a");
  CHECK(body["records"][4]["sentiment"] == "e");

  const auto frames = f.device->frames();
  REQUIRE(frames.size() == 2);
  CHECK(frames[0][3] == 'a');
  CHECK(frames[1][3] == 'e');

  const auto path = f.controller->log_path();
  REQUIRE(path.has_value());
  CHECK(replay(*path) == *f.controller->history());
  std::filesystem::remove_all(dir);
}

TEST_CASE("session start and stop") {
  Fixture f(false);
  CHECK(f.post("/session/stop", 409)["code"] == "NoSession");
  const auto started = f.post("/session/start", 200);
  CHECK(started["session_id"].get<std::string>().size() == 32);
  CHECK(f.post("/session/start", 409)["code"] == "SessionActive");
  f.post("/session/stop", 200);
  CHECK_FALSE(f.controller->session_id().has_value());
  f.post("/session/start", 200);
}

TEST_CASE("healthz reports adapters and state") {
  Fixture f(false);
  const auto body = f.get("/healthz");
  CHECK(body["status"] == "ok");
  CHECK(body["state"] == "Idle");
  CHECK(body["adapters"]["llm"] == "stub");
}

TEST_CASE("events follow the state machine order") {
  Fixture f(false);
  auto sub = f.controller->events().subscribe();
  f.post("/session/ptt", 200);
  REQUIRE(f.wait_turns(1));
  std::vector<json> events;
  while (auto e = sub->pop(200ms)) events.push_back(*e);

  std::vector<std::string> transitions;
  std::uint64_t last_seq = 0;
  bool turn_before_speaking = false;
  for (const auto& e : events) {
    CHECK(e["seq"].get<std::uint64_t>() > last_seq);
    last_seq = e["seq"].get<std::uint64_t>();
    if (e["type"] == "state") transitions.push_back(e["to"].get<std::string>());
    if (e["type"] == "turn") turn_before_speaking = transitions.back() == "Thinking";
  }
  CHECK(events.front()["type"] == "session");
  CHECK(transitions == std::vector<std::string>{"Listening", "Thinking", "Speaking", "Idle"});
  CHECK(turn_before_speaking);
}

TEST_CASE("the events stream is served as SSE") {
  Fixture f(false);
  std::atomic<bool> done{false};
  std::string received;
  std::thread reader([&] {
    httplib::Client c = httplib::Client(f.client->host(), f.client->port());
    c.set_read_timeout(5, 0);
    c.Get("/events", [&](const char* data, std::size_t n) {
      received.append(data, n);
      return received.find("\"to\":\"Idle\"") == std::string::npos;
    });
    done = true;
  });
  const auto deadline = std::chrono::steady_clock::now() + 5s;
  while (f.controller->events().subscriber_count() == 0 && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(10ms);
  }
  f.post("/session/ptt", 200);
  reader.join();
  CHECK(done);
  CHECK(received.find("event: event\ndata: ") != std::string::npos);
  CHECK(received.find("\"type\":\"turn\"") != std::string::npos);
}

TEST_CASE("telemetry stream carries device frames") {
  std::int64_t now = 0;
  std::mutex m;
  auto handle = std::make_shared<link::DeviceHandle>(link::DeviceOptions{}, [&] {
    std::lock_guard lock(m);
    return now += 50;
  });
  SessionController controller(stub_runtime(std::make_unique<audio::NullSink>(), handle));
  ConsoleService service(controller, handle, {"stub", "stub", "stub", "virtual"});
  auto sub = service.telemetry().subscribe();
  service.start("127.0.0.1", 0);
  const auto frame = sub->pop(2s);
  service.stop();
  REQUIRE(frame.has_value());
  CHECK((*frame)["angles"].size() == 7);
  CHECK((*frame)["angles"]["neck"] == 90.0);
  CHECK((*frame)["active_gesture"].is_null());
}

TEST_CASE("build_application assembles stubs") {
  auto config = parse_config(R"({"audio": {"playback_time_scale": 0}})");
  auto app = build_application(config);
  CHECK(app.virtual_device != nullptr);
  CHECK(app.info.llm.rfind("stub", 0) == 0);
  CHECK(app.controller->state() == SessionState::Idle);
}
