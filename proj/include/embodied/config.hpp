#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "embodied/audio.hpp"
#include "embodied/clients.hpp"
#include "embodied/dialog.hpp"
#include "embodied/gesture.hpp"

namespace embodied {

enum class AdapterKind { Stub, Live };
enum class AudioSourceKind { Synthetic, Wav, Command };
enum class DeviceTransport { Virtual, Serial };

std::string_view to_string(AdapterKind k) noexcept;
std::string_view to_string(DeviceTransport t) noexcept;

/// Runtime configuration for `embodied serve`. Loaded from a JSON file,
/// then overridden by EMBODIED_* environment variables, then validated.
///
///   {
///     "listen":     {"host": "127.0.0.1", "port": 8080},
///     "adapters":   {"stt": "stub", "llm": "stub", "tts": "stub"},
///     "stub":       {"transcripts": "path", "replies": "path"},
///     "live":       {"llm_model": "gpt-4o", "stt_model": "whisper-1", "tts_executable": "espeak"},
///     "voice":      {"voice": "en+m3", "words_per_minute": 150, "pitch": 35},
///     "audio":      {"source": "synthetic|wav|command", "wav": "path",
///                    "capture_command": "...", "playback_command": "...",
///                    "playback_time_scale": 1.0,
///                    "silence_hangover_s": 1.0, "energy_threshold": 0.02,
///                    "min_utterance_s": 0.2, "max_capture_s": 60},
///     "gestures":   {"table": "path", "max_deg": 5, "max_time_frac": 0.1, "seed": 0},
///     "device":     {"transport": "virtual|serial", "serial_port": "/dev/ttyACM0", "baud": 115200},
///     "session":    {"brevity_limit": 30, "max_exchanges": 100},
///     "log_dir":    "logs"
///   }
///
/// Every key is optional. Environment overrides: EMBODIED_HOST,
/// EMBODIED_PORT, EMBODIED_LOG_DIR, EMBODIED_STT, EMBODIED_LLM, EMBODIED_TTS
/// (stub|live), EMBODIED_DEVICE (virtual|serial), EMBODIED_SERIAL_PORT.
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;

  AdapterKind stt = AdapterKind::Stub;
  AdapterKind llm = AdapterKind::Stub;
  AdapterKind tts = AdapterKind::Stub;
  std::filesystem::path stub_transcripts;  // empty: built-in script
  std::filesystem::path stub_replies;
  std::string llm_model = "gpt-4o";
  std::string stt_model = "whisper-1";
  std::string tts_executable = "espeak";
  VoiceProfile voice{};

  AudioSourceKind audio_source = AudioSourceKind::Synthetic;
  std::filesystem::path audio_wav;
  std::string capture_command = "arecord -q -t raw -f S16_LE -r 16000 -c 1";
  std::string playback_command;  // empty: discard audio
  double playback_time_scale = 1.0;
  audio::EndpointerConfig endpointer{};

  std::filesystem::path gesture_table;  // empty: built-in table
  gesture::JitterConfig jitter{};

  DeviceTransport device = DeviceTransport::Virtual;
  std::string serial_port = "/dev/ttyACM0";
  int baud = 115200;

  int brevity_limit = kDefaultBrevityLimit;
  std::size_t max_exchanges = kDefaultMaxExchanges;

  std::filesystem::path log_dir = "logs";
};

/// Throws Error{"InvalidConfig"}.
ServiceConfig parse_config(std::string_view json_text);
ServiceConfig load_config(const std::filesystem::path& path);
void apply_env_overrides(ServiceConfig& config);
/// Checks ranges and, for live adapters, that credentials are present.
void validate(const ServiceConfig& config);

/// Forces every client adapter to the deterministic stubs.
void force_stubs(ServiceConfig& config);

}  // namespace embodied
