#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "embodied/error.hpp"

namespace embodied::audio {

inline constexpr int kSampleRate = 16000;
inline constexpr int kFrameMs = 20;
inline constexpr std::size_t kFrameSamples = kSampleRate * kFrameMs / 1000;  // 320
inline constexpr double kFullScale = 32768.0;

/// Mono PCM16 audio of arbitrary length.
struct AudioSegment {
  std::vector<std::int16_t> samples;
  int sample_rate = kSampleRate;

  double duration_s() const noexcept {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  friend bool operator==(const AudioSegment&, const AudioSegment&) = default;
};

/// One 20 ms frame at 16 kHz.
struct AudioFrame {
  std::vector<std::int16_t> samples;
  int sample_rate = kSampleRate;
};

struct EndpointerConfig {
  double silence_hangover_s = 1.0;
  double energy_threshold = 0.02;  // RMS as a fraction of full scale
  double min_utterance_s = 0.2;
  double max_capture_s = 60.0;

  /// Throws Error{"InvalidConfig"} when out of range.
  void validate() const;
  std::size_t hangover_frames() const;
  std::size_t min_utterance_frames() const;
  std::size_t max_capture_frames() const;
};

enum class FrameClass { Silence, Speech };

/// Frame RMS divided by full scale, in [0, 1].
double frame_level(std::span<const std::int16_t> samples);

/// Speech iff level >= energy_threshold. Throws Error{"MalformedFrame"} for
/// frames that are not 320 samples at 16 kHz.
FrameClass classify_frame(const AudioFrame& frame, const EndpointerConfig& config);

/// Half-open frame range [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// Incremental end-of-utterance detector over frame classifications.
///
/// An utterance opens on the first Speech frame and closes once a run of
/// consecutive Silence frames reaches the hangover length; the trailing
/// silence is not part of the span. Utterances shorter than min_utterance
/// are dropped.
class Endpointer {
 public:
  explicit Endpointer(const EndpointerConfig& config);

  /// Feeds the next frame; returns a span when an utterance closes on it.
  std::optional<Span> push(FrameClass c);

  /// Closes an open utterance at end of input.
  std::optional<Span> finish();

  bool in_utterance() const noexcept { return open_; }
  std::size_t frames_seen() const noexcept { return index_; }

 private:
  std::optional<Span> close(std::size_t end);

  std::size_t hangover_;
  std::size_t min_frames_;
  std::size_t index_ = 0;
  bool open_ = false;
  std::size_t start_ = 0;
  std::size_t silence_run_ = 0;
};

std::vector<Span> endpoint(std::span<const AudioFrame> frames, const EndpointerConfig& config);

/// Splits a segment into whole 20 ms frames; a partial tail is zero-padded.
std::vector<AudioFrame> to_frames(const AudioSegment& segment);

/// Delivers frames to a single consumer. nullopt means the source closed.
class AudioSource {
 public:
  virtual ~AudioSource() = default;
  virtual std::optional<AudioFrame> next_frame() = 0;
};

/// Reads frames from an in-memory segment.
class SegmentSource : public AudioSource {
 public:
  explicit SegmentSource(AudioSegment segment);
  std::optional<AudioFrame> next_frame() override;

 private:
  std::vector<AudioFrame> frames_;
  std::size_t next_ = 0;
};

/// Reads a 16 kHz mono PCM16 WAV file.
class WavFileSource : public SegmentSource {
 public:
  explicit WavFileSource(const std::filesystem::path& path);
};

/// Reads raw little-endian PCM16 from a child process (e.g. `arecord -t raw`).
class CommandSource : public AudioSource {
 public:
  explicit CommandSource(std::string command);
  ~CommandSource() override;
  CommandSource(const CommandSource&) = delete;
  CommandSource& operator=(const CommandSource&) = delete;

  std::optional<AudioFrame> next_frame() override;

 private:
  std::string command_;
  FILE* pipe_ = nullptr;
};

/// Records the first utterance from `source` and returns the audio of its
/// span. Throws Error{"SourceClosed"} if the source ends before an utterance
/// closes and Error{"CaptureTimeout"} after max_capture_s of audio.
AudioSegment capture_until_silence(AudioSource& source, const EndpointerConfig& config);

/// Plays a segment; blocks until done.
class AudioSink {
 public:
  virtual ~AudioSink() = default;
  virtual void play(const AudioSegment& segment) = 0;
};

/// Discards audio, optionally sleeping for `time_scale` x its duration.
class NullSink : public AudioSink {
 public:
  explicit NullSink(double time_scale = 0.0) : time_scale_(time_scale) {}
  void play(const AudioSegment& segment) override;

 private:
  double time_scale_;
};

/// Pipes raw PCM16 to a child process (e.g. `aplay -t raw -f S16_LE -r 16000`).
class CommandSink : public AudioSink {
 public:
  explicit CommandSink(std::string command) : command_(std::move(command)) {}
  void play(const AudioSegment& segment) override;

 private:
  std::string command_;
};

// ---- WAV ------------------------------------------------------------------

/// Throws Error{"BadWav"} for anything but PCM16 mono.
AudioSegment read_wav(const std::filesystem::path& path);
AudioSegment decode_wav(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_wav(const AudioSegment& segment);
void write_wav(const std::filesystem::path& path, const AudioSegment& segment);

// ---- synthetic fixtures ---------------------------------------------------

/// A sine tone at `amplitude` (fraction of full scale).
AudioSegment tone(double seconds, double amplitude = 0.3, double freq_hz = 220.0,
                  int sample_rate = kSampleRate);
AudioSegment silence(double seconds, int sample_rate = kSampleRate);
void append(AudioSegment& dst, const AudioSegment& src);

}  // namespace embodied::audio
