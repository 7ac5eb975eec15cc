#include "embodied/audio.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <thread>

namespace embodied::audio {

namespace {

std::size_t frames_for(double seconds) {
  return static_cast<std::size_t>(std::llround(seconds * 1000.0 / kFrameMs));
}

}  // namespace

void EndpointerConfig::validate() const {
  if (!(silence_hangover_s > 0.0)) throw Error("InvalidConfig", "silence hangover must be > 0");
  if (!(energy_threshold > 0.0 && energy_threshold < 1.0)) {
    throw Error("InvalidConfig", "energy threshold must be in (0, 1)");
  }
  if (!(min_utterance_s >= 0.0)) throw Error("InvalidConfig", "min utterance must be >= 0");
  if (!(max_capture_s > 0.0)) throw Error("InvalidConfig", "capture cap must be > 0");
}

std::size_t EndpointerConfig::hangover_frames() const {
  return std::max<std::size_t>(1, frames_for(silence_hangover_s));
}
std::size_t EndpointerConfig::min_utterance_frames() const { return frames_for(min_utterance_s); }
std::size_t EndpointerConfig::max_capture_frames() const {
  return std::max<std::size_t>(1, frames_for(max_capture_s));
}

double frame_level(std::span<const std::int16_t> samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (std::int16_t s : samples) sum += static_cast<double>(s) * s;
  return std::sqrt(sum / static_cast<double>(samples.size())) / kFullScale;
}

FrameClass classify_frame(const AudioFrame& frame, const EndpointerConfig& config) {
  if (frame.sample_rate != kSampleRate || frame.samples.size() != kFrameSamples) {
    throw Error("MalformedFrame", "expected " + std::to_string(kFrameSamples) + " samples at " +
                                      std::to_string(kSampleRate) + " Hz, got " +
                                      std::to_string(frame.samples.size()) + " at " +
                                      std::to_string(frame.sample_rate) + " Hz");
  }
  return frame_level(frame.samples) >= config.energy_threshold ? FrameClass::Speech
                                                               : FrameClass::Silence;
}

Endpointer::Endpointer(const EndpointerConfig& config)
    : hangover_(config.hangover_frames()), min_frames_(config.min_utterance_frames()) {}

std::optional<Span> Endpointer::close(std::size_t end) {
  open_ = false;
  silence_run_ = 0;
  Span span{start_, end};
  if (span.length() < min_frames_ || span.length() == 0) return std::nullopt;
  return span;
}

std::optional<Span> Endpointer::push(FrameClass c) {
  const std::size_t i = index_++;
  if (!open_) {
    if (c == FrameClass::Speech) {
      open_ = true;
      start_ = i;
      silence_run_ = 0;
    }
    return std::nullopt;
  }
  if (c == FrameClass::Speech) {
    silence_run_ = 0;
    return std::nullopt;
  }
  if (++silence_run_ >= hangover_) return close(i + 1 - silence_run_);
  return std::nullopt;
}

std::optional<Span> Endpointer::finish() {
  if (!open_) return std::nullopt;
  return close(index_ - silence_run_);
}

std::vector<Span> endpoint(std::span<const AudioFrame> frames, const EndpointerConfig& config) {
  Endpointer ep(config);
  std::vector<Span> spans;
  for (const auto& f : frames) {
    if (auto s = ep.push(classify_frame(f, config))) spans.push_back(*s);
  }
  if (auto s = ep.finish()) spans.push_back(*s);
  return spans;
}

std::vector<AudioFrame> to_frames(const AudioSegment& segment) {
  std::vector<AudioFrame> frames;
  const auto& s = segment.samples;
  frames.reserve((s.size() + kFrameSamples - 1) / kFrameSamples);
  for (std::size_t off = 0; off < s.size(); off += kFrameSamples) {
    AudioFrame f;
    f.sample_rate = segment.sample_rate;
    const std::size_t n = std::min(kFrameSamples, s.size() - off);
    f.samples.assign(s.begin() + static_cast<std::ptrdiff_t>(off),
                     s.begin() + static_cast<std::ptrdiff_t>(off + n));
    f.samples.resize(kFrameSamples, 0);
    frames.push_back(std::move(f));
  }
  return frames;
}

SegmentSource::SegmentSource(AudioSegment segment) : frames_(to_frames(segment)) {}

std::optional<AudioFrame> SegmentSource::next_frame() {
  if (next_ >= frames_.size()) return std::nullopt;
  return frames_[next_++];
}

WavFileSource::WavFileSource(const std::filesystem::path& path) : SegmentSource(read_wav(path)) {}

CommandSource::CommandSource(std::string command) : command_(std::move(command)) {}

CommandSource::~CommandSource() {
  if (pipe_ != nullptr) pclose(pipe_);
}

std::optional<AudioFrame> CommandSource::next_frame() {
  if (pipe_ == nullptr) {
    pipe_ = popen(command_.c_str(), "r");
    if (pipe_ == nullptr) throw Error("SourceClosed", "cannot start capture command: " + command_);
  }
  AudioFrame f;
  f.samples.resize(kFrameSamples);
  std::size_t got = std::fread(f.samples.data(), sizeof(std::int16_t), kFrameSamples, pipe_);
  if (got < kFrameSamples) return std::nullopt;
  return f;
}

AudioSegment capture_until_silence(AudioSource& source, const EndpointerConfig& config) {
  config.validate();
  Endpointer ep(config);
  const std::size_t cap = config.max_capture_frames();
  std::vector<AudioFrame> frames;
  while (true) {
    auto frame = source.next_frame();
    if (!frame) {
      throw Error("SourceClosed", ep.in_utterance() ? "audio source closed mid-utterance"
                                                    : "audio source closed before any speech");
    }
    const FrameClass c = classify_frame(*frame, config);
    frames.push_back(std::move(*frame));
    if (auto span = ep.push(c)) {
      AudioSegment out;
      out.samples.reserve(span->length() * kFrameSamples);
      for (std::size_t i = span->start; i < span->end; ++i) {
        out.samples.insert(out.samples.end(), frames[i].samples.begin(), frames[i].samples.end());
      }
      return out;
    }
    if (ep.frames_seen() >= cap) {
      throw Error("CaptureTimeout", "no end of utterance within " +
                                        std::to_string(config.max_capture_s) + " s");
    }
  }
}

void NullSink::play(const AudioSegment& segment) {
  if (time_scale_ <= 0.0) return;
  std::this_thread::sleep_for(std::chrono::duration<double>(segment.duration_s() * time_scale_));
}

void CommandSink::play(const AudioSegment& segment) {
  FILE* pipe = popen(command_.c_str(), "w");
  if (pipe == nullptr) throw Error("PlaybackFailed", "cannot start playback command: " + command_);
  std::fwrite(segment.samples.data(), sizeof(std::int16_t), segment.samples.size(), pipe);
  if (pclose(pipe) != 0) throw Error("PlaybackFailed", "playback command failed: " + command_);
}

AudioSegment tone(double seconds, double amplitude, double freq_hz, int sample_rate) {
  AudioSegment seg;
  seg.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  seg.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / sample_rate);
    seg.samples[i] = static_cast<std::int16_t>(std::lround(v * 32767.0));
  }
  return seg;
}

AudioSegment silence(double seconds, int sample_rate) {
  AudioSegment seg;
  seg.sample_rate = sample_rate;
  seg.samples.assign(static_cast<std::size_t>(std::llround(seconds * sample_rate)), 0);
  return seg;
}

void append(AudioSegment& dst, const AudioSegment& src) {
  dst.samples.insert(dst.samples.end(), src.samples.begin(), src.samples.end());
}

}  // namespace embodied::audio
