#include <cstring>
#include <fstream>
#include <iterator>

#include "embodied/audio.hpp"

namespace embodied::audio {

namespace {

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | static_cast<std::uint32_t>(b[off + 1]) << 8 |
         static_cast<std::uint32_t>(b[off + 2]) << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | b[off + 1] << 8);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace

AudioSegment decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    throw Error("BadWav", "not a RIFF/WAVE file");
  }
  std::size_t off = 12;
  bool have_fmt = false;
  AudioSegment seg;
  while (off + 8 <= b.size()) {
    const std::uint32_t size = read_u32(b, off + 4);
    const std::size_t body = off + 8;
    if (body + size > b.size()) throw Error("BadWav", "chunk runs past end of file");
    if (std::memcmp(b.data() + off, "fmt ", 4) == 0) {
      if (size < 16) throw Error("BadWav", "short fmt chunk");
      const std::uint16_t format = read_u16(b, body);
      const std::uint16_t channels = read_u16(b, body + 2);
      const std::uint16_t bits = read_u16(b, body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw Error("BadWav", "only PCM16 mono is supported");
      }
      seg.sample_rate = static_cast<int>(read_u32(b, body + 4));
      have_fmt = true;
    } else if (std::memcmp(b.data() + off, "data", 4) == 0) {
      if (!have_fmt) throw Error("BadWav", "data chunk before fmt chunk");
      seg.samples.resize(size / 2);
      for (std::size_t i = 0; i < seg.samples.size(); ++i) {
        seg.samples[i] = static_cast<std::int16_t>(read_u16(b, body + 2 * i));
      }
      return seg;
    }
    off = body + size + (size & 1U);
  }
  throw Error("BadWav", "no data chunk");
}

AudioSegment read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("BadWav", "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const AudioSegment& segment) {
  const auto data_bytes = static_cast<std::uint32_t>(segment.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(segment.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(segment.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (std::int16_t s : segment.samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioSegment& segment) {
  const auto bytes = encode_wav(segment);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("BadWav", "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace embodied::audio
