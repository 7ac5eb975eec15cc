#include <doctest.h>

#include <random>
#include <set>

#include "embodied/protocol.hpp"

using namespace embodied;
using namespace embodied::link;

namespace {

using Bytes = std::vector<std::uint8_t>;

DecodeFailure failure_of(const DecodeResult& r) {
  REQUIRE(std::holds_alternative<DecodeFailure>(r));
  return std::get<DecodeFailure>(r);
}

Bytes frame_bytes(Sentiment s) {
  const auto f = encode_command(s);
  return {f.begin(), f.end()};
}

}  // namespace

TEST_CASE("encode Happy") {
  const auto f = encode_command(Sentiment::Happy);
  CHECK(f == Frame{0x7E, 0x01, 0x01, 0x62, 0x01 ^ 0x01 ^ 0x62});
  CHECK(f[4] == 0x62);
}

TEST_CASE("Dance payload byte") { CHECK(encode_command(Sentiment::Dance)[3] == 0x65); }

TEST_CASE("round trip for every label") {
  for (auto s : kAllSentiments) {
    const auto f = encode_command(s);
    CHECK(decode_command(f) == s);
    CHECK(f[3] == static_cast<std::uint8_t>(to_wire_char(s)));
    CHECK(f[4] == checksum(f[1], f[2], f[3]));
  }
}

TEST_CASE("payload 'z' is UnknownSentiment") {
  Bytes f{0x7E, 0x01, 0x01, 0x7A, 0};
  f[4] = checksum(0x01, 0x01, 0x7A);
  CHECK(failure_of(try_decode(f)) == DecodeFailure{DecodeError::UnknownSentiment, 3});
  CHECK_THROWS_AS(decode_command(f), ProtocolError);
}

TEST_CASE("flipped checksum bit is BadChecksum") {
  for (auto s : kAllSentiments) {
    for (int bit = 0; bit < 8; ++bit) {
      auto f = frame_bytes(s);
      f[4] ^= static_cast<std::uint8_t>(1u << bit);
      CHECK(failure_of(try_decode(f)) == DecodeFailure{DecodeError::BadChecksum, 4});
    }
  }
}

TEST_CASE("prefixes are Truncated at their length") {
  const auto f = frame_bytes(Sentiment::Sad);
  for (std::size_t n = 0; n < kFrameSize; ++n) {
    const auto r = try_decode(std::span(f).first(n));
    const auto fail = failure_of(r);
    if (n == 0) {
      CHECK(fail == DecodeFailure{DecodeError::Truncated, 0});
    } else {
      CHECK(fail == DecodeFailure{DecodeError::Truncated, n});
    }
  }
  try {
    decode_command(std::span(f).first(3));
    FAIL("expected ProtocolError");
  } catch (const ProtocolError& e) {
    CHECK(e.code() == "Truncated");
    CHECK(e.failure().offset == 3);
  }
}

TEST_CASE("header errors are distinct") {
  auto f = frame_bytes(Sentiment::Greeting);
  f[0] = 0x7F;
  CHECK(failure_of(try_decode(f)) == DecodeFailure{DecodeError::BadSync, 0});
  f = frame_bytes(Sentiment::Greeting);
  f[1] = 0x02;
  CHECK(failure_of(try_decode(f)) == DecodeFailure{DecodeError::BadVersion, 1});
  f = frame_bytes(Sentiment::Greeting);
  f[2] = 0x02;
  CHECK(failure_of(try_decode(f)) == DecodeFailure{DecodeError::BadLength, 2});
  f = frame_bytes(Sentiment::Greeting);
  f.push_back(0);
  CHECK(failure_of(try_decode(f)) == DecodeFailure{DecodeError::BadLength, 5});
}

TEST_CASE("conformance vector file") {
  const auto vectors = load_vectors(std::string(EMBODIED_DATA_DIR) + "/conformance_vectors.txt");
  REQUIRE(vectors.size() >= 20);
  std::set<DecodeError> seen;
  for (const auto& v : vectors) {
    CAPTURE(v.line);
    CHECK(format_result(try_decode(v.bytes)) == format_result(v.expected));
    if (auto* f = std::get_if<DecodeFailure>(&v.expected)) seen.insert(f->error);
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("vector parsing") {
  const auto v = parse_vectors("# comment\n\n7e01016262 ok:b\n- Truncated@0\n7e0101 Truncated@3\n");
  REQUIRE(v.size() == 3);
  CHECK(std::get<Sentiment>(v[0].expected) == Sentiment::Happy);
  CHECK(v[1].bytes.empty());
  CHECK(std::get<DecodeFailure>(v[2].expected) == DecodeFailure{DecodeError::Truncated, 3});
  CHECK(v[2].line == 5);
  CHECK_THROWS_AS(parse_vectors("zz ok:b\n"), Error);
  CHECK_THROWS_AS(parse_vectors("7e ok:q\n"), Error);
  CHECK_THROWS_AS(parse_vectors("7e Bogus@1\n"), Error);
}

TEST_CASE("hex helpers") {
  const Bytes b{0x00, 0x7E, 0xFF};
  CHECK(to_hex(b) == "007eff");
  CHECK(from_hex("007EFF") == b);
  CHECK_FALSE(from_hex("0").has_value());
  CHECK_FALSE(from_hex("gg").has_value());
}

TEST_CASE("stream parser recovers from noise and corruption") {
  StreamParser p;
  Bytes stream{0x00, 0x13, 0x37};
  auto append = [&](const Bytes& b) { stream.insert(stream.end(), b.begin(), b.end()); };
  append(frame_bytes(Sentiment::Greeting));
  auto bad = frame_bytes(Sentiment::Sad);
  bad[4] ^= 0x01;
  append(bad);
  append(frame_bytes(Sentiment::Dance));

  std::vector<DecodeResult> results;
  for (auto byte : stream) {
    for (auto& r : p.push(byte)) results.push_back(r);
  }
  REQUIRE(results.size() == 3);
  CHECK(std::get<Sentiment>(results[0]) == Sentiment::Greeting);
  CHECK(failure_of(results[1]).error == DecodeError::BadChecksum);
  CHECK(std::get<Sentiment>(results[2]) == Sentiment::Dance);
  CHECK(p.skipped() >= 3);
  CHECK_FALSE(p.mid_frame());
}

TEST_CASE("stream parser resyncs on a sync byte inside a rejected frame") {
  StreamParser p;
  // A bad-version header whose tail starts a genuine frame.
  Bytes stream{0x7E, 0x09};
  const auto good = frame_bytes(Sentiment::Serious);
  stream.insert(stream.end(), good.begin(), good.end());
  const auto results = p.push(stream);
  bool found = false;
  for (const auto& r : results) {
    if (auto* s = std::get_if<Sentiment>(&r)) found = found || *s == Sentiment::Serious;
  }
  CHECK(found);
}

TEST_CASE("stream parser handles split delivery") {
  StreamParser p;
  const auto f = frame_bytes(Sentiment::Happy);
  CHECK(p.push(std::span(f).first(2)).empty());
  CHECK(p.mid_frame());
  const auto r = p.push(std::span(f).subspan(2));
  REQUIRE(r.size() == 1);
  CHECK(std::get<Sentiment>(r[0]) == Sentiment::Happy);
}

TEST_CASE("decode fuzz: every input is classified") {
  std::mt19937_64 rng(2024);
  StreamParser stream;
  for (int i = 0; i < 5000; ++i) {
    Bytes b(rng() % 9);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    if (!b.empty() && rng() % 2) b[0] = kSync;
    const auto r = try_decode(b);
    if (auto* s = std::get_if<Sentiment>(&r)) {
      CHECK(b.size() == kFrameSize);
      CHECK(Bytes(frame_bytes(*s)) == b);
    } else {
      CHECK(std::get<DecodeFailure>(r).offset <= b.size());
    }
    stream.push(b);
  }
}
