#include "arqwep/wep.hpp"

#include <numeric>
#include <stdexcept>

namespace arqwep {

namespace {

constexpr std::array<uint32_t, 256> make_crc_table() {
  std::array<uint32_t, 256> t{};
  for (uint32_t n = 0; n < 256; ++n) {
    uint32_t c = n;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
    t[n] = c;
  }
  return t;
}

constexpr auto kCrcTable = make_crc_table();

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

uint32_t crc32_icv(std::span<const uint8_t> data) {
  uint32_t crc = 0xffffffffu;
  for (uint8_t b : data) crc = kCrcTable[(crc ^ b) & 0xffu] ^ (crc >> 8);
  return crc ^ 0xffffffffu;
}

namespace detail {

std::array<uint8_t, 256> rc4_key_schedule(std::span<const uint8_t> seed) {
  if (seed.empty() || seed.size() > 256)
    throw std::invalid_argument("rc4: seed must be 1..256 bytes");
  std::array<uint8_t, 256> s;
  std::iota(s.begin(), s.end(), 0);
  uint8_t j = 0;
  for (int i = 0; i < 256; ++i) {
    j = static_cast<uint8_t>(j + s[i] + seed[i % seed.size()]);
    std::swap(s[i], s[j]);
  }
  return s;
}

}  // namespace detail

Bytes rc4_keystream(std::span<const uint8_t> seed, size_t length) {
  auto s = detail::rc4_key_schedule(seed);
  Bytes out(length);
  uint8_t i = 0, j = 0;
  for (size_t n = 0; n < length; ++n) {
    i = static_cast<uint8_t>(i + 1);
    j = static_cast<uint8_t>(j + s[i]);
    std::swap(s[i], s[j]);
    out[n] = s[static_cast<uint8_t>(s[i] + s[j])];
  }
  return out;
}

SecretKey SecretKey::from_hex(const std::string& hex) {
  if (hex.size() != 26) throw std::invalid_argument("key: expected 26 hex characters");
  std::array<uint8_t, 13> b{};
  for (size_t i = 0; i < 13; ++i) {
    int hi = hex_nibble(hex[2 * i]);
    int lo = hex_nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("key: invalid hex character");
    b[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return SecretKey(b);
}

std::string SecretKey::to_hex() const { return hex_encode(bytes_); }

namespace {

Bytes keystream_for(Iv24 seed_iv, const SecretKey& key, size_t length) {
  std::array<uint8_t, 16> seed{};
  auto iv = seed_iv.to_bytes();
  std::copy(iv.begin(), iv.end(), seed.begin());
  std::copy(key.bytes().begin(), key.bytes().end(), seed.begin() + 3);
  return rc4_keystream(seed, length);
}

}  // namespace

WepFrame wep_encrypt(std::span<const uint8_t> message, Iv24 seed_iv, Iv24 header_iv,
                     const SecretKey& key) {
  Bytes plain(message.begin(), message.end());
  uint32_t icv = crc32_icv(message);
  plain.push_back(static_cast<uint8_t>(icv));
  plain.push_back(static_cast<uint8_t>(icv >> 8));
  plain.push_back(static_cast<uint8_t>(icv >> 16));
  plain.push_back(static_cast<uint8_t>(icv >> 24));

  Bytes ks = keystream_for(seed_iv, key, plain.size());
  for (size_t i = 0; i < plain.size(); ++i) plain[i] ^= ks[i];
  return WepFrame{header_iv, std::move(plain)};
}

std::optional<Bytes> wep_decrypt(const WepFrame& frame, Iv24 seed_iv, const SecretKey& key) {
  if (frame.ciphertext.size() < 4)
    throw std::invalid_argument("frame: ciphertext shorter than the integrity value");

  Bytes plain = frame.ciphertext;
  Bytes ks = keystream_for(seed_iv, key, plain.size());
  for (size_t i = 0; i < plain.size(); ++i) plain[i] ^= ks[i];

  size_t n = plain.size() - 4;
  uint32_t got = static_cast<uint32_t>(plain[n]) | static_cast<uint32_t>(plain[n + 1]) << 8 |
                 static_cast<uint32_t>(plain[n + 2]) << 16 |
                 static_cast<uint32_t>(plain[n + 3]) << 24;
  plain.resize(n);
  if (got != crc32_icv(plain)) return std::nullopt;
  return plain;
}

Bytes encode_frame(const WepFrame& frame) {
  Bytes out;
  out.reserve(7 + frame.ciphertext.size());
  auto iv = frame.header_iv.to_bytes();
  out.insert(out.end(), iv.begin(), iv.end());
  uint32_t len = static_cast<uint32_t>(frame.ciphertext.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(len >> (8 * i)));
  out.insert(out.end(), frame.ciphertext.begin(), frame.ciphertext.end());
  return out;
}

WepFrame decode_frame(std::span<const uint8_t> data, size_t* consumed) {
  if (data.size() < 7) throw std::invalid_argument("frame: truncated header");
  Iv24 iv = Iv24::from_bytes(data.data());
  uint32_t len = static_cast<uint32_t>(data[3]) | static_cast<uint32_t>(data[4]) << 8 |
                 static_cast<uint32_t>(data[5]) << 16 | static_cast<uint32_t>(data[6]) << 24;
  if (len < 4) throw std::invalid_argument("frame: ciphertext shorter than the integrity value");
  if (data.size() < 7 + static_cast<size_t>(len))
    throw std::invalid_argument("frame: truncated ciphertext");
  WepFrame f{iv, Bytes(data.begin() + 7, data.begin() + 7 + len)};
  if (consumed) *consumed = 7 + static_cast<size_t>(len);
  return f;
}

std::string hex_encode(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

Bytes hex_decode(const std::string& hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex: odd length");
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = hex_nibble(hex[2 * i]);
    int lo = hex_nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("hex: invalid character");
    out[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return out;
}

}  // namespace arqwep
