#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace arqwep {

using Bytes = std::vector<uint8_t>;

// 24-bit initialization vector. Closed under XOR; value is always < 2^24.
struct Iv24 {
  uint32_t value = 0;

  constexpr Iv24() = default;
  constexpr explicit Iv24(uint32_t v) : value(v & 0xffffffu) {}

  friend constexpr Iv24 operator^(Iv24 a, Iv24 b) { return Iv24(a.value ^ b.value); }
  Iv24& operator^=(Iv24 o) {
    value ^= o.value;
    return *this;
  }
  friend constexpr bool operator==(Iv24, Iv24) = default;

  // Little-endian on the wire, matching the seed layout below.
  std::array<uint8_t, 3> to_bytes() const {
    return {static_cast<uint8_t>(value), static_cast<uint8_t>(value >> 8),
            static_cast<uint8_t>(value >> 16)};
  }
  static Iv24 from_bytes(const uint8_t* p) {
    return Iv24(static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
                static_cast<uint32_t>(p[2]) << 16);
  }
};

// 104-bit long-term key.
class SecretKey {
 public:
  SecretKey() : bytes_{} {}
  explicit SecretKey(const std::array<uint8_t, 13>& b) : bytes_(b) {}

  static SecretKey from_hex(const std::string& hex);  // throws on anything but 26 hex chars
  std::string to_hex() const;

  const std::array<uint8_t, 13>& bytes() const { return bytes_; }

 private:
  std::array<uint8_t, 13> bytes_;
};

// CRC-32 (reflected 0xEDB88320, init and final xor 0xFFFFFFFF) over the message.
// Serialized little-endian when appended as an integrity value.
uint32_t crc32_icv(std::span<const uint8_t> data);

// RC4 keystream for a seed of 1..256 bytes; throws std::invalid_argument otherwise.
// Prefix-stable: the first n bytes do not depend on the requested length.
Bytes rc4_keystream(std::span<const uint8_t> seed, size_t length);

namespace detail {
// Post-key-schedule RC4 state; exposed so tests can check the permutation property.
std::array<uint8_t, 256> rc4_key_schedule(std::span<const uint8_t> seed);
}  // namespace detail

// One encrypted frame: cleartext header IV plus ciphertext of (message || ICV).
// The header IV rides along unencrypted; the seed IV used for the keystream is
// a separate input so the overlay can decouple the two.
struct WepFrame {
  Iv24 header_iv;
  Bytes ciphertext;  // always >= 4 bytes (the ICV)
};

// Keystream seed is seed_iv (3 bytes LE) || key (13 bytes). The ciphertext is
// (message || crc32 LE) XOR keystream. header_iv does not enter the keystream.
WepFrame wep_encrypt(std::span<const uint8_t> message, Iv24 seed_iv, Iv24 header_iv,
                     const SecretKey& key);

// Returns the message if the ICV checks out, nullopt otherwise.
// Throws std::invalid_argument for a malformed frame (ciphertext < 4 bytes).
std::optional<Bytes> wep_decrypt(const WepFrame& frame, Iv24 seed_iv, const SecretKey& key);

// Trace wire layout: [3 bytes header IV LE][4 bytes ciphertext length LE][ciphertext].
Bytes encode_frame(const WepFrame& frame);
// Decodes one frame starting at data[0]; writes the encoded size to *consumed when
// non-null. Throws std::invalid_argument on truncation or a sub-4-byte ciphertext.
WepFrame decode_frame(std::span<const uint8_t> data, size_t* consumed = nullptr);

// Hex helpers shared by the CLI and tests.
std::string hex_encode(std::span<const uint8_t> data);
Bytes hex_decode(const std::string& hex);  // throws std::invalid_argument

}  // namespace arqwep
