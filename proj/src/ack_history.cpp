#include "arqwep/ack_history.hpp"

#include "arqwep/errors.hpp"

namespace arqwep {

Bytes AckHistory::encode() const {
  if (bits.size() > kMaxWindow)
    throw ProtocolError("ack history: more than 255 outstanding frames");
  Bytes out;
  out.reserve(encoded_size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(base_seq >> (8 * i)));
  out.push_back(static_cast<uint8_t>(bits.size()));
  uint8_t cur = 0;
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) cur |= static_cast<uint8_t>(1u << (i % 8));
    if (i % 8 == 7) {
      out.push_back(cur);
      cur = 0;
    }
  }
  if (bits.size() % 8 != 0) out.push_back(cur);
  return out;
}

std::optional<AckHistory> AckHistory::decode_prefix(std::span<const uint8_t> data,
                                                    size_t* consumed) {
  if (data.size() < 5) return std::nullopt;
  AckHistory h;
  h.base_seq = static_cast<uint32_t>(data[0]) | static_cast<uint32_t>(data[1]) << 8 |
               static_cast<uint32_t>(data[2]) << 16 | static_cast<uint32_t>(data[3]) << 24;
  size_t count = data[4];
  size_t bitmap_bytes = (count + 7) / 8;
  if (data.size() < 5 + bitmap_bytes) return std::nullopt;
  h.bits.resize(count);
  for (size_t i = 0; i < count; ++i)
    h.bits[i] = (data[5 + i / 8] >> (i % 8)) & 1u;
  // Unused high bits of the last bitmap byte must be zero; rejecting anything
  // else keeps the decoder usable as an accept filter after trial decryption.
  if (count % 8 != 0 && bitmap_bytes > 0) {
    uint8_t tail = data[5 + bitmap_bytes - 1];
    if (tail >> (count % 8) != 0) return std::nullopt;
  }
  if (consumed) *consumed = 5 + bitmap_bytes;
  return h;
}

}  // namespace arqwep
