#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "arqwep/wep.hpp"

namespace arqwep {

// Sender-side record of ACK/no-ACK outcomes since the last flush, embedded in
// every frame so the receiver can reconcile its accepted set with the sender's.
//
// Wire encoding (prefix of a frame payload or plaintext):
//   [4 bytes base_seq LE][1 byte bit count][ceil(count / 8) bitmap bytes, LSB first]
//
// Bit i is the outcome of sequence number base_seq + i (1 = ACK received by the
// sender). The carrying frame's own sequence number is base_seq + count: the
// window always ends immediately before the frame that carries it. The sender
// flushes (advances base_seq) only on an ACK it actually received, which
// guarantees the receiver has already seen every bit that gets flushed away.
struct AckHistory {
  static constexpr size_t kMaxWindow = 255;

  uint32_t base_seq = 0;
  std::vector<uint8_t> bits;  // one entry per sequence number, values 0/1

  uint32_t next_seq() const { return base_seq + static_cast<uint32_t>(bits.size()); }
  size_t encoded_size() const { return 5 + (bits.size() + 7) / 8; }

  // Throws ProtocolError when the window exceeds kMaxWindow outstanding frames.
  Bytes encode() const;

  // Parses a history prefix; nullopt when the bytes cannot be a valid encoding.
  // On success *consumed holds the number of bytes read.
  static std::optional<AckHistory> decode_prefix(std::span<const uint8_t> data,
                                                 size_t* consumed);
};

}  // namespace arqwep
