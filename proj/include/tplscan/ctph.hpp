#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tplscan/opcodes.hpp"

namespace tplscan {

// Rolling hash over a 7-byte window. Piece boundaries of the fuzzy digest are
// triggered by its value, so an edit only perturbs the digest locally.
class RollingHash {
public:
  static constexpr std::size_t kWindow = 7;

  void push(std::uint8_t c) {
    h2_ -= h1_;
    h2_ += static_cast<std::uint32_t>(kWindow) * c;
    h1_ += c;
    h1_ -= window_[n_ % kWindow];
    window_[n_ % kWindow] = c;
    ++n_;
    h3_ <<= 5;
    h3_ ^= c;
  }

  std::uint32_t value() const { return h1_ + h2_ + h3_; }

  // Recomputes the state from scratch given the full input prefix. Only the
  // last kWindow bytes influence the value; used as the property-test oracle
  // for the incremental update.
  static std::uint32_t recompute(std::span<const std::uint8_t> prefix) {
    std::size_t start = prefix.size() > kWindow ? prefix.size() - kWindow : 0;
    // Only the window bytes matter; weight the tail by byte age.
    std::uint32_t h1 = 0, h2 = 0, h3 = 0;
    for (std::size_t i = start; i < prefix.size(); ++i) {
      std::uint32_t age = static_cast<std::uint32_t>(prefix.size() - i);  // 1 = newest
      h1 += prefix[i];
      h2 += (static_cast<std::uint32_t>(kWindow) - (age - 1)) * prefix[i];
      h3 = (h3 << 5) ^ prefix[i];
    }
    return h1 + h2 + h3;
  }

private:
  std::uint32_t h1_ = 0, h2_ = 0, h3_ = 0;
  std::uint8_t window_[kWindow] = {0};
  std::size_t n_ = 0;
};

// Context-triggered piecewise digest of a byte sequence.
struct CtphDigest {
  std::uint32_t block_size = 0;      // power-of-two multiple of 3; 0 for empty input
  std::string digest;                // <= 64 symbols at block_size
  std::string double_digest;         // <= 32 symbols at block_size * 2

  bool operator==(const CtphDigest&) const = default;

  bool empty() const { return block_size == 0; }

  // Text form "<block_size>:<digest>:<double_digest>"; empty input prints the
  // "0:" sentinel.
  std::string to_string() const {
    if (block_size == 0) return "0:";
    return std::to_string(block_size) + ":" + digest + ":" + double_digest;
  }
};

namespace detail {

inline constexpr std::uint32_t kFnvInit = 2166136261u;
inline constexpr std::uint32_t kFnvPrime = 16777619u;

inline std::uint32_t fnv1a(std::uint32_t h, std::uint8_t c) { return (h ^ c) * kFnvPrime; }

inline std::string piecewise_digest(std::span<const std::uint8_t> data, std::uint32_t block_size,
                                    std::size_t max_len) {
  RollingHash roll;
  std::uint32_t h = kFnvInit;
  std::string out;
  bool pending = false;
  for (std::uint8_t c : data) {
    roll.push(c);
    h = fnv1a(h, c);
    pending = true;
    if (roll.value() % block_size == block_size - 1) {
      if (out.size() < max_len) out.push_back(kDigestAlphabet[h & 63]);
      h = kFnvInit;
      pending = false;
    }
  }
  if (pending && out.size() < max_len) out.push_back(kDigestAlphabet[h & 63]);
  return out;
}

}  // namespace detail

// b = 3 * 2^ceil(log2(len / (3*64))), clamped to >= 3.
inline std::uint32_t ctph_initial_block_size(std::size_t len) {
  if (len == 0) return 0;
  std::uint32_t b = 3;
  while (static_cast<std::uint64_t>(192) * (b / 3) < len) b *= 2;
  return b;
}

inline CtphDigest ctph(std::span<const std::uint8_t> data) {
  CtphDigest d;
  if (data.empty()) return d;
  d.block_size = ctph_initial_block_size(data.size());
  d.digest = detail::piecewise_digest(data, d.block_size, 64);
  d.double_digest = detail::piecewise_digest(data, d.block_size * 2, 32);
  return d;
}

// Levenshtein distance with unit costs.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t cur = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1] ? 1 : 0)});
      diag = row[j];
      row[j] = cur;
    }
  }
  return row[b.size()];
}

// Method similarity: 1 - d/max(m,n) over the best block-size-compatible digest
// pair. Incompatible block sizes score 0; two empty digests score 1.
inline double mss(const CtphDigest& a, const CtphDigest& b) {
  if (a.block_size == 0 && b.block_size == 0) return 1.0;
  double best = 0.0;
  auto score = [&](std::string_view x, std::string_view y) {
    std::size_t mx = std::max(x.size(), y.size());
    double s = mx == 0 ? 1.0 : 1.0 - static_cast<double>(edit_distance(x, y)) / static_cast<double>(mx);
    best = std::max(best, s);
  };
  if (a.block_size == b.block_size) score(a.digest, b.digest);
  if (a.block_size == 2 * b.block_size) score(a.digest, b.double_digest);
  if (b.block_size == 2 * a.block_size) score(a.double_digest, b.digest);
  return best;
}

}  // namespace tplscan
