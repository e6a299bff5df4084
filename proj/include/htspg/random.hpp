#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace htspg {

// Counter-based random stream. Output i is a keyed hash of the counter i, so
// a stream is fully described by (key, counter) and child streams can be
// derived from a key without consuming anything from the parent.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    return mix(key_ ^ mix(counter_++ * kGolden + kOffset));
  }

  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Derives an independent stream named by `tag` and up to three indices.
  // Does not advance this stream.
  RandomStream substream(std::string_view tag, std::uint64_t i = 0,
                         std::uint64_t j = 0, std::uint64_t k = 0) const {
    std::uint64_t h = mix(key_ + kGolden);
    h = mix(h ^ hash_tag(tag));
    h = mix(h ^ mix(i + 0x1000193ULL));
    h = mix(h ^ mix(j + 0x100000001b3ULL));
    h = mix(h ^ mix(k + 0x9e3779b1ULL));
    return RandomStream(h);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  // SplitMix64 finalizer.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kOffset = 0x632be59bd9b4e019ULL;

  // FNV-1a
  static constexpr std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace htspg
