#pragma once

// FNV-1a 64-bit digests for deterministic result hashing. Doubles are
// canonicalized through %.17g so the digest is reproducible across runs.

#include <cstdint>
#include <cstdio>
#include <string>

namespace pwa {

class Fnv1a {
 public:
  void update(const char* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= static_cast<unsigned char>(data[i]);
      h_ *= 0x100000001B3ULL;
    }
  }
  void update(const std::string& s) { update(s.data(), s.size()); }
  void update(double v) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof(buf), "%.17g,", v);
    update(buf, static_cast<std::size_t>(n));
  }
  void update(std::int64_t v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof(buf), "%lld,",
                                static_cast<long long>(v));
    update(buf, static_cast<std::size_t>(n));
  }

  std::uint64_t digest() const { return h_; }

  std::string hex() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h_));
    return std::string(buf);
  }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

}  // namespace pwa
