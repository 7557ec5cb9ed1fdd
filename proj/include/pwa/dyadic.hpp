#pragma once

// Minimal non-negative big integer over 64-bit limbs, supporting exactly the
// operations the binary-expansion adversary needs: add/subtract a power of
// two and compare. Values represent dyadic rationals scaled by 2^(T+1), so
// comparisons between stream points are exact at any horizon.

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pwa {

class DyadicInt {
 public:
  DyadicInt() = default;

  static DyadicInt pow2(int bit) {
    DyadicInt v;
    v.add_pow2(bit);
    return v;
  }

  void add_pow2(int bit) {
    const std::size_t limb = static_cast<std::size_t>(bit) / 64;
    const int offset = bit % 64;
    if (limb >= limbs_.size()) limbs_.resize(limb + 1, 0);
    std::uint64_t carry = std::uint64_t(1) << offset;
    for (std::size_t i = limb; carry != 0; ++i) {
      if (i >= limbs_.size()) limbs_.push_back(0);
      const std::uint64_t old = limbs_[i];
      limbs_[i] = old + carry;
      carry = limbs_[i] < old ? 1 : 0;
    }
  }

  void sub_pow2(int bit) {
    const std::size_t limb = static_cast<std::size_t>(bit) / 64;
    const int offset = bit % 64;
    if (limb >= limbs_.size())
      throw std::underflow_error("DyadicInt: subtraction below zero");
    std::uint64_t borrow = std::uint64_t(1) << offset;
    for (std::size_t i = limb; borrow != 0; ++i) {
      if (i >= limbs_.size())
        throw std::underflow_error("DyadicInt: subtraction below zero");
      const std::uint64_t old = limbs_[i];
      limbs_[i] = old - borrow;
      borrow = old < borrow ? 1 : 0;
    }
  }

  // -1, 0, +1 comparison.
  int compare(const DyadicInt& other) const {
    const std::size_t n = std::max(limbs_.size(), other.limbs_.size());
    for (std::size_t i = n; i-- > 0;) {
      const std::uint64_t a = i < limbs_.size() ? limbs_[i] : 0;
      const std::uint64_t b = i < other.limbs_.size() ? other.limbs_[i] : 0;
      if (a < b) return -1;
      if (a > b) return 1;
    }
    return 0;
  }

  bool operator<(const DyadicInt& other) const { return compare(other) < 0; }
  bool operator==(const DyadicInt& other) const { return compare(other) == 0; }

  // Value divided by 2^scale_bits, rounded to double.
  double to_double(int scale_bits) const {
    double v = 0.0;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      v = v * 18446744073709551616.0 + static_cast<double>(limbs_[i]);
    }
    return std::ldexp(v, -scale_bits);
  }

 private:
  std::vector<std::uint64_t> limbs_;  // little-endian
};

}  // namespace pwa
