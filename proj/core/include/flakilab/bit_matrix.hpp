#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace flakilab {

/// Dense row-major boolean matrix, one 64-bit word per 64 columns.
/// Padding bits past `cols()` in the last word of a row are always zero,
/// so defaulted equality compares contents.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  bool get(std::size_t row, std::size_t col) const noexcept {
    return (words_[row * stride_ + col / 64] >> (col % 64)) & 1U;
  }

  void set(std::size_t row, std::size_t col, bool value = true) noexcept {
    std::uint64_t& word = words_[row * stride_ + col / 64];
    const std::uint64_t mask = std::uint64_t{1} << (col % 64);
    word = value ? (word | mask) : (word & ~mask);
  }

  std::span<const std::uint64_t> row_words(std::size_t row) const noexcept {
    return {words_.data() + row * stride_, stride_};
  }

  std::size_t row_count(std::size_t row) const noexcept;
  std::size_t count() const noexcept;

  /// Calls `fn(col)` for every set column of `row`, in increasing order.
  template <typename Fn>
  void for_each_in_row(std::size_t row, Fn&& fn) const {
    const std::uint64_t* words = words_.data() + row * stride_;
    for (std::size_t w = 0; w < stride_; ++w) {
      std::uint64_t bits = words[w];
      while (bits != 0) {
        const int bit = std::countr_zero(bits);
        fn(w * 64 + static_cast<std::size_t>(bit));
        bits &= bits - 1;
      }
    }
  }

  /// True iff every set bit of `*this` is also set in `other`.
  bool is_subset_of(const BitMatrix& other) const noexcept;

  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace flakilab
