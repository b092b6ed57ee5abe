#include "flakilab/bit_matrix.hpp"

namespace flakilab {

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), stride_((cols + 63) / 64),
      words_(rows * stride_, 0) {}

std::size_t BitMatrix::row_count(std::size_t row) const noexcept {
  std::size_t n = 0;
  for (std::uint64_t w : row_words(row)) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t BitMatrix::count() const noexcept {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitMatrix::is_subset_of(const BitMatrix& other) const noexcept {
  if (rows_ != other.rows_ || cols_ != other.cols_) return false;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((words_[i] & ~other.words_[i]) != 0) return false;
  }
  return true;
}

}  // namespace flakilab
