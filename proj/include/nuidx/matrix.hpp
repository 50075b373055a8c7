#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "nuidx/error.hpp"

namespace nuidx {

/// Dense row-major 0/1 matrix.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::uint8_t operator()(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }
  std::uint8_t& operator()(std::size_t i, std::size_t k) { return data_[i * cols_ + k]; }

  std::span<const std::uint8_t> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<std::uint8_t> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  /// Rows in the given order.
  BinaryMatrix select_rows(std::span<const std::size_t> idx) const {
    BinaryMatrix out(idx.size(), cols_);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      auto src = row(idx[r]);
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
  }

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

/// For each column, the ascending row indices holding a 1.
inline std::vector<std::vector<std::uint32_t>> column_support(const BinaryMatrix& x) {
  std::vector<std::vector<std::uint32_t>> cols(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r[k]) cols[k].push_back(static_cast<std::uint32_t>(i));
  }
  return cols;
}

template <class T>
std::vector<T> select(std::span<const T> v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace nuidx
