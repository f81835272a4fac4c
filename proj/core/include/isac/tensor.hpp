// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace isac {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Four mode vectors whose outer product a1 o a2 o a3 o a4 is one path of the
/// received tensor (array, symbol-in-group, subcarrier, group).
struct Rank1Factors {
  std::array<CVec, 4> mode;

  double norm_sq() const;
};

/// Complex 4-way array of shape [M_B, Q1, N0, Q2], row-major with the last
/// index fastest.
class ReceivedTensor {
 public:
  using Shape = std::array<std::size_t, 4>;

  ReceivedTensor() = default;
  explicit ReceivedTensor(Shape shape);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<cd> data() noexcept { return data_; }
  std::span<const cd> data() const noexcept { return data_; }

  std::size_t index(std::size_t m, std::size_t q1, std::size_t n, std::size_t q2) const noexcept {
    return ((m * shape_[1] + q1) * shape_[2] + n) * shape_[3] + q2;
  }
  cd& operator()(std::size_t m, std::size_t q1, std::size_t n, std::size_t q2) noexcept {
    return data_[index(m, q1, n, q2)];
  }
  cd operator()(std::size_t m, std::size_t q1, std::size_t n, std::size_t q2) const noexcept {
    return data_[index(m, q1, n, q2)];
  }

  double frobenius_sq() const;
  bool all_finite() const;

  /// this += weight * (f.mode[0] o f.mode[1] o f.mode[2] o f.mode[3]).
  void add_rank1(cd weight, const Rank1Factors& f);
  /// <f, this> = sum conj(f) * this.
  cd inner(const Rank1Factors& f) const;
  /// Contract every mode except `keep` against conj(f); result has length shape[keep].
  CVec project_mode(int keep, const Rank1Factors& f) const;
  /// Contract modes 0 and 2 against conj(f); result is Q1 x Q2.
  CMat project_time_modes(const Rank1Factors& f) const;

  ReceivedTensor& operator+=(const ReceivedTensor& other);
  ReceivedTensor& operator-=(const ReceivedTensor& other);

  bool operator==(const ReceivedTensor& other) const = default;

 private:
  void check_factors(const Rank1Factors& f) const;

  Shape shape_{0, 0, 0, 0};
  std::vector<cd> data_;
};

/// Binary dump: four little-endian uint32 dimensions followed by the entries
/// in row-major order as interleaved little-endian float64 (re, im).
void write_tensor(const std::filesystem::path& path, const ReceivedTensor& tensor);
ReceivedTensor read_tensor(const std::filesystem::path& path);

/// FNV-1a over the raw bytes; used to log that paired algorithms consumed
/// identical data.
std::uint64_t tensor_checksum(const ReceivedTensor& tensor);

}  // namespace isac
