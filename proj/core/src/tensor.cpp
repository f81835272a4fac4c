// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#include "isac/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "isac/errors.hpp"

namespace isac {

static_assert(std::endian::native == std::endian::little,
              "tensor dump format assumes a little-endian host");

double Rank1Factors::norm_sq() const {
  double out = 1.0;
  for (const auto& v : mode) out *= v.squaredNorm();
  return out;
}

ReceivedTensor::ReceivedTensor(Shape shape)
    : shape_(shape), data_(shape[0] * shape[1] * shape[2] * shape[3], cd{0.0, 0.0}) {}

double ReceivedTensor::frobenius_sq() const {
  double acc = 0.0;
  for (const auto& x : data_) acc += std::norm(x);
  return acc;
}

bool ReceivedTensor::all_finite() const {
  for (const auto& x : data_) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  }
  return true;
}

void ReceivedTensor::check_factors(const Rank1Factors& f) const {
  for (int k = 0; k < 4; ++k) {
    if (static_cast<std::size_t>(f.mode[k].size()) != shape_[k]) {
      throw Error(ErrorCode::ConfigMismatch, "factor length does not match tensor mode " +
                                                 std::to_string(k));
    }
  }
}

void ReceivedTensor::add_rank1(cd weight, const Rank1Factors& f) {
  check_factors(f);
  const auto& [a, b, c, d] = f.mode;
  std::size_t idx = 0;
  for (std::size_t m = 0; m < shape_[0]; ++m) {
    const cd wa = weight * a[m];
    for (std::size_t q1 = 0; q1 < shape_[1]; ++q1) {
      const cd wab = wa * b[q1];
      for (std::size_t n = 0; n < shape_[2]; ++n) {
        const cd wabc = wab * c[n];
        for (std::size_t q2 = 0; q2 < shape_[3]; ++q2) data_[idx++] += wabc * d[q2];
      }
    }
  }
}

cd ReceivedTensor::inner(const Rank1Factors& f) const {
  check_factors(f);
  const auto& [a, b, c, d] = f.mode;
  cd acc{0.0, 0.0};
  std::size_t idx = 0;
  for (std::size_t m = 0; m < shape_[0]; ++m) {
    cd acc_m{0.0, 0.0};
    for (std::size_t q1 = 0; q1 < shape_[1]; ++q1) {
      cd acc_q1{0.0, 0.0};
      for (std::size_t n = 0; n < shape_[2]; ++n) {
        cd acc_n{0.0, 0.0};
        for (std::size_t q2 = 0; q2 < shape_[3]; ++q2) acc_n += std::conj(d[q2]) * data_[idx++];
        acc_q1 += std::conj(c[n]) * acc_n;
      }
      acc_m += std::conj(b[q1]) * acc_q1;
    }
    acc += std::conj(a[m]) * acc_m;
  }
  return acc;
}

CVec ReceivedTensor::project_mode(int keep, const Rank1Factors& f) const {
  check_factors(f);
  if (keep < 0 || keep > 3) throw Error(ErrorCode::ConfigMismatch, "mode index out of range");
  CVec out = CVec::Zero(static_cast<Eigen::Index>(shape_[keep]));
  std::array<const CVec*, 4> v{&f.mode[0], &f.mode[1], &f.mode[2], &f.mode[3]};
  std::size_t idx = 0;
  for (std::size_t m = 0; m < shape_[0]; ++m) {
    for (std::size_t q1 = 0; q1 < shape_[1]; ++q1) {
      for (std::size_t n = 0; n < shape_[2]; ++n) {
        for (std::size_t q2 = 0; q2 < shape_[3]; ++q2, ++idx) {
          const std::array<std::size_t, 4> ix{m, q1, n, q2};
          cd w{1.0, 0.0};
          for (int k = 0; k < 4; ++k) {
            if (k != keep) w *= std::conj((*v[k])[static_cast<Eigen::Index>(ix[k])]);
          }
          out[static_cast<Eigen::Index>(ix[keep])] += w * data_[idx];
        }
      }
    }
  }
  return out;
}

CMat ReceivedTensor::project_time_modes(const Rank1Factors& f) const {
  check_factors(f);
  CMat out = CMat::Zero(static_cast<Eigen::Index>(shape_[1]), static_cast<Eigen::Index>(shape_[3]));
  const auto& a = f.mode[0];
  const auto& c = f.mode[2];
  std::size_t idx = 0;
  for (std::size_t m = 0; m < shape_[0]; ++m) {
    const cd ca = std::conj(a[m]);
    for (std::size_t q1 = 0; q1 < shape_[1]; ++q1) {
      for (std::size_t n = 0; n < shape_[2]; ++n) {
        const cd cac = ca * std::conj(c[n]);
        for (std::size_t q2 = 0; q2 < shape_[3]; ++q2) out(q1, q2) += cac * data_[idx++];
      }
    }
  }
  return out;
}

ReceivedTensor& ReceivedTensor::operator+=(const ReceivedTensor& other) {
  if (other.shape_ != shape_) throw Error(ErrorCode::ConfigMismatch, "tensor shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ReceivedTensor& ReceivedTensor::operator-=(const ReceivedTensor& other) {
  if (other.shape_ != shape_) throw Error(ErrorCode::ConfigMismatch, "tensor shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

void write_tensor(const std::filesystem::path& path, const ReceivedTensor& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  for (auto dim : tensor.shape()) {
    const auto d32 = static_cast<std::uint32_t>(dim);
    out.write(reinterpret_cast<const char*>(&d32), sizeof d32);
  }
  for (const auto& x : tensor.data()) {
    const double parts[2] = {x.real(), x.imag()};
    out.write(reinterpret_cast<const char*>(parts), sizeof parts);
  }
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

ReceivedTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  ReceivedTensor::Shape shape{};
  for (auto& dim : shape) {
    std::uint32_t d32 = 0;
    in.read(reinterpret_cast<char*>(&d32), sizeof d32);
    dim = d32;
  }
  if (!in) throw Error(ErrorCode::IoError, "truncated tensor header in " + path.string());
  ReceivedTensor tensor(shape);
  for (auto& x : tensor.data()) {
    double parts[2];
    in.read(reinterpret_cast<char*>(parts), sizeof parts);
    x = cd{parts[0], parts[1]};
  }
  if (!in) throw Error(ErrorCode::IoError, "truncated tensor body in " + path.string());
  return tensor;
}

std::uint64_t tensor_checksum(const ReceivedTensor& tensor) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (auto dim : tensor.shape()) {
    const auto d32 = static_cast<std::uint32_t>(dim);
    mix(&d32, sizeof d32);
  }
  for (const auto& x : tensor.data()) {
    const double parts[2] = {x.real(), x.imag()};
    mix(parts, sizeof parts);
  }
  return h;
}

}  // namespace isac
