#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "smi/errors.hpp"

namespace smi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// One observation per row; extra columns carry per-observation covariates (e.g. exposure).
using Observations = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Degree of influence of the suspect module, restricted to [0, 1].
class Eta {
public:
  Eta() = default;
  explicit Eta(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0))
      throw contract_error("eta must lie in [0, 1], got " + std::to_string(value));
  }

  double value() const noexcept { return value_; }
  explicit operator double() const noexcept { return value_; }

  friend bool operator==(Eta a, Eta b) noexcept { return a.value_ == b.value_; }
  friend auto operator<=>(Eta a, Eta b) noexcept { return a.value_ <=> b.value_; }

private:
  double value_ = 0.0;
};

} // namespace smi
