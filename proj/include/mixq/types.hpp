// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixq {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

/// Binary per-antenna indicator (mask or precision flag), stored 0-based.
using BitVector = std::vector<std::uint8_t>;

/// Bad input or configuration. CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure (divergence, SVD breakdown). CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A one-bit input fell outside [-delta1/2, delta1/2]: the one-bit scale was
/// designed too small for the measurement.
class DynamicRangeViolation : public NumericalError {
  public:
    DynamicRangeViolation(const std::string& what, long antenna = -1)
        : NumericalError(what), antenna_(antenna) {}

    /// 1-based antenna index, or -1 when raised on a bare scalar.
    long antenna() const noexcept { return antenna_; }

  private:
    long antenna_;
};

enum class SnapshotKind { full, masked, quantized };

inline const char* to_string(SnapshotKind k) {
    switch (k) {
    case SnapshotKind::full: return "full";
    case SnapshotKind::masked: return "masked";
    case SnapshotKind::quantized: return "quantized";
    }
    return "?";
}

/// Length-M array response with its observation mask.
///
/// `values[m]` belongs to ULA slot m+1. For kind == masked or quantized the
/// values are zero wherever mask is zero.
struct Snapshot {
    cvec values;
    BitVector mask;
    SnapshotKind kind = SnapshotKind::full;

    Eigen::Index size() const { return values.size(); }

    std::size_t observed() const {
        std::size_t n = 0;
        for (auto m : mask) n += m != 0;
        return n;
    }
};

} // namespace mixq
