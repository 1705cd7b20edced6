#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlsq/dense.hpp"
#include "mlsq/rng.hpp"

namespace mlsq {

// Entry observation probability p for the matrix and q for the right-hand
// side. Both must be strictly positive: they appear in denominators of the
// corrected gradient.
struct ObservationRates {
  double p = 1.0;
  double q = 1.0;

  ObservationRates() = default;
  ObservationRates(double p_, double q_);

  bool operator==(const ObservationRates&) const = default;
};

// Partially observed matrix: unobserved entries are stored as exact 0.0 in
// `values`, so every formula can be evaluated directly on `values`. The mask
// is kept for diagnostics and invariant checks only.
struct MaskedMatrix {
  DenseMatrix values;
  std::vector<std::uint8_t> mask;  // row-major observation flags

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
  bool observed(std::size_t i, std::size_t j) const {
    return mask[i * values.cols() + j] != 0;
  }
};

struct MaskedVector {
  DenseVector values;
  std::vector<std::uint8_t> mask;

  std::size_t size() const noexcept { return values.size(); }
  bool observed(std::size_t i) const { return mask[i] != 0; }
};

// Each entry is kept independently with probability rates.p, zeroed
// otherwise; the rng advances one draw per entry in row-major order.
MaskedMatrix apply_mask_matrix(const DenseMatrix& a, const ObservationRates& rates,
                               SeededRng& rng);

MaskedVector apply_mask_vector(const DenseVector& b, double q, SeededRng& rng);

// Bit-packed mask dump: 16-byte header (magic "LSQM", rows and cols as
// 32-bit little-endian words, one reserved word), then ceil(rows*cols/8)
// payload bytes; entry k of the row-major grid sits at bit k%8 (LSB first)
// of byte k/8. A vector mask is stored as cols = 1.
void write_mask_file(const std::string& path, const std::vector<std::uint8_t>& mask,
                     std::size_t rows, std::size_t cols);
void write_mask_file(const std::string& path, const MaskedMatrix& m);
void write_mask_file(const std::string& path, const MaskedVector& v);

struct MaskFile {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> mask;  // row-major, one byte per entry
};

MaskFile read_mask_file(const std::string& path);

}  // namespace mlsq
