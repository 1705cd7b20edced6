#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "mlsq/experiment.hpp"
#include "mlsq/mask.hpp"
#include "mlsq/rng.hpp"
#include "oracles.hpp"

using namespace mlsq;

TEST_CASE("full observation copies the input exactly") {
  SeededRng rng(7, 0);
  const DenseMatrix a = gaussian_matrix(4, 3, rng);
  SeededRng mask_rng(7, 1000);
  const MaskedMatrix masked = apply_mask_matrix(a, ObservationRates(1.0, 1.0), mask_rng);
  CHECK(masked.values == a);
  for (std::uint8_t bit : masked.mask) CHECK(bit == 1);

  const DenseMatrix ones(3, 3, 1.0);
  SeededRng rng2(8, 1000);
  const MaskedMatrix m2 = apply_mask_matrix(ones, ObservationRates(1.0, 1.0), rng2);
  CHECK(m2.values == ones);
}

TEST_CASE("masking the zero vector stays zero for any q") {
  SeededRng rng(9, 1000);
  const MaskedVector v = apply_mask_vector(DenseVector(50, 0.0), 0.3, rng);
  for (double x : v.values) CHECK(x == 0.0);
}

TEST_CASE("observed fraction lies in the binomial confidence interval") {
  SeededRng rng(10, 0);
  const DenseMatrix a = gaussian_matrix(200, 100, rng);
  SeededRng mask_rng(10, 1000);
  const MaskedMatrix masked = apply_mask_matrix(a, ObservationRates(0.7, 1.0), mask_rng);
  std::size_t kept = 0;
  for (std::uint8_t bit : masked.mask) kept += bit;
  const double frac = static_cast<double>(kept) / 20000.0;
  const double half_width = 3.3 * std::sqrt(0.7 * 0.3 / 20000.0);
  CHECK(std::abs(frac - 0.7) <= half_width);

  SeededRng vrng(11, 1000);
  const MaskedVector mv = apply_mask_vector(DenseVector(10000, 1.0), 0.9, vrng);
  std::size_t vkept = 0;
  for (std::uint8_t bit : mv.mask) vkept += bit;
  const double vfrac = static_cast<double>(vkept) / 10000.0;
  CHECK(std::abs(vfrac - 0.9) <= 3.3 * std::sqrt(0.9 * 0.1 / 10000.0));
}

TEST_CASE("values are exactly zero wherever the mask is off") {
  SeededRng rng(12, 0);
  const DenseMatrix a = gaussian_matrix(30, 20, rng);
  SeededRng mask_rng(12, 1000);
  const MaskedMatrix masked = apply_mask_matrix(a, ObservationRates(0.5, 1.0), mask_rng);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 20; ++j) {
      if (masked.observed(i, j))
        CHECK(masked.values(i, j) == a(i, j));
      else
        CHECK(masked.values(i, j) == 0.0);
    }
}

TEST_CASE("identical streams reproduce masks, distinct streams differ") {
  SeededRng rng(13, 0);
  const DenseMatrix a = gaussian_matrix(10, 10, rng);
  SeededRng r1(99, 1000), r2(99, 1000), r3(99, 1001);
  const MaskedMatrix m1 = apply_mask_matrix(a, ObservationRates(0.6, 1.0), r1);
  const MaskedMatrix m2 = apply_mask_matrix(a, ObservationRates(0.6, 1.0), r2);
  const MaskedMatrix m3 = apply_mask_matrix(a, ObservationRates(0.6, 1.0), r3);
  CHECK(m1.mask == m2.mask);
  CHECK(m1.mask != m3.mask);
}

TEST_CASE("mask entries at distinct positions are uncorrelated") {
  const DenseMatrix ones(2, 2, 1.0);
  const int resamples = 100000;
  double sums[4] = {0, 0, 0, 0};
  double cross[4][4] = {};
  SeededRng rng(14, 1000);
  for (int s = 0; s < resamples; ++s) {
    const MaskedMatrix m = apply_mask_matrix(ones, ObservationRates(0.5, 1.0), rng);
    for (int i = 0; i < 4; ++i) {
      sums[i] += m.mask[i];
      for (int j = 0; j < 4; ++j) cross[i][j] += m.mask[i] * m.mask[j];
    }
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const double mi = sums[i] / resamples;
      const double mj = sums[j] / resamples;
      const double cov = cross[i][j] / resamples - mi * mj;
      const double corr = cov / std::sqrt(mi * (1 - mi) * mj * (1 - mj));
      CHECK(std::abs(corr) < 0.02);
    }
}

TEST_CASE("rates outside (0,1] are rejected") {
  CHECK_THROWS_AS(ObservationRates(0.0, 0.5), PreconditionError);
  CHECK_THROWS_AS(ObservationRates(0.5, 0.0), PreconditionError);
  CHECK_THROWS_AS(ObservationRates(1.5, 0.5), PreconditionError);
  DenseVector b(3, 1.0);
  SeededRng rng(1, 0);
  CHECK_THROWS_AS(apply_mask_vector(b, 0.0, rng), PreconditionError);
}

TEST_CASE("mask dump round trips and carries the documented header") {
  SeededRng rng(15, 0);
  const DenseMatrix a = gaussian_matrix(9, 5, rng);
  SeededRng mask_rng(15, 1000);
  const MaskedMatrix masked = apply_mask_matrix(a, ObservationRates(0.4, 1.0), mask_rng);
  const std::string path = "mask_dump_test.bin";
  write_mask_file(path, masked);

  const std::string raw = oracle::read_file(path);
  REQUIRE(raw.size() == 16 + (9 * 5 + 7) / 8);
  CHECK(raw.substr(0, 4) == "LSQM");
  CHECK(static_cast<unsigned char>(raw[4]) == 9);
  CHECK(static_cast<unsigned char>(raw[5]) == 0);
  CHECK(static_cast<unsigned char>(raw[8]) == 5);

  const MaskFile file = read_mask_file(path);
  CHECK(file.rows == 9);
  CHECK(file.cols == 5);
  CHECK(file.mask == masked.mask);
  std::remove(path.c_str());

  CHECK_THROWS_AS(read_mask_file("does_not_exist.bin"), IoError);
  CHECK_THROWS_AS(write_mask_file("no_such_dir/mask.bin", masked), IoError);
}

TEST_CASE("gaussian draws are deterministic per stream and roughly standard") {
  SeededRng a(77, 3), b(77, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_gaussian() == b.next_gaussian());

  SeededRng rng(78, 0);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    sum += g;
    sum_sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
}

TEST_CASE("uniform index draws cover the range without bias") {
  SeededRng rng(79, 0);
  int counts[5] = {};
  const int n = 500000;
  for (int i = 0; i < n; ++i) ++counts[rng.next_index(5)];
  for (int c : counts) CHECK(std::abs(c / static_cast<double>(n) - 0.2) < 0.005);
  CHECK_THROWS_AS(rng.next_index(0), PreconditionError);
}
