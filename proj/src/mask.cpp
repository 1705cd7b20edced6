#include "mlsq/mask.hpp"

#include <cstdio>
#include <fstream>

#include "mlsq/errors.hpp"

namespace mlsq {

ObservationRates::ObservationRates(double p_, double q_) : p(p_), q(q_) {
  if (!(p > 0.0) || p > 1.0 || !(q > 0.0) || q > 1.0)
    throw PreconditionError("observation rates must lie in (0, 1]");
}

MaskedMatrix apply_mask_matrix(const DenseMatrix& a, const ObservationRates& rates,
                               SeededRng& rng) {
  MaskedMatrix out;
  out.values = DenseMatrix(a.rows(), a.cols());
  out.mask.assign(a.rows() * a.cols(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const bool keep = rng.next_bernoulli(rates.p);
      out.mask[i * a.cols() + j] = keep ? 1 : 0;
      out.values(i, j) = keep ? a(i, j) : 0.0;
    }
  }
  return out;
}

MaskedVector apply_mask_vector(const DenseVector& b, double q, SeededRng& rng) {
  if (!(q > 0.0) || q > 1.0)
    throw PreconditionError("apply_mask_vector: q must lie in (0, 1]");
  MaskedVector out;
  out.values.assign(b.size(), 0.0);
  out.mask.assign(b.size(), 0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const bool keep = rng.next_bernoulli(q);
    out.mask[i] = keep ? 1 : 0;
    out.values[i] = keep ? b[i] : 0.0;
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'L', 'S', 'Q', 'M'};

void put_u32le(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xFF));
  buf.push_back(static_cast<char>((v >> 8) & 0xFF));
  buf.push_back(static_cast<char>((v >> 16) & 0xFF));
  buf.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_mask_file(const std::string& path, const std::vector<std::uint8_t>& mask,
                     std::size_t rows, std::size_t cols) {
  if (mask.size() != rows * cols)
    throw PreconditionError("write_mask_file: mask size does not match rows*cols");
  if (rows > 0xFFFFFFFFull || cols > 0xFFFFFFFFull)
    throw PreconditionError("write_mask_file: dimensions exceed 32-bit header fields");
  std::string buf;
  buf.append(kMagic, 4);
  put_u32le(buf, static_cast<std::uint32_t>(rows));
  put_u32le(buf, static_cast<std::uint32_t>(cols));
  put_u32le(buf, 0);
  const std::size_t nbytes = (mask.size() + 7) / 8;
  std::string payload(nbytes, '\0');
  for (std::size_t k = 0; k < mask.size(); ++k)
    if (mask[k]) payload[k / 8] |= static_cast<char>(1u << (k % 8));
  buf += payload;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_mask_file: cannot open " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write_mask_file: write failed for " + path);
}

void write_mask_file(const std::string& path, const MaskedMatrix& m) {
  write_mask_file(path, m.mask, m.rows(), m.cols());
}

void write_mask_file(const std::string& path, const MaskedVector& v) {
  write_mask_file(path, v.mask, v.size(), 1);
}

MaskFile read_mask_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_mask_file: cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.size() < 16) throw IoError("read_mask_file: truncated header in " + path);
  if (content.compare(0, 4, kMagic, 4) != 0)
    throw IoError("read_mask_file: bad magic in " + path);
  const unsigned char* raw = reinterpret_cast<const unsigned char*>(content.data());
  MaskFile file;
  file.rows = get_u32le(raw + 4);
  file.cols = get_u32le(raw + 8);
  const std::size_t entries = file.rows * file.cols;
  const std::size_t nbytes = (entries + 7) / 8;
  if (content.size() != 16 + nbytes)
    throw IoError("read_mask_file: payload size mismatch in " + path);
  file.mask.assign(entries, 0);
  for (std::size_t k = 0; k < entries; ++k)
    file.mask[k] = (raw[16 + k / 8] >> (k % 8)) & 1u;
  return file;
}

}  // namespace mlsq
