#include "spf/measurement.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "spf/rng.hpp"

namespace spf {

namespace {

void check_positive_dims(Index n1, Index n2, Index m) {
  if (n1 < 1 || n2 < 1 || m < 1) {
    throw std::invalid_argument("measurement operator dimensions must be >= 1");
  }
}

}  // namespace

MeasurementOperator make_gaussian_operator(Index n1, Index n2, Index m,
                                           std::uint64_t seed) {
  check_positive_dims(n1, n2, m);
  MeasurementOperator op;
  op.n1 = n1;
  op.n2 = n2;
  op.m = m;
  op.seed = seed;
  op.matrices.reserve(static_cast<std::size_t>(m));

  // Fixed fill order (matrix index, then row-major within a matrix) pins the
  // bit pattern to (n1, n2, m, seed).
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Index ell = 0; ell < m; ++ell) {
    CMatrix a(n1, n2);
    for (Index i = 0; i < n1; ++i) {
      for (Index j = 0; j < n2; ++j) {
        a(i, j) = scale * rng.next_cgaussian();
      }
    }
    op.matrices.push_back(std::move(a));
  }
  return op;
}

CVector MeasurementOperator::apply(const CMatrix& X) const {
  if (X.rows() != n1 || X.cols() != n2) {
    throw std::invalid_argument("apply: matrix shape does not match operator");
  }
  CVector out(m);
  for (Index ell = 0; ell < m; ++ell) {
    // trace(A_ell^* X) = sum_ij conj(A_ell[i,j]) X[i,j]
    out(ell) = matrix(ell).conjugate().cwiseProduct(X).sum();
  }
  return out;
}

CVector MeasurementOperator::apply_rank_one(const CVector& x,
                                            const CVector& y) const {
  if (x.size() != n1 || y.size() != n2) {
    throw std::invalid_argument("apply_rank_one: factor lengths do not match");
  }
  std::vector<Index> xi, yj;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) != Complex{0.0, 0.0}) xi.push_back(i);
  }
  for (Index j = 0; j < y.size(); ++j) {
    if (y(j) != Complex{0.0, 0.0}) yj.push_back(j);
  }
  CVector out = CVector::Zero(m);
  for (Index ell = 0; ell < m; ++ell) {
    const CMatrix& a = matrix(ell);
    Complex acc{0.0, 0.0};
    for (const Index i : xi) {
      Complex row{0.0, 0.0};
      for (const Index j : yj) {
        row += std::conj(a(i, j)) * std::conj(y(j));
      }
      acc += row * x(i);
    }
    out(ell) = acc;
  }
  return out;
}

CMatrix MeasurementOperator::adjoint(const CVector& b) const {
  if (b.size() != m) {
    throw std::invalid_argument("adjoint: measurement length does not match");
  }
  CMatrix out = CMatrix::Zero(n1, n2);
  for (Index ell = 0; ell < m; ++ell) {
    out.noalias() += b(ell) * matrix(ell);
  }
  return out;
}

CMatrix MeasurementOperator::f_matrix(const CVector& y) const {
  if (y.size() != n2) {
    throw std::invalid_argument("f_matrix: y length does not match operator");
  }
  CMatrix out(m, n1);
  for (Index ell = 0; ell < m; ++ell) {
    // row ell = y^* A_ell^* = (A_ell y)^*
    out.row(ell) = (matrix(ell) * y).adjoint();
  }
  return out;
}

CMatrix MeasurementOperator::g_matrix(const CVector& x) const {
  if (x.size() != n1) {
    throw std::invalid_argument("g_matrix: x length does not match operator");
  }
  CMatrix out(m, n2);
  for (Index ell = 0; ell < m; ++ell) {
    // row ell = x^* A_ell = (A_ell^* x)^*
    out.row(ell) = (matrix(ell).adjoint() * x).adjoint();
  }
  return out;
}

namespace {

constexpr std::uint32_t kDumpVersion = 1;

void put_u32_le(std::ofstream& os, std::uint32_t v) {
  unsigned char buf[4];
  buf[0] = static_cast<unsigned char>(v & 0xFF);
  buf[1] = static_cast<unsigned char>((v >> 8) & 0xFF);
  buf[2] = static_cast<unsigned char>((v >> 16) & 0xFF);
  buf[3] = static_cast<unsigned char>((v >> 24) & 0xFF);
  os.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t get_u32_le(std::ifstream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  return static_cast<std::uint32_t>(buf[0]) |
         (static_cast<std::uint32_t>(buf[1]) << 8) |
         (static_cast<std::uint32_t>(buf[2]) << 16) |
         (static_cast<std::uint32_t>(buf[3]) << 24);
}

static_assert(sizeof(double) == 8);

}  // namespace

void save_operator(const MeasurementOperator& op, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  put_u32_le(os, static_cast<std::uint32_t>(op.n1));
  put_u32_le(os, static_cast<std::uint32_t>(op.n2));
  put_u32_le(os, static_cast<std::uint32_t>(op.m));
  put_u32_le(os, kDumpVersion);
  for (Index ell = 0; ell < op.m; ++ell) {
    const CMatrix& a = op.matrix(ell);
    for (Index i = 0; i < op.n1; ++i) {
      for (Index j = 0; j < op.n2; ++j) {
        const double re = a(i, j).real();
        const double im = a(i, j).imag();
        os.write(reinterpret_cast<const char*>(&re), sizeof(double));
        os.write(reinterpret_cast<const char*>(&im), sizeof(double));
      }
    }
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

MeasurementOperator load_operator(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  MeasurementOperator op;
  op.n1 = static_cast<Index>(get_u32_le(is));
  op.n2 = static_cast<Index>(get_u32_le(is));
  op.m = static_cast<Index>(get_u32_le(is));
  const std::uint32_t version = get_u32_le(is);
  if (!is || version != kDumpVersion) {
    throw std::runtime_error("bad operator dump header: " + path);
  }
  op.matrices.reserve(static_cast<std::size_t>(op.m));
  for (Index ell = 0; ell < op.m; ++ell) {
    CMatrix a(op.n1, op.n2);
    for (Index i = 0; i < op.n1; ++i) {
      for (Index j = 0; j < op.n2; ++j) {
        double re = 0.0, im = 0.0;
        is.read(reinterpret_cast<char*>(&re), sizeof(double));
        is.read(reinterpret_cast<char*>(&im), sizeof(double));
        a(i, j) = Complex{re, im};
      }
    }
    op.matrices.push_back(std::move(a));
  }
  if (!is) throw std::runtime_error("truncated operator dump: " + path);
  return op;
}

}  // namespace spf
