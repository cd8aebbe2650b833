#include "bakerlab/baker_bv.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>

#include <fftw3.h>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "bakerlab/torus.hpp"

namespace bakerlab::bv {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct BVOperator::Plans {
  long n = 0;
  fftw_plan fwd_half = nullptr;  // two stacked size-N/2 forward transforms
  fftw_plan bwd_half = nullptr;
  fftw_plan fwd_full = nullptr;
  fftw_plan bwd_full = nullptr;
  double scale = 1.0;            // 1 / (sqrt(N) sqrt(N/2))

  explicit Plans(long N) : n(N) {
    std::lock_guard<std::mutex> lk(planner_mutex());
    auto* a = fftw_alloc_complex(N);
    auto* b = fftw_alloc_complex(N);
    int h = static_cast<int>(N / 2);
    int full = static_cast<int>(N);
    fwd_half = fftw_plan_many_dft(1, &h, 2, a, nullptr, 1, h, b, nullptr, 1, h, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_half = fftw_plan_many_dft(1, &h, 2, a, nullptr, 1, h, b, nullptr, 1, h, FFTW_BACKWARD, FFTW_ESTIMATE);
    fwd_full = fftw_plan_dft_1d(full, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_full = fftw_plan_dft_1d(full, a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(a);
    fftw_free(b);
    if (!fwd_half || !bwd_half || !fwd_full || !bwd_full) throw NumericalFailure("BVOperator: FFTW planning failed");
    scale = 1.0 / std::sqrt(static_cast<double>(N) * static_cast<double>(N / 2));
  }
  ~Plans() {
    std::lock_guard<std::mutex> lk(planner_mutex());
    fftw_destroy_plan(fwd_half);
    fftw_destroy_plan(bwd_half);
    fftw_destroy_plan(fwd_full);
    fftw_destroy_plan(bwd_full);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;

  // buf holds the vector on entry and exit; tmp is scratch. Both fftw-aligned.
  void step(fftw_complex* buf, fftw_complex* tmp, long power) const {
    for (long s = 0; s < power; ++s) {
      fftw_execute_dft(fwd_half, buf, tmp);
      fftw_execute_dft(bwd_full, tmp, buf);
      for (long i = 0; i < n; ++i) {
        buf[i][0] *= scale;
        buf[i][1] *= scale;
      }
    }
    for (long s = 0; s < -power; ++s) {
      fftw_execute_dft(fwd_full, buf, tmp);
      fftw_execute_dft(bwd_half, tmp, buf);
      for (long i = 0; i < n; ++i) {
        buf[i][0] *= scale;
        buf[i][1] *= scale;
      }
    }
  }
};

BVOperator::BVOperator(TorusDim n) : n_(n) {
  if (!n.even())
    throw InvalidArgument("build_bv: N must be even (the quantized baker map needs N in 2N), got N=" +
                          std::to_string(n.value()));
  plans_ = std::make_shared<const Plans>(n_);
}

Vector BVOperator::apply(const Vector& v, long power) const {
  if (v.size() != n_) throw InvalidArgument("apply_bv: dimension mismatch");
  Matrix X = v;
  apply_columns(X, power, Exec::Serial);
  return X.col(0);
}

void BVOperator::apply_columns(Matrix& X, long power, Exec ex) const {
  if (X.rows() != n_) throw InvalidArgument("apply_columns: dimension mismatch");
  if (power == 0) return;
  const long ncols = X.cols();
  const Plans& P = *plans_;
  const size_t bytes = sizeof(fftw_complex) * n_;
  if (ex == Exec::Serial) {
    fftw_complex* buf = fftw_alloc_complex(n_);
    fftw_complex* tmp = fftw_alloc_complex(n_);
    for (long c = 0; c < ncols; ++c) {
      std::memcpy(buf, X.col(c).data(), bytes);
      P.step(buf, tmp, power);
      std::memcpy(static_cast<void*>(X.col(c).data()), buf, bytes);
    }
    fftw_free(buf);
    fftw_free(tmp);
    return;
  }
#pragma omp parallel
  {
    fftw_complex* buf = fftw_alloc_complex(n_);
    fftw_complex* tmp = fftw_alloc_complex(n_);
#pragma omp for schedule(static)
    for (long c = 0; c < ncols; ++c) {
      std::memcpy(buf, X.col(c).data(), bytes);
      P.step(buf, tmp, power);
      std::memcpy(static_cast<void*>(X.col(c).data()), buf, bytes);
    }
    fftw_free(buf);
    fftw_free(tmp);
  }
}

Matrix BVOperator::materialize() const {
  Matrix X = Matrix::Identity(n_, n_);
  apply_columns(X, 1);
  return X;
}

BVOperator build_bv(TorusDim n) { return BVOperator(n); }

Matrix dense_bv_reference(TorusDim n) {
  if (!n.even()) throw InvalidArgument("dense_bv_reference: N must be even");
  const long N = n, h = N / 2;
  Matrix Fh = torus::build_dft(TorusDim(h));
  Matrix blk = Matrix::Zero(N, N);
  blk.topLeftCorner(h, h) = Fh;
  blk.bottomRightCorner(h, h) = Fh;
  return torus::build_dft(n).adjoint() * blk;
}

Vector apply_bv(const BVOperator& op, const Vector& v, long power) { return op.apply(v, power); }

Matrix power_matrix(const BVOperator& op, long k) {
  Matrix X = Matrix::Identity(op.dim(), op.dim());
  op.apply_columns(X, k);
  return X;
}

Matrix to_momentum_basis(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("to_momentum_basis: matrix must be square");
  Matrix F = torus::build_dft(TorusDim(a.rows()));
  return F * a * F.adjoint();
}

// ---- spectral decomposition ----------------------------------------------

namespace {

// Schur route: LAPACK zgees on the full matrix.
void schur_stage(const Matrix& u, std::vector<double>& ang, Matrix& Z) {
  const long N = u.rows();
  Matrix T = u;
  Z.resize(N, N);
  std::vector<cplx> w(N);
  lapack_int sdim = 0;
  lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, static_cast<lapack_int>(N), T.data(),
                                  static_cast<lapack_int>(N), &sdim, w.data(), Z.data(), static_cast<lapack_int>(N));
  if (info != 0) throw NumericalFailure("spectral_decompose: zgees failed, info=" + std::to_string(info));
  ang.resize(N);
  for (long j = 0; j < N; ++j) ang[j] = wrap_angle(std::arg(w[j]));
}

// Hermitian route: eigenvectors of (U + U^dagger)/2 via zheevr. Runs of cos
// eigenvalues closer than htol are re-diagonalized with the compressed U,
// and every angle is read off the Rayleigh quotient of U.
void hermitian_stage(const Matrix& u, const std::function<void(Matrix&)>& apply, std::vector<double>& ang,
                     Matrix& Z) {
  const long N = u.rows();
  Matrix H = 0.5 * (u + u.adjoint());
  Z.resize(N, N);
  std::vector<double> c(N);
  std::vector<lapack_int> support(2 * N);
  lapack_int found = 0;
  lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', static_cast<lapack_int>(N), H.data(),
                                   static_cast<lapack_int>(N), 0.0, 0.0, 0, 0, 0.0, &found, c.data(), Z.data(),
                                   static_cast<lapack_int>(N), support.data());
  if (info != 0 || found != N)
    throw NumericalFailure("spectral_decompose: zheevr failed, info=" + std::to_string(info));
  Matrix UZ = Z;
  apply(UZ);
  const double htol = 1e-6;
  ang.resize(N);
  long j = 0;
  while (j < N) {
    long e = j + 1;
    while (e < N && c[e] - c[e - 1] < htol) ++e;
    const long m = e - j;
    if (m == 1) {
      ang[j] = wrap_angle(std::arg(Z.col(j).dot(UZ.col(j))));
    } else {
      Matrix M = Z.middleCols(j, m).adjoint() * UZ.middleCols(j, m);
      Eigen::ComplexEigenSolver<Matrix> es(M);
      if (es.info() != Eigen::Success) throw NumericalFailure("spectral_decompose: cluster eigensolve failed");
      Matrix V = Z.middleCols(j, m) * es.eigenvectors();
      for (long a = 0; a < m; ++a) {
        for (long b = 0; b < a; ++b) V.col(a) -= V.col(b).dot(V.col(a)) * V.col(b);
        V.col(a).normalize();
      }
      Z.middleCols(j, m) = V;
      for (long a = 0; a < m; ++a) ang[j + a] = wrap_angle(std::arg(es.eigenvalues()(a)));
    }
    j = e;
  }
}

SpectralData decompose_impl(const Matrix& u, double tol, const std::function<void(Matrix&)>& apply,
                            DecompMethod method) {
  const long N = u.rows();
  if (u.cols() != N || N < 1) throw InvalidArgument("spectral_decompose: matrix must be square");
  std::vector<double> ang;
  Matrix Z;
  if (method == DecompMethod::Schur)
    schur_stage(u, ang, Z);
  else
    hermitian_stage(u, apply, ang, Z);

  std::vector<long> order(N);
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) { return ang[a] < ang[b]; });

  SpectralData sd;
  sd.angles.resize(N);
  sd.vectors.resize(N, N);
  for (long j = 0; j < N; ++j) {
    sd.angles(j) = ang[order[j]];
    sd.vectors.col(j) = Z.col(order[j]);
  }

  // clusters of nearly equal angles, including the wrap at 2 pi
  const double ctol = 1e-8;
  std::vector<long> start;
  for (long j = 0; j < N; ++j)
    if (j == 0 || sd.angles(j) - sd.angles(j - 1) > ctol) start.push_back(j);
  std::vector<std::vector<long>> clusters;
  for (size_t c = 0; c < start.size(); ++c) {
    long e = c + 1 < start.size() ? start[c + 1] : N;
    std::vector<long> idx;
    for (long j = start[c]; j < e; ++j) idx.push_back(j);
    clusters.push_back(idx);
  }
  if (clusters.size() > 1 && sd.angles(0) + kTwoPi - sd.angles(N - 1) <= ctol) {
    auto& last = clusters.back();
    last.insert(last.end(), clusters.front().begin(), clusters.front().end());
    clusters.erase(clusters.begin());
  }
  for (const auto& idx : clusters) {
    if (idx.size() < 2) continue;
    for (size_t a = 0; a < idx.size(); ++a) {
      auto va = sd.vectors.col(idx[a]);
      for (size_t b = 0; b < a; ++b) {
        auto vb = sd.vectors.col(idx[b]);
        cplx c = vb.dot(va);
        va -= c * vb;
      }
      double nrm = va.norm();
      if (!(nrm > 1e-6)) throw NumericalFailure("spectral_decompose: cluster re-orthonormalization lost rank");
      va /= nrm;
    }
  }

  // residuals |U v - e^{i theta} v|
  Matrix R = sd.vectors;
  apply(R);
  long worst = 0;
  double rmax = 0.0;
  for (long j = 0; j < N; ++j) {
    cplx lam(std::cos(sd.angles(j)), std::sin(sd.angles(j)));
    double r = (R.col(j) - lam * sd.vectors.col(j)).norm();
    if (r > rmax) {
      rmax = r;
      worst = j;
    }
  }
  sd.max_residual = rmax;
  if (!(rmax <= tol)) {
    std::ostringstream os;
    os << "spectral_decompose: residual " << rmax << " exceeds " << tol << " at index " << worst
       << " (angle " << sd.angles(worst) << ")";
    throw NumericalFailure(os.str());
  }
  sd.orth_defect = max_abs(sd.vectors.adjoint() * sd.vectors - Matrix::Identity(N, N));

  double gap = N > 1 ? sd.angles(0) + kTwoPi - sd.angles(N - 1) : kTwoPi;
  for (long j = 1; j < N; ++j) gap = std::min(gap, sd.angles(j) - sd.angles(j - 1));
  sd.min_gap = gap;
  return sd;
}

}  // namespace

SpectralData spectral_decompose_unitary(const Matrix& u, double tol, DecompMethod method) {
  return decompose_impl(u, tol, [&](Matrix& X) { X = u * X; }, method);
}

SpectralData spectral_decompose(const BVOperator& op, double tol, DecompMethod method) {
  return decompose_impl(op.materialize(), tol, [&](Matrix& X) { op.apply_columns(X, 1); }, method);
}

// ---- binary dump ------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "BVSD dumps assume a little-endian host");

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("read_spectral_dump: truncated file");
  return v;
}

}  // namespace

void write_spectral_dump(const std::string& path, const SpectralData& sd) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("write_spectral_dump: cannot open " + path);
  os.write("BVSD", 4);
  put<std::uint32_t>(os, 1);
  const std::uint64_t N = sd.angles.size();
  put<std::uint64_t>(os, N);
  for (std::uint64_t j = 0; j < N; ++j) put<double>(os, sd.angles(j));
  for (std::uint64_t c = 0; c < N; ++c)
    for (std::uint64_t r = 0; r < N; ++r) {
      put<double>(os, sd.vectors(r, c).real());
      put<double>(os, sd.vectors(r, c).imag());
    }
  if (!os) throw NumericalFailure("write_spectral_dump: write failed for " + path);
}

SpectralData read_spectral_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("read_spectral_dump: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "BVSD", 4) != 0) throw InvalidArgument("read_spectral_dump: bad magic");
  auto ver = get<std::uint32_t>(is);
  if (ver != 1) throw InvalidArgument("read_spectral_dump: unsupported version " + std::to_string(ver));
  auto N = get<std::uint64_t>(is);
  if (N == 0 || N > 100000) throw InvalidArgument("read_spectral_dump: implausible N");
  SpectralData sd;
  sd.angles.resize(N);
  sd.vectors.resize(N, N);
  for (std::uint64_t j = 0; j < N; ++j) sd.angles(j) = get<double>(is);
  for (std::uint64_t c = 0; c < N; ++c)
    for (std::uint64_t r = 0; r < N; ++r) {
      double re = get<double>(is);
      double im = get<double>(is);
      sd.vectors(r, c) = {re, im};
    }
  double gap = N > 1 ? sd.angles(0) + kTwoPi - sd.angles(N - 1) : kTwoPi;
  for (std::uint64_t j = 1; j < N; ++j) gap = std::min(gap, sd.angles(j) - sd.angles(j - 1));
  sd.min_gap = gap;
  return sd;
}

}  // namespace bakerlab::bv
