#include <doctest.h>

#include <cstdio>

#include "bakerlab/baker_bv.hpp"
#include "bakerlab/exclusion.hpp"
#include "bakerlab/rng.hpp"
#include "bakerlab/torus.hpp"

using namespace bakerlab;
using namespace bakerlab::bv;

TEST_CASE("B_2 and input validation") {
  Matrix b2 = build_bv(TorusDim{2}).materialize();
  const double s = 1.0 / std::sqrt(2.0);
  Matrix want(2, 2);
  want << s, s, s, -s;
  CHECK(max_abs(b2 - want) < 1e-15);
  CHECK_THROWS_AS(build_bv(TorusDim{7}), InvalidArgument);
}

TEST_CASE("factorized operator matches the dense product of DFTs") {
  for (long n : {4L, 100L, 256L}) {
    BVOperator op(TorusDim{n});
    Matrix dense = dense_bv_reference(TorusDim{n});
    CHECK(max_abs(op.materialize() - dense) < 1e-12);
    CHECK(max_abs(dense.adjoint() * dense - Matrix::Identity(n, n)) < 1e-12);
  }
  BVOperator op(TorusDim{100});
  Matrix dense = dense_bv_reference(TorusDim{100});
  rng::Stream st(9, 0);
  for (int i = 0; i < 20; ++i) {
    Vector v = st.complex_normal_matrix(100, 1).col(0);
    CHECK(max_abs(op.apply(v, 1) - dense * v) < 1e-12);
  }
}

TEST_CASE("powers") {
  BVOperator op(TorusDim{64});
  rng::Stream st(1, 1);
  Vector v = st.complex_normal_matrix(64, 1).col(0);
  CHECK(max_abs(op.apply(v, 0) - v) == 0.0);
  CHECK(max_abs(op.apply(op.apply(v, 1), -1) - v) < 1e-12);
  Matrix dense = op.materialize();
  Matrix d3 = dense * dense * dense;
  CHECK(max_abs(op.apply(v, 3) - d3 * v) < 3e-10);
  CHECK(max_abs(power_matrix(op, 1) - dense) < 1e-13);

  BVOperator op256(TorusDim{256});
  Matrix p2 = power_matrix(op256, 2), p3 = power_matrix(op256, 3), p5 = power_matrix(op256, 5);
  CHECK(max_abs(p2 * p3 - p5) < 1e-9);

  Matrix X = st.complex_normal_matrix(64, 5);
  Matrix Y = X, Z = X;
  op.apply_columns(Y, -2, Exec::Serial);
  op.apply_columns(Z, -2, Exec::Parallel);
  CHECK(max_abs(Y - Z) < 1e-13);
  CHECK(max_abs(Y - dense.adjoint() * dense.adjoint() * X) < 1e-12);
}

TEST_CASE("first row of B^k on a dyadic lattice") {
  const long n = 1024;
  BVOperator op(TorusDim{n});
  CHECK(std::abs(op.apply(Vector::Unit(n, 0), 5)(0) - std::pow(2.0, -2.5)) < 1e-10);
  for (long k = 1; k <= 10; ++k) {
    // row 0 of B^k is conj of column 0 of (B^dagger)^k
    Vector r = op.apply(Vector::Unit(n, 0), -k).conjugate();
    const long step = n >> k;
    double err = 0.0;
    for (long y = 0; y < n; ++y) {
      const double want = (y % step == 0) ? std::pow(2.0, -0.5 * k) : 0.0;
      err = std::max(err, std::abs(r(y) - want));
    }
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("large entries of B^3 follow the doubling map") {
  const long n = 100;
  Matrix p = power_matrix(BVOperator(TorusDim{n}), 3);
  auto params = excl::make_params(TorusDim{n}, 3.0, 0.03, 0.02, 2.0);
  long used = 0, tracked = 0;
  for (long y = 0; y < n; ++y) {
    if (excl::in_discontinuity_set({n / 2, y}, params)) continue;
    Eigen::Index arg;
    p.col(y).cwiseAbs().maxCoeff(&arg);
    ++used;
    if (excl::in_classical_set({long(arg), y}, 3, 2.0, TorusDim{n})) ++tracked;
  }
  REQUIRE(used > 20);
  CHECK(double(tracked) / used >= 0.9);
}

TEST_CASE("momentum basis is the transpose") {
  Matrix b2 = build_bv(TorusDim{2}).materialize();
  CHECK(max_abs(to_momentum_basis(b2) - b2.transpose()) < 1e-14);
  Matrix b = build_bv(TorusDim{64}).materialize();
  Matrix m = to_momentum_basis(b);
  CHECK(max_abs(m - b.transpose()) <= 1e-10);
  Matrix f = torus::build_dft(TorusDim{64});
  CHECK(max_abs(f.adjoint() * m * f - b) <= 1e-10);
}

TEST_CASE("spectral decomposition: N = 2") {
  auto sd = spectral_decompose(BVOperator(TorusDim{2}));
  REQUIRE(sd.dim() == 2);
  CHECK(sd.angles(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sd.angles(1) == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("spectral decomposition: both routes") {
  for (long n : {64L, 250L}) {
    BVOperator op(TorusDim{n});
    Matrix u = op.materialize();
    for (auto method : {DecompMethod::Schur, DecompMethod::HermitianSplit}) {
      auto sd = spectral_decompose_unitary(u, 1e-8, method);
      CHECK(sd.max_residual <= 1e-8);
      CHECK(max_abs(sd.vectors.adjoint() * sd.vectors - Matrix::Identity(n, n)) <= 1e-8);
      Vector ph(n);
      for (long j = 0; j < n; ++j) ph(j) = std::polar(1.0, sd.angles(j));
      CHECK(max_abs(sd.vectors * ph.asDiagonal() * sd.vectors.adjoint() - u) <= 1e-7);
      for (long j = 0; j < n; ++j) {
        CHECK(sd.angles(j) >= 0.0);
        CHECK(sd.angles(j) < kTwoPi);
        if (j > 0) CHECK(sd.angles(j) >= sd.angles(j - 1));
      }
    }
    auto a = spectral_decompose_unitary(u, 1e-8, DecompMethod::Schur);
    auto b = spectral_decompose_unitary(u, 1e-8, DecompMethod::HermitianSplit);
    CHECK((a.angles - b.angles).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("spectrum at N = 1000 is simple") {
  auto sd = spectral_decompose(BVOperator(TorusDim{1000}));
  CHECK(sd.min_gap > 0.0);
  CHECK(sd.orth_defect <= 1e-8);
}

TEST_CASE("a degenerate unitary keeps orthonormal eigenvectors") {
  const long n = 12;
  rng::Stream st(4, 4);
  Matrix g = st.complex_normal_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Vector d(n);
  for (long j = 0; j < n; ++j) d(j) = std::polar(1.0, j < 5 ? 1.0 : (j < 9 ? 2.0 : 4.0));
  Matrix u = q * d.asDiagonal() * q.adjoint();
  for (auto method : {DecompMethod::Schur, DecompMethod::HermitianSplit}) {
    auto sd = spectral_decompose_unitary(u, 1e-8, method);
    CHECK(sd.orth_defect <= 1e-10);
    CHECK(sd.max_residual <= 1e-10);
  }
}

TEST_CASE("non-unitary input is a numerical failure") {
  Matrix a = Matrix::Identity(4, 4);
  a(0, 1) = 0.5;
  CHECK_THROWS_AS(spectral_decompose_unitary(a), NumericalFailure);
}

TEST_CASE("spectral dump round trip") {
  auto sd = spectral_decompose(BVOperator(TorusDim{16}));
  const std::string path = "bv_dump_roundtrip.bin";
  write_spectral_dump(path, sd);
  auto back = read_spectral_dump(path);
  CHECK(back.angles == sd.angles);
  CHECK(back.vectors == sd.vectors);
  std::remove(path.c_str());
}
