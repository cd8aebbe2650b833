#include <doctest.h>

#include <json.hpp>

#include "bakerlab/walsh.hpp"

using namespace bakerlab;
using namespace bakerlab::walsh;

namespace {

long ipow(long b, long e) {
  long r = 1;
  for (long i = 0; i < e; ++i) r *= b;
  return r;
}

// Count by brute force over every v in [0, D)^k.
long enumerate_solutions(long D, int k, int s, int alpha, long b, int a0) {
  const long total = ipow(D, k);
  long hits = 0;
  std::vector<long> v(k);
  for (long idx = 0; idx < total; ++idx) {
    long r = idx;
    for (int m = 0; m < k; ++m) {
      v[m] = r % D;
      r /= D;
    }
    bool ok = true;
    for (int t = 0; t < k - s && ok; ++t) {
      const int m = (a0 + t) % k;
      const long lhs = ((alpha * v[m] + b) % D + D) % D;
      ok = lhs == v[(m + s) % k];
    }
    hits += ok;
  }
  return hits;
}

}  // namespace

TEST_CASE("eta branches") {
  CHECK(eta(4, 3) == 3);
  CHECK(eta(4, 5) == 3);
  CHECK(eta(4, 13) == 3);
  CHECK(eta(4, 8) == 0);
  CHECK(eta(4, 0) == 0);
  CHECK(eta(4, 16 + 3) == eta(4, 3));
  CHECK(eta(4, -3) == eta(4, 13));
}

TEST_CASE("order") {
  CHECK(WalshParams(2, 5, 2).order() == 10);
  CHECK(WalshParams(3, 5, 2).order() == 20);
  CHECK_THROWS_AS(WalshParams(1, 3, 1), InvalidArgument);
  CHECK_THROWS_AS(WalshParams(2, 3, 4), InvalidArgument);
}

TEST_CASE("Walsh transform") {
  WalshParams p(2, 1, 0);
  Matrix w = walsh_transform(p);
  CHECK(max_abs(w - small_dft(2)) < 1e-15);
  WalshParams q(3, 3, 1);
  Matrix W = walsh_transform(q);
  CHECK(max_abs(W.adjoint() * W - Matrix::Identity(27, 27)) < 1e-13);
  Vector e = Vector::Unit(27, 0);
  CHECK(max_abs(walsh_transform_apply(q, e) - Vector::Constant(27, 1.0 / std::sqrt(27.0))) < 1e-14);
}

TEST_CASE("closed power form against dense multiplication") {
  for (long D : {2L, 3L, 4L})
    for (int k = 1; k <= 4; ++k) {
      WalshParams p(D, k, k / 2);
      Matrix B = walsh_baker_dense(p);
      Matrix I = Matrix::Identity(p.dim(), p.dim());
      Matrix Bj = I;
      double err = 0.0;
      for (long j = 1; j <= p.order() + 2; ++j) {
        Bj = B * Bj;
        err = std::max(err, max_abs(Bj - walsh_baker_apply_columns(p, I, j)));
      }
      CHECK(err <= 1e-10);
      CHECK(max_abs(walsh_baker_apply_columns(p, I, p.order()) - I) <= 1e-10);
      CHECK(max_abs(walsh_baker_apply_columns(p, I, -1) - B.adjoint()) <= 1e-12);
      CHECK(max_abs(walsh_baker_apply_columns(p, I, 3, Exec::Serial) - walsh_baker_apply_columns(p, I, 3)) == 0.0);
    }
  WalshParams p(2, 6, 3);
  Matrix I = Matrix::Identity(64, 64);
  CHECK(max_abs(walsh_baker_apply_columns(p, I, 12) - I) <= 1e-10);
}

TEST_CASE("product states") {
  WalshParams p(3, 3, 1);
  for (long idx : {0L, 5L, 26L}) {
    auto s = coherent_product(p, idx);
    Vector v = expand(s);
    CHECK(std::abs(v.norm() - 1.0) < 1e-14);
    auto moved = baker_product(p, s, 2);
    CHECK(max_abs(expand(moved) - walsh_baker_apply(p, v, 2)) < 1e-12);
    CHECK(std::abs(overlap(s, s) - 1.0) < 1e-14);
  }
  CHECK(digits(5, 3, 3) == std::vector<long>{0, 1, 2});
}

TEST_CASE("coherent basis") {
  WalshParams p(3, 3, 1);
  auto cb = coherent_basis(p);
  CHECK(max_abs(cb.C.adjoint() * cb.C - Matrix::Identity(27, 27)) <= 1e-12);
  for (const auto& r : cb.rects) CHECK((r.q1 - r.q0) * (r.p1 - r.p0) == doctest::Approx(1.0 / 27.0).epsilon(1e-12));
  auto pos = coherent_basis(WalshParams(2, 4, 4));
  CHECK(max_abs(pos.C - Matrix::Identity(16, 16)) == 0.0);
  Matrix X = Matrix::Identity(27, 27);
  CHECK(max_abs(coherent_coefficients(p, X) - cb.C.adjoint()) <= 1e-13);
  CHECK(max_abs(coherent_coefficients(p, X, Exec::Serial) - coherent_coefficients(p, X)) == 0.0);
}

TEST_CASE("Walsh observables") {
  for (int ell : {1, 2, 4}) {
    WalshParams p(2, 4, ell);
    CHECK(max_abs(walsh_op(p, constant_observable(0.7)) - 0.7 * Matrix::Identity(16, 16)) <= 1e-13);
    Matrix A = walsh_op(p, indicator_q_below(0.5));
    CHECK(std::abs(A.trace() - 8.0) <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    for (long i = 0; i < 16; ++i) {
      const double ev = es.eigenvalues()(i);
      CHECK(std::min(std::abs(ev), std::abs(ev - 1.0)) <= 1e-12);
    }
  }
  WalshParams p(3, 2, 1);
  WalshObservable smooth{"q^2", [](double q, double) { return q * q; }};
  CHECK(walsh_op(p, smooth).trace().real() == doctest::Approx(9.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("count route agrees with the dense coherent matrix") {
  for (long D : {2L, 3L})
    for (int k = 1; k <= 3; ++k)
      for (int ell : {0, k}) {
        WalshParams p(D, k, ell);
        for (long j = 1; j < p.order(); ++j) {
          Matrix M = coherent_power_matrix(p, j);
          auto r = count_nonzero_entries(p, j);
          CHECK(r.total_count == long((M.cwiseAbs().array() > 1e-8).count()));
          CHECK(r.diag_count == long((M.diagonal().cwiseAbs().array() > 1e-8).count()));
        }
      }
}

TEST_CASE("count examples") {
  auto a = count_nonzero_entries(WalshParams(2, 3, 3), 2);
  CHECK(a.diag_count == 4);
  CHECK(a.ok());
  auto b = count_nonzero_entries(WalshParams(4, 2, 1), 4);
  CHECK(b.diag_count == 4);
  CHECK(b.ok());
  auto c = count_nonzero_entries(WalshParams(3, 3, 1), 2);
  CHECK(c.total_count == 27 * ipow(3, eta(3, 2)));
  CHECK(c.max_mag_dev <= 1e-10);
  CHECK_THROWS_AS(count_nonzero_entries(WalshParams(2, 13, 6), 1), InvalidArgument);
}

TEST_CASE("counts match the predictions on a sweep") {
  long bad = 0, n = 0;
  for (long D = 2; D <= 4; ++D)
    for (int k = 1; k <= 4; ++k)
      for (int ell : {0, k / 2, k}) {
        WalshParams p(D, k, ell);
        for (long j = 1; j < p.order(); ++j) {
          ++n;
          bad += !count_nonzero_entries(p, j).ok();
        }
      }
  CHECK(n > 100);
  CHECK(bad == 0);
}

TEST_CASE("linear system solutions") {
  long bad = 0;
  for (long D = 2; D <= 4; ++D)
    for (int k = 2; k <= 4; ++k)
      for (int s = 1; s < k; ++s)
        for (int alpha : {1, -1})
          for (long b = 0; b < D; ++b)
            for (int a0 = 0; a0 < k; ++a0) {
              const long got = linear_system_solutions(D, k, s, alpha, b, a0);
              bad += got != enumerate_solutions(D, k, s, alpha, b, a0);
              bad += got != ipow(D, s);
            }
  CHECK(bad == 0);
}

TEST_CASE("eigenprojector family") {
  auto fam = eigenprojectors(WalshParams(3, 3, 1));
  CHECK(fam.order == 12);
  CHECK(fam.sum_defect <= 1e-10);
  CHECK(fam.orth_defect <= 1e-10);
  CHECK(fam.eigen_defect <= 1e-10);
  auto deg = degeneracies(WalshParams(3, 3, 1));
  long sum = 0;
  for (std::size_t j = 0; j < deg.size(); ++j) {
    sum += deg[j];
    CHECK(std::abs(fam.P[j].trace().real() - double(deg[j])) <= 1e-8);
  }
  CHECK(sum == 27);
  auto tr = power_traces(WalshParams(2, 4, 2));
  CHECK(std::abs(tr[0] - 16.0) < 1e-12);
}

TEST_CASE("degeneracy ratio") {
  CHECK(degeneracy_ratio_deviation(WalshParams(2, 10, 5)) <= 0.3);
  long sum = 0;
  for (long d : degeneracies(WalshParams(2, 12, 6))) sum += d;
  CHECK(sum == 4096);
}

TEST_CASE("per eigenspace Weyl law") {
  auto dev = [](int k) {
    WalshParams p(2, k, k / 2);
    double worst = 0.0;
    for (long j = 0; j < p.order(); ++j) {
      const double v = per_eigenspace_weyl(p, indicator_q_below(0.5), j);
      CHECK(v >= 0.4);
      CHECK(v <= 0.6);
      worst = std::max(worst, std::abs(v - 0.5));
    }
    return worst;
  };
  const double d8 = dev(8), d12 = dev(12);
  CHECK(d12 < d8);
  WalshParams p(2, 8, 4);
  auto deg = degeneracies(p);
  for (long j = 0; j < p.order(); ++j)
    CHECK(per_eigenspace_weyl(p, constant_observable(3.0), j) ==
          doctest::Approx(3.0 * p.order() * deg[j] / 256.0).epsilon(1e-10));
}

TEST_CASE("random eigenbasis") {
  for (auto p : {WalshParams(3, 3, 1), WalshParams(2, 8, 4)}) {
    auto a = random_eigenbasis(p, 5), b = random_eigenbasis(p, 6);
    const long n = p.dim();
    CHECK(max_abs(a.U.adjoint() * a.U - Matrix::Identity(n, n)) <= 1e-8);
    Matrix BU = walsh_baker_apply_columns(p, a.U, 1);
    double res = 0.0;
    for (long i = 0; i < n; ++i)
      res = std::max(res, (BU.col(i) - std::polar(1.0, kTwoPi * a.label[i] / p.order()) * a.U.col(i)).norm());
    CHECK(res <= 1e-8);
    REQUIRE(a.label == b.label);
    double pd = 0.0;
    long c = 0;
    while (c < n) {
      long l = 0;
      while (c + l < n && a.label[c + l] == a.label[c]) ++l;
      Matrix pa = a.U.middleCols(c, l) * a.U.middleCols(c, l).adjoint();
      pd = std::max(pd, max_abs(pa - b.U.middleCols(c, l) * b.U.middleCols(c, l).adjoint()));
      c += l;
    }
    CHECK(pd <= 1e-8);
    CHECK(max_abs(a.U - b.U) > 1e-2);
    CHECK(max_abs(random_eigenbasis(p, 5).U - a.U) == 0.0);
  }
}

TEST_CASE("eigenbasis statistics") {
  WalshParams p(2, 10, 5);
  std::vector<WalshObservable> obs{indicator_q_below(0.5), constant_observable(1.0)};
  auto basis = random_eigenbasis(p, 1);
  auto s = eigenbasis_statistics(basis, p, obs);
  auto t = random_eigenbasis_statistics(p, 1, obs);
  CHECK(s.n_vectors == 1024);
  CHECK(s.que_max_dev[0] == doctest::Approx(t.que_max_dev[0]).epsilon(1e-10));
  CHECK(s.ks_max == doctest::Approx(t.ks_max).epsilon(1e-10));
  CHECK(s.que_max_dev[1] <= 1e-10);
  CHECK(s.lp2_mean == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.sign_changes_mean >= 0.45 * 1024);
  CHECK(s.sign_changes_mean <= 0.55 * 1024);
  CHECK(s.que_max_dev[0] <= 0.15);
  CHECK(s.ks_max_filtered <= s.ks_max + 1e-12 + 0.05);
}

TEST_CASE("Walsh report") {
  WalshParams p(2, 4, 2);
  BasisStats st;
  st.que_max_dev = {0.1};
  st.ks_max = 0.2;
  auto j = nlohmann::json::parse(walsh_report_json(p, degeneracies(p), true, "pass", st));
  for (const char* key : {"D", "k", "ell", "order", "degeneracies", "count_check", "que_max_dev", "ks_max"})
    CHECK(j.contains(key));
  CHECK(j["order"] == 8);
}
