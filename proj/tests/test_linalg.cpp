#include <catch2/catch_amalgamated.hpp>

#include "ergolab/linalg.hpp"
#include "ergolab/rng.hpp"

using namespace ergolab;

namespace {

Matrix random_matrix(int m, int n, RngStream& rng) {
  Matrix a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a;
}

} // namespace

TEST_CASE("qr reconstructs and orthogonalizes") {
  RngStream rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng.next_u64() % 4);
    Matrix a = random_matrix(n + 1, n, rng);
    Qr f = qr_mgs(a);
    Matrix qtq = f.q.transposed() * f.q;
    CHECK((qtq - Matrix::identity(n)).max_abs() < 1e-12);
    CHECK((f.q * f.r - a).max_abs() < 1e-12);
    for (int i = 0; i < n; ++i) CHECK(f.r(i, i) >= 0);
  }
}

TEST_CASE("jacobi svd on diagonal and random matrices") {
  Matrix d(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 0.5;
  Svd s = jacobi_svd(d);
  CHECK(s.sigma[0] == Catch::Approx(2.0));
  CHECK(s.sigma[1] == Catch::Approx(0.5));

  RngStream rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 2 + static_cast<int>(rng.next_u64() % 3);
    int m = n + static_cast<int>(rng.next_u64() % 3);
    Matrix a = random_matrix(m, n, rng);
    Svd f = jacobi_svd(a);
    // descending order
    for (int i = 0; i + 1 < n; ++i) CHECK(f.sigma[i] >= f.sigma[i + 1]);
    // reconstruction
    Matrix rec(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double v = 0;
        for (int k = 0; k < n; ++k) v += f.u(i, k) * f.sigma[k] * f.v(j, k);
        rec(i, j) = v;
      }
    CHECK((rec - a).max_abs() < 1e-11);
    // orthogonality of factors
    CHECK((f.u.transposed() * f.u - Matrix::identity(n)).max_abs() < 1e-11);
    CHECK((f.v.transposed() * f.v - Matrix::identity(n)).max_abs() < 1e-11);
  }
}

TEST_CASE("svd handles rank deficiency") {
  Matrix a(3, 2);
  a(0, 0) = 1.0;
  a(1, 0) = 2.0;
  a(2, 0) = 3.0; // second column zero
  Svd f = jacobi_svd(a);
  CHECK(f.sigma[0] == Catch::Approx(std::sqrt(14.0)));
  CHECK(f.sigma[1] == 0.0);
  CHECK((f.u.transposed() * f.u - Matrix::identity(2)).max_abs() < 1e-12);
}

TEST_CASE("lu det and solve") {
  RngStream rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng.next_u64() % 4);
    Matrix a = random_matrix(n, n, rng);
    Vec svals = singular_values(a);
    double sv_det = 1.0;
    for (double s : svals) sv_det *= s;
    CHECK(std::abs(det(a)) == Catch::Approx(sv_det).epsilon(1e-8));
    Vec b(n);
    for (int i = 0; i < n; ++i) b[i] = rng.normal();
    Vec x = solve(a, b);
    Vec r = a * x;
    for (int i = 0; i < n; ++i) CHECK(r[i] == Catch::Approx(b[i]).margin(1e-9));
  }
}

TEST_CASE("orthonormal complement") {
  RngStream rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng.next_u64() % 4);
    Vec u = rng.unit_vector(n);
    Matrix c = unit_complement(u);
    REQUIRE(c.cols() == n - 1);
    for (int j = 0; j < n - 1; ++j) {
      CHECK(std::abs(dot(c.col(j), u)) < 1e-12);
      for (int k = j; k < n - 1; ++k)
        CHECK(std::abs(col_dot(c, j, k) - (j == k ? 1.0 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("rng streams are reproducible and independent") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    auto x = a.next_u64();
    CHECK(x == b.next_u64());
  }
  bool differs = false;
  RngStream a2(42, 7);
  for (int i = 0; i < 100; ++i)
    if (a2.next_u64() != c.next_u64()) differs = true;
  CHECK(differs);
  // uniform moments
  RngStream u(5);
  double mean = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) mean += u.uniform01();
  mean /= n;
  CHECK(std::abs(mean - 0.5) < 0.005);
  // normal moments
  RngStream g(6);
  double m1 = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    double z = g.normal();
    m1 += z;
    m2 += z * z;
  }
  CHECK(std::abs(m1 / n) < 0.01);
  CHECK(std::abs(m2 / n - 1.0) < 0.02);
}
