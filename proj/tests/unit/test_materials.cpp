#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/materials.hpp"
#include "test_support.hpp"

using namespace fourtop;

namespace {

mat::MaterialCatalog table2() {
  return mat::MaterialCatalog::with_void({{"black", 1.0, 1.0, {0, 0, 0}},
                                          {"red", 0.8, 0.7, {220, 30, 30}},
                                          {"blue", 0.2, 0.15, {40, 70, 220}}});
}

}  // namespace

TEST_CASE("catalog construction") {
  const auto cat = table2();
  CHECK(cat.size() == 4);
  CHECK(cat.entries[0].label == "void");
  CHECK(cat.entries[0].young == doctest::Approx(1e-9));
  CHECK(cat.entries[0].density == doctest::Approx(1e-9));
  CHECK(cat.max_density() == doctest::Approx(1.0));

  CHECK_THROWS_AS(mat::MaterialCatalog::with_void(
                      {{"a", 1.0, 1.0, {}}, {"a", 0.5, 0.5, {}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(mat::MaterialCatalog::with_void({{"bad", -1.0, 1.0, {}}}),
                  std::invalid_argument);
}

TEST_CASE("simp_modulus") {
  Eigen::VectorXd rho(3);
  rho << 1.0, 0.5, 0.25;
  const auto e = mat::simp_modulus(rho, 3.0, 1.0, 1e-9);
  CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e[1] == doctest::Approx(0.125).epsilon(1e-6));
  CHECK(e[2] > 0.0);

  // p = 1 is affine in rho
  const auto lin = mat::simp_modulus(rho, 1.0, 2.0, 1e-9);
  CHECK(testsup::rel_err(lin[1] - lin[2], (2.0 - 1e-9) * 0.25) < 1e-12);
}

TEST_CASE("mm_modulus") {
  const auto cat = table2();

  Eigen::MatrixXd rows(3, 4);
  rows << 0, 1, 0, 0,  // pure material 1
      1, 0, 0, 0,      // pure void
      0.25, 0.25, 0.25, 0.25;
  const auto e = mat::mm_modulus(rows, 1.0, cat);
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(e[1] == doctest::Approx(1e-9));
  CHECK(e[2] == doctest::Approx(0.25 * (1e-9 + 1.0 + 0.8 + 0.2)));

  Eigen::MatrixXd bad = rows;
  bad(0, 0) = 0.3;  // row sum 1.3
  CHECK_THROWS_AS(mat::mm_modulus(bad, 1.0, cat), std::invalid_argument);
  CHECK_THROWS_AS(mat::mm_modulus(rows.leftCols(3), 1.0, cat),
                  std::invalid_argument);
}

TEST_CASE("mm_modulus reduces to simp_modulus for one solid phase") {
  const auto cat = mat::MaterialCatalog::with_void({{"solid", 1.0, 1.0, {}}});
  Eigen::VectorXd rho(5);
  rho << 0.05, 0.3, 0.5, 0.8, 1.0;
  Eigen::MatrixXd rows(5, 2);
  rows.col(1) = rho;
  rows.col(0) = 1.0 - rho.array();
  for (double p : {1.0, 3.0, 8.0}) {
    const auto mm = mat::mm_modulus(rows, p, cat);
    const auto simp = mat::simp_modulus(rho, p, 1.0, 0.0);
    // the void phase contributes at most Emin
    CHECK((mm - simp).cwiseAbs().maxCoeff() <= 1e-9 + 1e-15);
  }
}

TEST_CASE("mass and mass fraction") {
  const auto cat = table2();
  const int n = 100;

  Eigen::MatrixXd full(n, 4);
  full.setZero();
  full.col(1).setOnes();  // heaviest material everywhere
  CHECK(mat::mass(full, cat, 1.0) == doctest::Approx(100.0));
  CHECK(mat::mass_fraction(full, cat, 1.0, 100.0) == doctest::Approx(1.0));

  Eigen::MatrixXd empty(n, 4);
  empty.setZero();
  empty.col(0).setOnes();
  CHECK(mat::mass(empty, cat, 1.0) == doctest::Approx(1e-9 * n));

  Eigen::MatrixXd half(n, 4);
  half.setZero();
  for (int e = 0; e < n; ++e) {
    if (e < n / 2)
      half(e, 2) = 1.0;  // red, lambda = 0.7
    else
      half(e, 0) = 1.0;
  }
  CHECK(mat::mass(half, cat, 1.0) == doctest::Approx(35.0).epsilon(1e-6));

  SUBCASE("mass is linear in each density column") {
    Rng rng(4);
    Eigen::MatrixXd a(n, 4), b(n, 4);
    for (int e = 0; e < n; ++e)
      for (int c = 0; c < 4; ++c) {
        a(e, c) = rng.uniform(0.0, 1.0);
        b(e, c) = rng.uniform(0.0, 1.0);
      }
    const double m_sum = mat::mass(a + b, cat, 0.7);
    CHECK(testsup::rel_err(m_sum, mat::mass(a, cat, 0.7) +
                                      mat::mass(b, cat, 0.7)) < 1e-12);
  }
}

TEST_CASE("volume_fraction") {
  CHECK(mat::volume_fraction(Eigen::VectorXd::Ones(7), 1.0, 7.0) ==
        doctest::Approx(1.0));
  CHECK(mat::volume_fraction(Eigen::VectorXd::Constant(20, 0.45), 1.0, 20.0) ==
        doctest::Approx(0.45));
  Eigen::VectorXd v(3);
  v << 0.1, 0.5, 0.9;
  CHECK(mat::volume_fraction(v, 2.0, 12.0) == doctest::Approx(1.5 / 6.0));
}
