//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "solvflow/descriptors.h"

using namespace solvflow;
using namespace solvflow::descriptors;

namespace {

DescriptorTable small_table(const std::string &id) {
  DescriptorTable t(id, { "a", "b" });
  t.add("Methanol", { 1.0, 2.0 });
  t.add("Water", { 3.0, -1.0 });
  t.add("THF", { 0.5, 0.25 });
  return t;
}

ReactionRecord row(const char *a, const char *b, double pct) {
  ReactionRecord r;
  r.solvent_a = { a, "" };
  if (b != nullptr) {
    r.solvent_b = Solvent { b, "" };
  }
  r.pct_b = pct;
  r.temperature_c = 90.0;
  r.residence_time_s = 120.0;
  return r;
}

}  // namespace

TEST_CASE("mixing") {
  const std::vector<double> a { 1.0, 0.0 };
  const std::vector<double> b { 0.0, 1.0 };
  CHECK(mix_descriptors(a, b, 25.0) == std::vector<double> { 0.75, 0.25 });
  CHECK(mix_descriptors(a, b, 0.0) == a);
  CHECK(mix_descriptors(a, b, 100.0) == b);
  CHECK_THROWS_AS(mix_descriptors(a, b, 100.5), PctOutOfRange);
  CHECK_THROWS_AS(mix_descriptors(a, b, -1.0), PctOutOfRange);
  CHECK_THROWS_AS(mix_descriptors(a, std::vector<double> { 1.0 }, 5.0),
                  WidthMismatch);
}

TEST_CASE("mixing is affine in pct") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
    }
    const double p = std::abs(u(rng)) * 20.0;
    const auto m1 = mix_descriptors(a, b, p);
    const auto m2 = mix_descriptors(a, b, 100.0 - p);
    for (int i = 0; i < 4; ++i) {
      CHECK(m1[i] + m2[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("table lookups normalise names") {
  auto t = small_table("spange");
  CHECK(t.contains("  methanol "));
  CHECK(t.at("WATER")[0] == 3.0);
  CHECK(t.width() == 2);
  CHECK(t.size() == 3);
  CHECK_THROWS_AS(t.add("water", { 0.0, 0.0 }), Error);
  CHECK_THROWS_AS(t.add("Ethanol", { 0.0 }), WidthMismatch);
  try {
    t.at("Cyrene");
    FAIL("expected UnknownSolvent");
  } catch (const UnknownSolvent &e) {
    CHECK(e.solvent() == "Cyrene");
    CHECK(e.table() == "spange");
  }
}

TEST_CASE("csv loading") {
  const auto path = std::filesystem::temp_directory_path() / "solvflow_desc.csv";
  {
    std::ofstream out(path);
    out << "solvent,alpha,beta\nMethanol,0.98,0.66\n\"Water\",1.17,0.47\n";
  }
  const auto t = DescriptorTable::load_csv(path, "spange");
  CHECK(t.columns() == std::vector<std::string> { "alpha", "beta" });
  CHECK(t.at("water")[1] == 0.47);
  {
    std::ofstream out(path);
    out << "solvent,alpha\nMethanol,abc\n";
  }
  CHECK_THROWS(DescriptorTable::load_csv(path, "bad"));
  std::filesystem::remove(path);
}

TEST_CASE("pca on collinear points") {
  Eigen::MatrixXd x(5, 2);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = i;
    x(i, 1) = 2.0 * i + 1.0;
  }
  const auto basis = pca_fit(x, 2);
  CHECK(basis.explained_variance(0) / basis.total_variance
        == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(basis.explained_variance(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(pca_fit(Eigen::MatrixXd::Ones(4, 3), 1), DegenerateInput);
  CHECK_THROWS(pca_fit(x, 3));
}

TEST_CASE("pca orthonormality, ordering and reconstruction") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd x(30, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = n(rng) * (1.0 + (i / 30));
  }
  const auto full = pca_fit(x, 6);
  const Eigen::MatrixXd gram = full.components * full.components.transpose();
  CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
  for (int i = 1; i < 6; ++i) {
    CHECK(full.explained_variance(i - 1) >= full.explained_variance(i));
  }
  const Eigen::MatrixXd centered = x.rowwise() - full.mean.transpose();
  const Eigen::MatrixXd back = full.inverse_transform(full.transform(x));
  CHECK((back - x).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(((back.rowwise() - full.mean.transpose()) - centered).cwiseAbs().maxCoeff()
        < 1e-6);

  double previous = INFINITY;
  for (int k = 1; k <= 6; ++k) {
    const auto basis = pca_fit(x, k);
    const double err = (basis.inverse_transform(basis.transform(x)) - x).squaredNorm();
    CHECK(err <= previous + 1e-9);
    previous = err;
  }
}

TEST_CASE("reduce_table keeps names") {
  const auto t = small_table("acs");
  const auto r = reduce_table(t, 1, "acs_pca");
  CHECK(r.width() == 1);
  CHECK(r.size() == 3);
  CHECK(r.contains("thf"));
  CHECK(r.columns()[0] == "PC1");
}

TEST_CASE("baseline feature assembly") {
  const auto spange = small_table("spange");
  const auto acs = small_table("acs_pca");
  const TableSet tables { &spange, &acs, nullptr };
  drfp::Fingerprint fp(2048, 3);
  fp.set(5);

  const auto pure = assemble_baseline_features(row("Methanol", nullptr, 0.0),
                                               tables, fp);
  CHECK(pure.width() == 2 + 2 + 2 + 2048);
  CHECK(pure.n_spange == 2);
  CHECK(pure.n_acs == 2);
  CHECK(pure.n_drfp == 2048);
  CHECK(pure.values[0] == 120.0);
  CHECK(pure.values[1] == 90.0);
  CHECK(pure.values[2] == 1.0);
  CHECK(pure.values[3] == 2.0);
  CHECK(pure.values[6 + 5] == 1.0);
  CHECK(pure.values[6 + 4] == 0.0);

  const auto zero_b = assemble_baseline_features(row("Methanol", "Water", 0.0),
                                                 tables, fp);
  CHECK(zero_b.values == pure.values);

  const auto ab = assemble_baseline_features(row("Methanol", "Water", 30.0),
                                             tables, fp);
  const auto ba = assemble_baseline_features(row("Water", "Methanol", 70.0),
                                             tables, fp);
  REQUIRE(ab.width() == ba.width());
  for (int i = 0; i < ab.width(); ++i) {
    CHECK(ab.values[i] == doctest::Approx(ba.values[i]).epsilon(1e-12));
  }

  try {
    assemble_baseline_features(row("Methanol", "Cyrene", 30.0), tables, fp);
    FAIL("expected UnknownSolvent");
  } catch (const UnknownSolvent &e) {
    CHECK(e.solvent() == "Cyrene");
  }

  auto with_hex = row("Methanol", nullptr, 0.0);
  with_hex.drfp_hex = "f0";
  const auto hex = assemble_baseline_features(with_hex, tables, fp);
  CHECK(hex.n_drfp == 8);
  CHECK(hex.width() == 2 + 4 + 8);
  CHECK(hex.values[6] == 1.0);
  CHECK(hex.values[10] == 0.0);
}

TEST_CASE("column scaler uses only fitted statistics") {
  Eigen::MatrixXd train(3, 2);
  train << 1, 5, 2, 5, 3, 5;
  ColumnScaler s;
  s.fit(train);
  CHECK(s.mean()(0) == 2.0);
  CHECK(s.scale()(0) == doctest::Approx(1.0));
  CHECK(s.scale()(1) == 1.0);
  Eigen::MatrixXd test(1, 2);
  test << 4, 7;
  const auto z = s.transform(test);
  CHECK(z(0, 0) == doctest::Approx(2.0));
  CHECK(z(0, 1) == doctest::Approx(2.0));
  CHECK_THROWS_AS(s.transform(Eigen::MatrixXd::Zero(1, 3)), WidthMismatch);
}
