#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "hetlink/common.hpp"
#include "hetlink/features.hpp"
#include "hetlink/rng.hpp"

using namespace hetlink;

namespace {

std::string tmp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("mean and centered-unit caches are consistent") {
  Mat rows(3, 2);
  rows(0, 0) = 1.0;
  rows(1, 1) = 1.0;
  rows(2, 0) = 1.0;
  rows(2, 1) = 1.0;
  FeatureMatrix fm(std::move(rows));
  CHECK(fm.mean()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(fm.mean()[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  for (std::size_t i = 0; i < fm.n(); ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < fm.dim(); ++j)
      norm += fm.centered_unit()(i, j) * fm.centered_unit()(i, j);
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("degenerate constant features get zero centered rows") {
  Mat rows(4, 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) rows(i, j) = 2.5;
  FeatureMatrix fm(std::move(rows));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(fm.centered_unit()(i, j) == 0.0);
}

TEST_CASE("centering idempotence and centered rows sum to zero") {
  FeatureMatrix fm = gaussian_features(50, 6, 3);
  // Center the raw rows, rebuild: the mean of a centered matrix is ~0 and
  // the unit rows match.
  Mat centered(fm.n(), fm.dim());
  for (std::size_t i = 0; i < fm.n(); ++i)
    for (std::size_t j = 0; j < fm.dim(); ++j) centered(i, j) = fm.rows()(i, j) - fm.mean()[j];
  FeatureMatrix fm2(std::move(centered));
  for (double m : fm2.mean()) CHECK(std::abs(m) <= 1e-12);
  for (std::size_t i = 0; i < fm.n(); ++i)
    for (std::size_t j = 0; j < fm.dim(); ++j)
      CHECK(fm2.centered_unit()(i, j) == doctest::Approx(fm.centered_unit()(i, j)).epsilon(1e-12));

  // Sum of centered rows is the zero vector (to 1e-9 * n).
  for (std::size_t j = 0; j < fm.dim(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < fm.n(); ++i) s += fm.rows()(i, j) - fm.mean()[j];
    CHECK(std::abs(s) <= 1e-9 * static_cast<double>(fm.n()));
  }
}

TEST_CASE("gaussian_features determinism and edge cases") {
  FeatureMatrix a = gaussian_features(4, 2, 1);
  FeatureMatrix b = gaussian_features(4, 2, 1);
  CHECK(a.rows().v == b.rows().v);

  FeatureMatrix single = gaussian_features(1, 1, 5);
  CHECK(single.mean()[0] == doctest::Approx(single.rows()(0, 0)));
  CHECK(single.centered_unit()(0, 0) == 0.0);

  CHECK_THROWS_AS(gaussian_features(0, 2, 1), InputError);
  CHECK_THROWS_AS(gaussian_features(2, 0, 1), InputError);
}

TEST_CASE("gaussian_features column means obey the CLT bound") {
  FeatureMatrix fm = gaussian_features(100000, 2, 11);
  // 4 sigma / sqrt(n) = 4/316.2 ~ 0.0127 < 0.02
  for (double m : fm.mean()) CHECK(std::abs(m) < 0.02);
}

TEST_CASE("unit_circle_features basic angles") {
  auto ucf = unit_circle_features({0.0, 1.5707963267948966, 1.0471975511965976});
  CHECK(ucf.rows(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ucf.rows(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ucf.rows(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ucf.rows(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ucf.rows(2, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ucf.rows(2, 1) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(unit_circle_features({std::nan("")}), InputError);
}

TEST_CASE("binary feature IO round-trips") {
  const std::string path = tmp_path("hetlink_f.featb");
  FeatureMatrix fm = gaussian_features(5, 3, 7);
  save_features_binary(fm, path);
  FeatureMatrix first = load_features(path);
  CHECK(first.n() == 5);
  CHECK(first.dim() == 3);
  // Values already quantized to f32 round-trip bit-exactly.
  save_features_binary(first, path);
  FeatureMatrix second = load_features(path);
  CHECK(first.rows().v == second.rows().v);
  // And the first trip is f32-accurate against the source.
  for (std::size_t i = 0; i < fm.rows().v.size(); ++i)
    CHECK(first.rows().v[i] == doctest::Approx(fm.rows().v[i]).epsilon(1e-6));
  std::filesystem::remove(path);
}

TEST_CASE("text feature IO round-trips to 1e-9 and rejects malformed input") {
  const std::string path = tmp_path("hetlink_f.feat");
  FeatureMatrix fm = gaussian_features(4, 2, 9);
  save_features_text(fm, path);
  FeatureMatrix loaded = load_features(path);
  for (std::size_t i = 0; i < fm.rows().v.size(); ++i)
    CHECK(std::abs(loaded.rows().v[i] - fm.rows().v[i]) <= 1e-9);

  auto write = [&](const char* text) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs(text, f);
    std::fclose(f);
  };
  write("feat 2 2\n0.5 nan\n1 2\n");
  CHECK_THROWS_AS(load_features(path), InputError);
  write("feat 3 2\n0.5 1\n1 2\n");
  CHECK_THROWS_AS(load_features(path), InputError);  // header says 3 rows, file has 2
  write("nope 2 2\n");
  CHECK_THROWS_AS(load_features(path), InputError);
  std::filesystem::remove(path);
}
