#include <doctest.h>

#include <cmath>

#include "hug/gnc.hpp"
#include "hug/oracle.hpp"
#include "hug/proxies.hpp"
#include "hug/rng.hpp"
#include "support.hpp"

using namespace hug;
using hug_test::circle;
using hug_test::random_state;
using hug_test::rows;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Two samples per class collapsed exactly onto the C=3, d=2 simplex frame.
LabeledState collapsed_etf_state() {
  const PointConfig etf = circle({0.0, 2.0 * kPi / 3.0, 4.0 * kPi / 3.0});
  Matrix features(6, 2);
  std::vector<int> y;
  for (int c = 0; c < 3; ++c) {
    features.row(2 * c) = etf.points().row(c);
    features.row(2 * c + 1) = etf.points().row(c);
    y.push_back(c);
    y.push_back(c);
  }
  return LabeledState(PointConfig(features), Labels(y, 3), etf);
}

}  // namespace

TEST_CASE("the collapsed ETF state attains every GNC limit") {
  const LabeledState state = collapsed_etf_state();
  const GncReport report = gnc_report(state.features_config(), state.labels,
                                      state.proxies_config());
  CHECK(report.afmre == doctest::Approx(0.0));
  CHECK(report.afre == doctest::Approx(0.0));
  CHECK(report.reverse_energy == doctest::Approx(0.0));
  CHECK(report.collapse_metric <= 1e-12);
  CHECK(report.self_duality_gap <= 1e-12);
  CHECK(report.nearest_mean_agreement == doctest::Approx(1.0));
  CHECK(report.etf_deviation <= 1e-9);
  CHECK(report.acme == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(report.equinorm_cv <= 1e-12);
  CHECK(report.trace_sw == doctest::Approx(0.0));
  CHECK(!report.cross_polytope_deviation.has_value());  // C != 2d
}

TEST_CASE("average energy of the canonical configurations") {
  CHECK(average_energy(circle({0.0, 2.0 * kPi / 3.0, 4.0 * kPi / 3.0})) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  Matrix ten(10, 2);
  for (int k = 0; k < 10; ++k) {
    ten(k, 0) = std::cos(2.0 * kPi * k / 10.0);
    ten(k, 1) = std::sin(2.0 * kPi * k / 10.0);
  }
  CHECK(average_energy(PointConfig(ten)) ==
        doctest::Approx(82.5 / 90.0).epsilon(1e-12));

  CHECK(average_energy(oracle::cross_polytope_config(3)) ==
        doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("reverse-energy metrics on an antipodal class") {
  // Class 0 is an antipodal pair (mean at the origin); class 1 is collapsed.
  Matrix features(4, 2);
  features << 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 1.0;
  const PointConfig config(features);
  const Labels labels({0, 0, 1, 1}, 2);

  // afre averages the ordered intra-class distances per class: class 0
  // contributes 2, class 1 contributes 0, so the mean over classes is 1.
  CHECK(afre(config, labels) == doctest::Approx(1.0));
  CHECK_THROWS_AS(afmre(config, labels), DegenerateMeanError);
}

TEST_CASE("afre of a 60-degree pair and singleton classes") {
  const double angle = kPi / 3.0;
  Matrix features(3, 2);
  features << 1.0, 0.0, std::cos(angle), std::sin(angle), -1.0, 0.0;
  const Labels labels({0, 0, 1}, 2);
  // Class 0: two points at chord 1 -> per-class average 1; class 1 singleton.
  CHECK(afre(PointConfig(features), labels) == doctest::Approx(0.5));

  Matrix singles(2, 2);
  singles << 1.0, 0.0, 0.0, 1.0;
  CHECK(afre(PointConfig(singles), Labels({0, 1}, 2)) == doctest::Approx(0.0));
}

TEST_CASE("afmre measures distance to the normalized class mean") {
  const double angle = kPi / 3.0;
  Matrix features(3, 2);
  features << std::cos(angle), std::sin(angle), std::cos(angle), -std::sin(angle),
      -1.0, 0.0;
  const Labels labels({0, 0, 1}, 2);
  // Class 0's normalized mean is (1, 0); both members sit at chord
  // 2 sin(30 deg) = 1 from it. Class 1 is collapsed.
  CHECK(afmre(PointConfig(features), labels) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("collapse metric vanishes with zero within-class scatter") {
  const LabeledState state = collapsed_etf_state();
  CHECK(collapse_metric(state.features_config(), state.labels) <= 1e-12);

  // Single sample per class: Sigma_W = 0 exactly.
  Matrix singles(3, 2);
  singles << 1.0, 0.0, 0.0, 1.0, -1.0, 0.0;
  CHECK(collapse_metric(PointConfig(singles), Labels({0, 1, 2}, 3)) ==
        doctest::Approx(0.0));
}

TEST_CASE("collapse metric agrees with the dense small-instance oracle") {
  // Two classes at +-x, each perturbed +-delta along y.
  const double delta = 0.05;
  const double x = std::sqrt(1.0 - delta * delta);
  Matrix features(4, 2);
  features << x, delta, x, -delta, -x, delta, -x, -delta;
  const Labels labels({0, 0, 1, 1}, 2);

  // Dense oracle: Sigma_W = delta^2 e2 e2^T, Sigma_B = x^2 e1 e1^T, so the
  // pseudoinverse kills the within directions and the trace is 0.
  Eigen::Matrix2d sigma_w = Eigen::Matrix2d::Zero();
  sigma_w(1, 1) = delta * delta;
  Eigen::Matrix2d sigma_b = Eigen::Matrix2d::Zero();
  sigma_b(0, 0) = x * x;
  Eigen::Matrix2d pinv_b = Eigen::Matrix2d::Zero();
  pinv_b(0, 0) = 1.0 / sigma_b(0, 0);
  const double oracle_value = (pinv_b * sigma_w).trace();

  CHECK(collapse_metric(PointConfig(features), labels) ==
        doctest::Approx(oracle_value).epsilon(1e-12));
}

TEST_CASE("equinorm coefficient of variation") {
  // Symmetric two-class state: equal centered norms.
  Matrix sym(2, 2);
  sym << 1.0, 0.0, -1.0, 0.0;
  CHECK(equinorm_cv(PointConfig(sym), Labels({0, 1}, 2)) == doctest::Approx(0.0));

  // Centered class-mean norms {0.5, 1.0}: mean 0.75, std 0.25, cv = 1/3.
  const double angle = kPi / 3.0;
  Matrix skewed(3, 2);
  skewed << std::cos(angle), std::sin(angle), std::cos(angle), -std::sin(angle),
      -1.0, 0.0;
  CHECK(equinorm_cv(PointConfig(skewed), Labels({0, 0, 1}, 2)) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("self-duality gap extremes") {
  const LabeledState state = collapsed_etf_state();
  CHECK(self_duality_gap(state.proxies_config(), state.features_config(),
                         state.labels) <= 1e-12);

  // Proxy antipodal to its class mean: gap 2. Proxy 90 degrees away: sqrt 2.
  Matrix features(2, 2);
  features << 1.0, 0.0, -1.0, 0.0;
  const PointConfig config(features);
  const Labels labels({0, 1}, 2);
  CHECK(self_duality_gap(circle({kPi, 0.0}), config, labels) ==
        doctest::Approx(2.0));
  CHECK(self_duality_gap(circle({kPi / 2, kPi}), config, labels) ==
        doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("nearest-mean agreement: collapsed vs swapped proxies") {
  const LabeledState state = collapsed_etf_state();
  CHECK(nearest_mean_agreement(state.proxies_config(), state.features_config(),
                               state.labels) == doctest::Approx(1.0));

  // Swapping the proxies of two collapsed classes disagrees everywhere.
  Matrix features(2, 2);
  features << 1.0, 0.0, -1.0, 0.0;
  CHECK(nearest_mean_agreement(circle({kPi, 0.0}), PointConfig(features),
                               Labels({0, 1}, 2)) == doctest::Approx(0.0));
}

TEST_CASE("FDA traces: the maximal balanced case and the degenerate stacks") {
  // Collapsed balanced two-class antipodal state with n = 4.
  Matrix features(4, 2);
  features << 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, -1.0, 0.0;
  const auto traces = fda_traces(features, Labels({0, 0, 1, 1}, 2));
  CHECK(traces.first == doctest::Approx(4.0));   // trace S_b = n
  CHECK(traces.second == doctest::Approx(0.0));  // trace S_w = 0

  // Ten classes stacked onto two poles: S_w = 0 and S_b = n, the degenerate
  // maximizer of the data FDA objective.
  const int C = 10;
  Matrix stacks(C, 2);
  std::vector<int> y;
  for (int c = 0; c < C; ++c) {
    stacks.row(c) << 0.0, (c < C / 2 ? 1.0 : -1.0);
    y.push_back(c);
  }
  const auto degenerate = fda_traces(stacks, Labels(y, C));
  CHECK(degenerate.first == doctest::Approx(static_cast<double>(C)));
  CHECK(degenerate.second == doctest::Approx(0.0));

  // All class means equal: the between-class trace vanishes.
  Matrix equal_means(4, 2);
  equal_means << 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0;
  CHECK(fda_traces(equal_means, Labels({0, 0, 1, 1}, 2)).first ==
        doctest::Approx(0.0));
}

TEST_CASE("trace S_b never exceeds the sample count for unit features") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LabeledState state = random_state(4, 3, 5, 600 + seed);
    const auto traces = fda_traces(state.features, state.labels);
    CHECK(traces.first <= static_cast<double>(state.features.rows()) + 1e-9);
  }
}

TEST_CASE("ETF deviation of canonical configurations") {
  CHECK(etf_deviation(circle({0.0, 2.0 * kPi / 3.0, 4.0 * kPi / 3.0})) <= 1e-12);
  CHECK(etf_deviation(circle({0.3, 0.3 + kPi})) <= 1e-12);  // C = 2 antipodal

  // Square on the circle: adjacent inner 0 vs -1/3, diagonal -1 vs -1/3.
  Matrix square(4, 2);
  square << 1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0;
  CHECK(etf_deviation(PointConfig(square)) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("zero ETF deviation pins the closed-form energy") {
  const PointConfig etf = oracle::etf_config(4, 5);
  CHECK(etf_deviation(etf) <= 1e-9);
  CHECK(riesz_energy(etf, 2.0) == doctest::Approx(4.5).epsilon(1e-9));
}

TEST_CASE("cross-polytope deviation: canonical, rotated, and circular imposter") {
  const PointConfig canonical = oracle::cross_polytope_config(3);
  CHECK(cross_polytope_deviation(canonical).deviation == doctest::Approx(0.0));

  Vector params(3);
  params << 0.4, -0.9, 0.3;
  const PointConfig turned =
      normalize_rows(canonical.points() * cayley_rotation(params, 3));
  CHECK(cross_polytope_deviation(turned).deviation <= 1e-10);

  // Six points equally spaced on a great circle of S^2: the unmatched
  // adjacent pairs have |inner| = 1/2.
  Matrix hexagon(6, 3);
  for (int k = 0; k < 6; ++k) {
    hexagon.row(k) << std::cos(kPi * k / 3.0), std::sin(kPi * k / 3.0), 0.0;
  }
  const auto result = cross_polytope_deviation(PointConfig(hexagon));
  CHECK(result.deviation >= 0.5);

  CHECK_THROWS_AS(cross_polytope_deviation(circle({0.0, 1.0, 2.0})),
                  WrongCountError);
}

TEST_CASE("uniformity statistics of tight frames and collapsed sets") {
  const auto cross = uniformity_stats(oracle::cross_polytope_config(3));
  CHECK(cross.first == doctest::Approx(0.0));
  CHECK(cross.second == doctest::Approx(0.0));

  const auto etf = uniformity_stats(circle({0.0, 2.0 * kPi / 3.0, 4.0 * kPi / 3.0}));
  CHECK(etf.first <= 1e-12);
  CHECK(etf.second <= 1e-12);

  Matrix identical(4, 3);
  for (int i = 0; i < 4; ++i) identical.row(i) << 1.0, 0.0, 0.0;
  const auto collapsed = uniformity_stats(PointConfig(identical));
  CHECK(collapsed.first == doctest::Approx(1.0));
  Eigen::Matrix3d expected = -Eigen::Matrix3d::Identity() / 3.0;
  expected(0, 0) += 1.0;
  CHECK(collapsed.second == doctest::Approx(expected.norm()));
}

TEST_CASE("gnc report fields are finite and rotation invariant") {
  const LabeledState state = random_state(4, 3, 5, 901);
  const GncReport report = gnc_report(state.features_config(), state.labels,
                                      state.proxies_config());
  CHECK(std::isfinite(report.ace));
  CHECK(report.nearest_mean_agreement >= 0.0);
  CHECK(report.nearest_mean_agreement <= 1.0);

  Vector params(3);
  params << 0.7, -0.2, 1.1;
  const Matrix rotation = cayley_rotation(params, 3);
  const GncReport turned = gnc_report(normalize_rows(state.features * rotation),
                                      state.labels,
                                      normalize_rows(state.proxies * rotation));
  CHECK(std::abs(report.ace - turned.ace) <= 1e-9);
  CHECK(std::abs(report.acme - turned.acme) <= 1e-9);
  CHECK(std::abs(report.afre - turned.afre) <= 1e-9);
  CHECK(std::abs(report.afmre - turned.afmre) <= 1e-9);
  CHECK(std::abs(report.reverse_energy - turned.reverse_energy) <= 1e-9);
  CHECK(std::abs(report.trace_sb - turned.trace_sb) <= 1e-9);
  CHECK(std::abs(report.trace_sw - turned.trace_sw) <= 1e-9);
  CHECK(std::abs(report.collapse_metric - turned.collapse_metric) <= 1e-6);
  CHECK(std::abs(report.equinorm_cv - turned.equinorm_cv) <= 1e-9);
  CHECK(std::abs(report.self_duality_gap - turned.self_duality_gap) <= 1e-9);
  CHECK(report.nearest_mean_agreement ==
        doctest::Approx(turned.nearest_mean_agreement));
  CHECK(std::abs(report.etf_deviation - turned.etf_deviation) <= 1e-9);
  CHECK(std::abs(report.covariance_deviation - turned.covariance_deviation) <= 1e-9);
}

TEST_CASE("cross-polytope deviation appears in the report only when C = 2d") {
  const LabeledState state = random_state(4, 2, 3, 77);  // C = 4 = 2d
  const GncReport report = gnc_report(state.features_config(), state.labels,
                                      state.proxies_config());
  CHECK(report.cross_polytope_deviation.has_value());
}
