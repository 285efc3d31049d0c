#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "omod/entanglement.hpp"
#include "omod/errors.hpp"

using namespace omod;

namespace {

Mat4 two_mode_squeezed(double r) {
  const double c = 0.5 * std::cosh(2.0 * r);
  const double s = 0.5 * std::sinh(2.0 * r);
  Mat4 V = Mat4::Zero();
  V(0, 0) = V(1, 1) = V(2, 2) = V(3, 3) = c;
  V(0, 2) = V(2, 0) = s;
  V(1, 3) = V(3, 1) = -s;
  return V;
}

Mat4 thermal(double n1, double n2) {
  Eigen::Vector4d d;
  d << n1 + 0.5, n1 + 0.5, n2 + 0.5, n2 + 0.5;
  return d.asDiagonal();
}

Mat4 local_rotation(double theta, double phi) {
  Mat4 R = Mat4::Zero();
  R(0, 0) = std::cos(theta);
  R(0, 1) = std::sin(theta);
  R(1, 0) = -std::sin(theta);
  R(1, 1) = std::cos(theta);
  R(2, 2) = std::cos(phi);
  R(2, 3) = std::sin(phi);
  R(3, 2) = -std::sin(phi);
  R(3, 3) = std::cos(phi);
  return R;
}

}  // namespace

TEST_CASE("two-mode squeezed state: E_N = 2r") {
  for (double r : {0.25, 0.5, 1.0}) {
    const Mat4 V = two_mode_squeezed(r);
    const auto [lo, hi] = symplectic_eigenvalues_pt(V);
    CHECK(lo == doctest::Approx(0.5 * std::exp(-2.0 * r)).epsilon(1e-12));
    CHECK(hi == doctest::Approx(0.5 * std::exp(2.0 * r)).epsilon(1e-12));
    CHECK(lo <= hi);
    CHECK(log_negativity(V) == doctest::Approx(2.0 * r).epsilon(1e-10));
  }
}

TEST_CASE("separable states carry zero log negativity") {
  CHECK(log_negativity(thermal(0.0, 0.0)) == 0.0);   // two-mode vacuum
  CHECK(log_negativity(thermal(2.0, 0.5)) == 0.0);   // uncoupled thermal
  CHECK(log_negativity(thermal(200.0, 0.03)) == 0.0);
  // factorized with unequal variances and no cross block
  Eigen::Vector4d d;
  d << 0.5, 0.5, 1.5, 1.5;
  CHECK(log_negativity(Mat4(d.asDiagonal())) == 0.0);
}

TEST_CASE("log negativity is invariant under local rotations") {
  const Mat4 V = two_mode_squeezed(0.5);
  for (double theta : {0.3, 1.1}) {
    for (double phi : {-0.7, 2.4}) {
      const Mat4 R = local_rotation(theta, phi);
      const Mat4 W = R * V * R.transpose();
      CHECK(log_negativity(W) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("added symmetric noise never increases entanglement") {
  const Mat4 V = two_mode_squeezed(0.75);
  double prev = log_negativity(V);
  for (double c : {0.01, 0.05, 0.2, 1.0}) {
    const double en = log_negativity(V + c * Mat4::Identity());
    CHECK(en <= prev + 1e-12);
    prev = en;
  }
}

TEST_CASE("symplectic eigenvalue domain errors") {
  // indefinite matrix with negative squared symplectic eigenvalue
  Eigen::Vector4d d;
  d << 1.0, 1.0, 1.0, -1.0;
  CHECK_THROWS_AS(symplectic_eigenvalues_pt(Mat4(d.asDiagonal())), NumericalDomainError);
}

TEST_CASE("max_entanglement_over_period with refinement") {
  // synthetic period-1 family of TMS states with r(t) peaking at tau/4
  const double tau = 2.0;
  const double r0 = 0.3, r1 = 0.2;
  auto r_of = [&](double t) { return r0 + r1 * std::sin(2.0 * std::numbers::pi * t / tau); };
  CovarianceSeries series;
  const int n = 128;
  for (int i = 0; i < n; ++i) {
    // grid deliberately offset so the true peak falls between samples
    const double t = tau * (i + 0.37) / n;
    series.times.push_back(t);
    series.V.push_back(two_mode_squeezed(r_of(t)));
  }

  const EntanglementTrace coarse = max_entanglement_over_period(series);
  CHECK(coarse.E_N_max == doctest::Approx(2.0 * (r0 + r1)).epsilon(1e-3));
  CHECK(coarse.E_N.size() == series.times.size());

  const EntanglementTrace fine = max_entanglement_over_period(
      series, [&](double t) { return two_mode_squeezed(r_of(t)); });
  CHECK(fine.E_N_max >= coarse.E_N_max);
  CHECK(fine.E_N_max == doctest::Approx(2.0 * (r0 + r1)).epsilon(1e-5));
  CHECK(fine.argmax_time == doctest::Approx(tau / 4.0).epsilon(5e-3));
}

TEST_CASE("max_entanglement_over_period rejects sparse grids") {
  CovarianceSeries series;
  for (int i = 0; i < 32; ++i) {
    series.times.push_back(i * 0.1);
    series.V.push_back(two_mode_squeezed(0.1));
  }
  CHECK_THROWS_AS(max_entanglement_over_period(series), std::invalid_argument);
}

TEST_CASE("predicted resonances straddle twice the mechanical frequency") {
  const auto [lo, hi] = predict_resonances(0.6, 1.0);
  CHECK(lo == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(hi == doctest::Approx(2.6).epsilon(1e-15));
  CHECK_THROWS_AS(predict_resonances(-0.1, 1.0), std::invalid_argument);
}
