#include "fvdwr/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fvdwr/errors.hpp"

namespace fvdwr {

namespace {

double sign(double z) { return z > 0 ? 1.0 : (z < 0 ? -1.0 : 0.0); }

// r for the Bernoulli scaling, r(z) = 1 - (1 - z/(e^z - 1)) / z, evaluated
// stably across the whole double range.
double exponential_r(double z) {
  const double az = std::abs(z);
  if (az < 1e-4) {
    // Taylor expansion of 1/2 + z/12 - z^3/720 + ...
    return 0.5 + z / 12.0 - z * z * z / 720.0;
  }
  if (z > 700.0) return 1.0 - 1.0 / z;
  if (z < -700.0) return -1.0 / z;
  const double K = z / std::expm1(z);
  return 1.0 - (1.0 - K) / z;
}

double exponential_dr(double z) {
  const double az = std::abs(z);
  if (az < 1e-4) return 1.0 / 12.0 - z * z / 240.0;
  if (az > 700.0) return 1.0 / (z * z);
  const double em = std::expm1(z);
  const double K = z / em;
  const double dK = 1.0 / em - z * std::exp(z) / (em * em);
  // r = 1 - (1-K)/z  =>  r' = (1-K)/z^2 + K'/z
  return (1.0 - K) / (z * z) + dK / z;
}

}  // namespace

UpwindScheme UpwindScheme::by_name(const std::string& name, double m) {
  if (name == "exponential") return UpwindScheme(name, Kind::exponential, 0.0);
  if (name == "full_upwind") return UpwindScheme(name, Kind::full_upwind, 0.0);
  if (name == "piecewise_linear") {
    const double mm = m > 0 ? m : 2.0;
    if (!(mm > 0.0 && mm <= 8.0))
      throw ConfigError("piecewise_linear scheme needs 0 < m <= 8");
    return UpwindScheme(name, Kind::piecewise_linear, mm);
  }
  if (name == "step") {
    const double mm = m >= 0 ? m : 1.0;
    if (!(mm >= 0.0 && mm <= 2.0)) throw ConfigError("step scheme needs 0 <= m <= 2");
    return UpwindScheme(name, Kind::step, mm);
  }
  if (name == "samarskij") return UpwindScheme(name, Kind::samarskij, 0.0);
  if (name == "tanh") return UpwindScheme(name, Kind::tanh_weight, 0.0);
  if (name == "ikeda") return UpwindScheme(name, Kind::ikeda, 0.0);
  throw ConfigError("unknown upwind scheme: " + name);
}

double UpwindScheme::r(double z) const {
  switch (kind_) {
    case Kind::exponential:
      return exponential_r(z);
    case Kind::full_upwind:
      return 0.5 * (sign(z) + 1.0);
    case Kind::piecewise_linear:
      if (z < -m_) return 0.0;
      if (z > m_) return 1.0;
      return (z + m_) / (2.0 * m_);
    case Kind::step:
      if (z < -m_) return 0.0;
      if (z > m_) return 1.0;
      return 0.5;
    case Kind::samarskij:
      return 0.5 * (z / (2.0 + std::abs(z)) + 1.0);
    case Kind::tanh_weight:
      return 0.5 * (std::tanh(z) + 1.0);
    case Kind::ikeda: {
      const double s = std::max(0.0, 1.0 - 2.0 / std::abs(z));  // s = 0 at z = 0
      return z < 0 ? 0.5 * (1.0 - s) : 0.5 * (1.0 + s);
    }
  }
  return 0.5;
}

std::vector<double> UpwindScheme::kinks() const {
  switch (kind_) {
    case Kind::full_upwind:
      return {0.0};
    case Kind::piecewise_linear:
    case Kind::step:
      return {-m_, m_};
    case Kind::ikeda:
      return {-2.0, 0.0, 2.0};
    default:
      return {};
  }
}

double UpwindScheme::r_smooth(double z) const {
  switch (kind_) {
    case Kind::exponential:
      return exponential_dr(z);
    case Kind::full_upwind:
    case Kind::step:
      return 0.0;
    case Kind::piecewise_linear:
      return std::abs(z) < m_ ? 1.0 / (2.0 * m_) : 0.0;
    case Kind::samarskij: {
      const double t = 2.0 + std::abs(z);
      return 1.0 / (t * t);
    }
    case Kind::tanh_weight: {
      const double c = std::cosh(z);
      return 0.5 / (c * c);
    }
    case Kind::ikeda:
      return std::abs(z) > 2.0 ? 1.0 / (z * z) : 0.0;
  }
  return 0.0;
}

double UpwindScheme::dr(double z) const {
  for (double k : kinks()) {
    if (z == k) {
      const double h = 1e-6;
      return (r(z + h) - r(z - h)) / (2.0 * h);
    }
  }
  return r_smooth(z);
}

namespace {

void record(SchemeProperties::Check& c, double z, double violation, double tol) {
  if (violation > c.violation) {
    c.violation = violation;
    c.witness_z = z;
  }
  if (violation > tol) c.pass = false;
}

}  // namespace

SchemeProperties verify_scheme_properties(const UpwindScheme& scheme, unsigned seed) {
  SchemeProperties p;
  p.monotone.name = "monotone";
  p.limits.name = "limits";
  p.m_matrix.name = "m_matrix";
  p.symmetry.name = "symmetry";
  p.positive_form.name = "positive_form";
  p.lipschitz.name = "lipschitz";
  p.range.name = "range";
  p.scaling_nonneg.name = "scaling_nonneg";
  p.reciprocity.name = "reciprocity";

  // Dense grid on [-50, 50], randomized points, and kink-adjacent probes.
  std::vector<double> zs;
  zs.reserve(10001 + 256 + 64);
  for (int k = -5000; k <= 5000; ++k) zs.push_back(k * 0.01);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-50.0, 50.0);
  for (int k = 0; k < 256; ++k) zs.push_back(uni(rng));
  for (double kink : scheme.kinks()) {
    for (double d : {1e-3, 1e-6, 1e-9}) {
      zs.push_back(kink - d);
      zs.push_back(kink + d);
      zs.push_back(-kink - d);
      zs.push_back(-kink + d);
    }
  }
  std::sort(zs.begin(), zs.end());

  const double tol = 1e-12;
  double prev_z = zs.front();
  double prev_r = scheme.r(prev_z);
  const double lipschitz_cap = 10.0;

  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double z = zs[i];
    const double rz = scheme.r(z);
    const double rmz = scheme.r(-z);

    record(p.range, z, std::max(-rz, rz - 1.0), tol);
    record(p.m_matrix, z, -(1.0 + z * rz), tol * std::max(1.0, std::abs(z)));
    record(p.symmetry, z, std::abs((1.0 - rz - rmz) * z), tol * std::max(1.0, std::abs(z)));
    record(p.positive_form, z, -((rz - 0.5) * z), tol * std::max(1.0, std::abs(z)));
    record(p.scaling_nonneg, z, -scheme.K(z), tol * std::max(1.0, std::abs(z)));
    record(p.reciprocity, z, std::abs(1.0 + z * rz - scheme.K(-z)),
           tol * std::max(1.0, std::abs(z)));

    if (i > 0) {
      record(p.monotone, z, prev_r - rz, tol);
      const double dz = z - prev_z;
      if (dz > 1e-14) {
        const double q = std::abs(z * rz - prev_z * prev_r) / dz;
        record(p.lipschitz, z, q - lipschitz_cap, 0.0);
      }
    }
    prev_z = z;
    prev_r = rz;
  }

  // Far-field limits.
  for (double big : {1e6, 1e9}) {
    record(p.limits, -big, std::abs(scheme.r(-big)), 1e-5);
    record(p.limits, big, std::abs(1.0 - scheme.r(big)), 1e-5);
  }
  return p;
}

}  // namespace fvdwr
