#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fvdwr {

// Upwind weighting function r: R -> [0,1] and the induced scaling
// K(z) = 1 - [1 - r(z)] z. The exponential choice gives the Bernoulli
// function K(z) = z / (e^z - 1).
class UpwindScheme {
 public:
  enum class Kind : std::uint8_t {
    exponential,
    full_upwind,
    piecewise_linear,
    step,
    samarskij,
    tanh_weight,
    ikeda,
  };

  // Names: exponential, full_upwind, piecewise_linear, step, samarskij,
  // tanh, ikeda. The parameter m applies to piecewise_linear (0 < m <= 8,
  // default 2) and step (0 <= m <= 2, default 1).
  static UpwindScheme by_name(const std::string& name, double m = -1.0);

  double r(double z) const;
  double K(double z) const { return 1.0 - (1.0 - r(z)) * z; }

  // Limit of r at +/- infinity (used when the transmissibility vanishes).
  double r_limit(int sign) const { return sign > 0 ? 1.0 : 0.0; }

  // Derivative of r; piecewise analytic, central difference (step 1e-6) at
  // the kink abscissae.
  double dr(double z) const;

  std::vector<double> kinks() const;

  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }
  double param() const { return m_; }

 private:
  UpwindScheme(std::string name, Kind kind, double m) : name_(std::move(name)), kind_(kind), m_(m) {}
  double r_smooth(double z) const;

  std::string name_;
  Kind kind_;
  double m_ = 0.0;
};

// Machine check of the weighting-function properties on a dense sample grid
// plus randomized and kink-adjacent probes.
struct SchemeProperties {
  struct Check {
    std::string name;
    bool pass = true;
    double witness_z = 0.0;   // location of the worst violation
    double violation = 0.0;   // magnitude of the worst violation
  };
  Check monotone;        // r nondecreasing
  Check limits;          // r -> 0 / 1 at -/+ infinity
  Check m_matrix;        // 1 + z r(z) >= 0
  Check symmetry;        // [1 - r(z) - r(-z)] z = 0
  Check positive_form;   // [r(z) - 1/2] z >= 0
  Check lipschitz;       // z r(z) Lipschitz (difference quotients bounded)
  Check range;           // 0 <= r <= 1
  Check scaling_nonneg;  // K(z) >= 0
  Check reciprocity;     // 1 + z r(z) = K(-z), consequence of symmetry

  bool all_core_pass() const {
    return monotone.pass && limits.pass && m_matrix.pass && symmetry.pass && positive_form.pass;
  }
  std::vector<const Check*> checks() const {
    return {&monotone, &limits,    &m_matrix,       &symmetry,   &positive_form,
            &lipschitz, &range,    &scaling_nonneg, &reciprocity};
  }
};

SchemeProperties verify_scheme_properties(const UpwindScheme& scheme, unsigned seed = 0);

}  // namespace fvdwr
