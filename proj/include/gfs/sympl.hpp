#pragma once

// Ambient conventions on R^2n and R^2n x S^1, radial truncated flows,
// their action primitives, contact lifts and translated k-chains.
//
// Coordinates are interleaved (x_1, y_1, ..., x_n, y_n).
//   omega_0 = sum dx_j ^ dy_j,  lambda_0 = 1/2 sum (x_j dy_j - y_j dx_j),
//   alpha_0 = dtheta + lambda_0,  Reeb flow = translation in theta.

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfs/errors.hpp"

namespace gfs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Sign relating raw generating-function values to reported actions:
// value = orientationSign * raw.  Point actions and chain shifts are
// reported as -orientationSign * (raw Liouville primitive), which is the
// sign under which critical values of F^#k and P equal k t.
// Obtained from calibrate_orientation(); see crit.hpp.
constexpr int kCalibratedOrientation = 1;

struct Ambient {
  int n = 1;
  double R = 1.0;
  int orientationSign = kCalibratedOrientation;

  void validate() const;
  double area() const;  // pi R^2
};

// Piecewise polynomial rho on [0, knots.back()); pieces[i] holds the
// coefficients of rho in powers of (m - knots[i]).  rho vanishes beyond the
// last knot unless the last knot is +inf.
class RadialProfile {
 public:
  RadialProfile() = default;
  RadialProfile(double c, double delta, std::vector<double> knots,
                std::vector<std::vector<double>> pieces);

  // Reference family: rho' = c on [0, delta], linear to 0 at m = 1, both
  // corners C^1-blended by cubics of width `blend`; rho by exact integration.
  static RadialProfile ref(double c, double delta, double blend = 1e-3);
  // rho(m) = slope * m on [0, inf) (not compactly supported).
  static RadialProfile linear(double slope);
  // rho == 0.
  static RadialProfile zero();

  double rho(double m) const;
  double d1(double m) const;
  double d2(double m) const;

  double c() const { return c_; }
  double delta() const { return delta_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<std::vector<double>>& pieces() const { return pieces_; }
  bool compact() const;

  // Empty string when the profile invariants hold on `samples` points.
  std::string check_invariants(int samples = 2001) const;

  nlohmann::ordered_json to_json() const;
  static RadialProfile from_json(const nlohmann::json& j);

 private:
  double eval(double m, int deriv) const;

  double c_ = 0.0;
  double delta_ = 0.5;
  std::vector<double> knots_;
  std::vector<std::vector<double>> pieces_;
};

double hamiltonian_level(const Ambient& amb, const Vec& z);  // H = |z|^2/R^2

// e^{2 i t rho'(H)/R^2} z per complex coordinate.
Vec flow(const Ambient& amb, const RadialProfile& rho, double t, const Vec& z);

// a(m) = rho(m) - m rho'(m).
double action_density(const RadialProfile& rho, double m);

// Raw primitive of the time-t flow: phi^* lambda_0 - lambda_0 = dS_raw,
// S_raw = t (H rho'(H) - rho(H)).
double raw_primitive(const Ambient& amb, const RadialProfile& rho, double t,
                     const Vec& z);

struct ShellDatum {
  int l = 0;           // 0 for the origin datum
  double m = 0.0;      // level H
  double value = 0.0;  // c_{k,l} = l m pi R^2 + k rho(m), or k rho(0)
  int index = 0;       // Maslov index 2nl (origin: 2n(L+1))
  bool origin = false;
  bool freeOrbit = true;  // gcd(l, k) == 1
};

// Shells l = 1..L (bisection, tol 1e-12) followed by the origin datum.
std::vector<ShellDatum> shells(const Ambient& amb, const RadialProfile& rho,
                               int k);

struct ContactPoint {
  Vec base;
  double theta = 0.0;
  bool circleMode = false;
};

// Contact map with conformal factor g (phi^* alpha_0 = e^g alpha_0).
class ContactMap {
 public:
  virtual ~ContactMap() = default;
  virtual ContactPoint apply(const ContactPoint& p) const = 0;
  virtual double conformal(const ContactPoint& p) const = 0;
  // Calibrated action density of a point (-orientationSign * raw primitive).
  virtual double action(const Vec& z) const = 0;
  virtual int orientation() const = 0;
};

// (z, theta) -> (phi(z), theta - S_raw(z)), g == 0, phi the time-1 flow.
class LiftedMap : public ContactMap {
 public:
  LiftedMap(Ambient amb, RadialProfile rho);
  ContactPoint apply(const ContactPoint& p) const override;
  double conformal(const ContactPoint&) const override { return 0.0; }
  double action(const Vec& z) const override;
  int orientation() const override { return amb_.orientationSign; }
  double raw_primitive(const Vec& z) const;
  const Ambient& ambient() const { return amb_; }
  const RadialProfile& profile() const { return rho_; }

 private:
  Ambient amb_;
  RadialProfile rho_;
};

std::shared_ptr<const LiftedMap> lift_contact(const Ambient& amb,
                                              const RadialProfile& rho);

struct TranslatedChain {
  std::vector<ContactPoint> points;
  double t = 0.0;       // calibrated Reeb shift per step
  double action = 0.0;  // k t
  std::string orbitId;
  int l = 0;
  bool freeOrbit = true;
};

std::vector<TranslatedChain> translated_chains(const Ambient& amb,
                                               const RadialProfile& rho, int k);

// Checks p_{j+1} = Reeb_{-eps t} o phi (p_j) cyclically and sum g(p_j) = 0.
bool verify_chain(const ContactMap& map, const TranslatedChain& chain,
                  double tol, std::string* diagnostic = nullptr);

// Cyclic rotation (p_2, ..., p_k, p_1).
TranslatedChain rotate_chain(const TranslatedChain& chain);

ContactPoint phi_m(int m, const ContactPoint& p);
double sqz_radius(int m, double A);

}  // namespace gfs
