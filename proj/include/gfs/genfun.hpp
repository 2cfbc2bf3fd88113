#pragma once

// Generating functions quadratic at infinity and their compositions.
//
// Twist identification: tau(x, y, X, Y) = ((x+X)/2, (y+Y)/2, Y - y, x - X).
// A generating function F(q, zeta) of phi satisfies, on fibre-critical
// points, dF/dq = covector of Gamma_phi at the point whose midpoint is q.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfs/sympl.hpp"

namespace gfs {

// Symplectomorphism handle with a Liouville primitive S,
// phi^* lambda_0 - lambda_0 = dS.
class SymplecticMap {
 public:
  virtual ~SymplecticMap() = default;
  virtual int dim() const = 0;
  virtual Vec apply(const Vec& z) const = 0;
  virtual Mat jacobian(const Vec& z) const = 0;
  virtual double primitive(const Vec& z) const = 0;
  // Radius outside of which the map is the identity (inf if none).
  virtual double support_radius() const;
};

using MapPtr = std::shared_ptr<const SymplecticMap>;

class IdentityMap : public SymplecticMap {
 public:
  explicit IdentityMap(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  Vec apply(const Vec& z) const override { return z; }
  Mat jacobian(const Vec&) const override { return Mat::Identity(dim_, dim_); }
  double primitive(const Vec&) const override { return 0.0; }
  double support_radius() const override { return 0.0; }

 private:
  int dim_;
};

// Counter-clockwise rotation by alpha_j in each (x_j, y_j) plane.
class LinearRotationMap : public SymplecticMap {
 public:
  explicit LinearRotationMap(std::vector<double> angles) : angles_(std::move(angles)) {}
  int dim() const override { return 2 * static_cast<int>(angles_.size()); }
  Vec apply(const Vec& z) const override;
  Mat jacobian(const Vec& z) const override;
  double primitive(const Vec&) const override { return 0.0; }

 private:
  std::vector<double> angles_;
};

// Time-t truncated flow of rho o H (see sympl::flow), S = raw_primitive.
class RadialFlowMap : public SymplecticMap {
 public:
  RadialFlowMap(Ambient amb, RadialProfile rho, double t);
  int dim() const override { return 2 * amb_.n; }
  Vec apply(const Vec& z) const override;
  Mat jacobian(const Vec& z) const override;
  double primitive(const Vec& z) const override;
  double support_radius() const override;
  double max_angle() const;  // sup |rotation angle|

 private:
  Ambient amb_;
  RadialProfile rho_;
  double t_;
};

// phi_K o ... o phi_1.
class ComposedMap : public SymplecticMap {
 public:
  explicit ComposedMap(std::vector<MapPtr> factors);
  int dim() const override { return factors_.front()->dim(); }
  Vec apply(const Vec& z) const override;
  Mat jacobian(const Vec& z) const override;
  double primitive(const Vec& z) const override;
  double support_radius() const override;

 private:
  std::vector<MapPtr> factors_;
};

struct GraphPoint {
  Vec base;
  Vec covector;
  double thetaDefect = 0.0;  // contact case only
  double rhoCoord = 0.0;     // contact case only
};

// Symplectic twisted graph: base = midpoint, covector = (phi_y - y, x - phi_x).
GraphPoint graph_of(const SymplecticMap& map, const Vec& z);
// Contact twisted graph, the 7-component formula with e^{g/2} factors;
// base carries (midpoints, theta).
GraphPoint graph_of(const ContactMap& map, const ContactPoint& p);

struct Symmetry {
  int cyclic = 1;        // Z_k acting by cyclic block shifts
  bool rAction = false;  // (x,y) -> e^{a/2}(x,y), r -> r + a
  bool zAction = false;  // theta_j -> theta_j + 1
};

// Quadratic-at-infinity generating function handle.  Values include the
// normalization offset: value = raw - normShift.
class GenFn {
 public:
  virtual ~GenFn() = default;

  int n() const { return n_; }
  int baseDim() const { return baseDim_; }
  int fibreDim() const { return fibreDim_; }
  int dim() const { return baseDim_ + fibreDim_; }
  bool contact() const { return contact_; }

  double value(const Vec& v) const;
  void evaluate(const Vec& v, double& f, Vec* grad, Mat* hess) const;
  Vec gradient(const Vec& v) const;
  Mat hessian(const Vec& v) const;

  const Mat& quadPart() const { return quadPart_; }
  int quadIndex() const { return quadIndex_; }
  double normShift() const { return normShift_; }
  bool normalized() const { return normalized_; }
  const Symmetry& symmetry() const { return symmetry_; }
  // Full quadratic model (all variables) for the far-field test.
  const Mat& quadExt() const { return quadExt_; }
  double farFieldBound() const { return farFieldBound_; }
  // Symplectomorphism generated (symplectic-base handles), may be null.
  const MapPtr& generated() const { return generated_; }

  // Fibre coordinates of the fibre-critical point whose graph point comes
  // from the source point w (symplectic handles only).
  virtual Vec fibre_seed(const Vec& w) const;
  // Base coordinates of the same point: the midpoint of w and phi(w).
  Vec base_seed(const Vec& w) const;

  nlohmann::ordered_json descriptor() const;
  virtual std::string kind() const = 0;

 protected:
  virtual void evaluate_raw(const Vec& v, double& f, Vec* grad, Mat* hess) const = 0;

  int n_ = 1;
  int baseDim_ = 0;
  int fibreDim_ = 0;
  bool contact_ = false;
  Mat quadPart_;
  int quadIndex_ = 0;
  double normShift_ = 0.0;
  bool normalized_ = false;
  Symmetry symmetry_;
  Mat quadExt_;
  double farFieldBound_ = 0.0;
  MapPtr generated_;
};

using GenFnPtr = std::shared_ptr<const GenFn>;

// Negative-eigenvalue count of a symmetric matrix (empty -> 0).
int negative_index(const Mat& Q);

GenFnPtr gf_linear_rotation(const Ambient& amb, const std::vector<double>& angles);
GenFnPtr gf_small_map(const Ambient& amb, MapPtr map);
// Plain quadratic form 1/2 zeta^T Q zeta on a fibre, base of dimension 2n.
GenFnPtr gf_quadratic(const Ambient& amb, const Mat& baseForm, const Mat& fibreForm);
GenFnPtr gf_compose_chain(const std::vector<GenFnPtr>& factors, int K);
GenFnPtr sharp_k(const GenFnPtr& F, int k);
// F(q, zeta) + 1/2 eta^T Q eta.
GenFnPtr stabilize(const GenFnPtr& F, const Mat& Q);

// Number of slices used for the time-t truncated flow: smallest odd K with
// every per-slice rotation angle < pi/2.
int broken_geodesic_slices(const Ambient& amb, const RadialProfile& rho, double t = 1.0);
// Time-t truncated flow as a composition of K small slices.
GenFnPtr gf_broken_geodesic(const Ambient& amb, const RadialProfile& rho, double t = 1.0);

GenFnPtr contact_lift_gf(const GenFnPtr& f);
GenFnPtr reeb_shift(const GenFnPtr& F, double t);
GenFnPtr contact_sharp(const GenFnPtr& F, int k);
GenFnPtr contact_P(const GenFnPtr& F, int k);

// Fibre-critical solve over a fixed base point by Newton in the fibre.
// Returns false if it fails to converge; `v` holds (base, fibre).
bool fibre_critical(const GenFn& F, Vec& v, double tol = 1e-11, int maxIter = 60);

// i_F on a fibre-critical point: (base, d_base F).
GraphPoint i_F(const GenFn& F, const Vec& v);
// Source point of the graph point (base, covector) under tau.
Vec graph_source(const Vec& base, const Vec& covector);

// Symmetry actions on the variable layouts of sharp_k and contact_P.
Vec cyclic_shift_sharp(const GenFn& sharp, const Vec& v);
Vec cyclic_shift_contact(const GenFn& P, const Vec& v);
Vec r_action(const GenFn& P, const Vec& v, double a);
Vec z_action(const GenFn& P, const Vec& v);

// Layout helpers for the contact k-fold functions.
struct ContactLayout {
  int n = 1, k = 1, fibre = 0;  // fibre per factor
  int block() const { return 2 * n + 2; }
  int z(int j) const { return j * block(); }
  int theta(int j) const { return j * block() + 2 * n; }
  int r(int j) const { return j * block() + 2 * n + 1; }
  int zeta(int j) const { return k * block() + j * fibre; }
  int dim() const { return k * (block() + fibre); }
};
ContactLayout contact_layout(const GenFn& P);

}  // namespace gfs
