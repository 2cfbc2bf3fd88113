#pragma once

// Critical points of F^#k and P_F^(k): Newton solvers, Hessian
// classification, orbit reconstruction, action checks and the
// chain-family scan.

#include <iosfwd>
#include <string>
#include <vector>

#include "gfs/genfun.hpp"
#include "gfs/sympl.hpp"

namespace gfs {

enum class ManifoldKind { Isolated, SphereShell, ChainFamily };
enum class ZkOrbit { Free, Fixed };

std::string to_string(ManifoldKind k);
std::string to_string(ZkOrbit o);

struct CriticalManifold {
  ManifoldKind kind = ManifoldKind::Isolated;
  Vec representative;
  double value = 0.0;  // calibrated: orientationSign * raw value
  int index = 0;       // negative eigenvalues of the Hessian
  int nullity = 0;     // eigenvalues within the zero threshold
  ZkOrbit zkOrbit = ZkOrbit::Fixed;
  std::string linkedOrbitId;
  int l = 0;                // shell label (0 = origin / unknown)
  double gradNorm = 0.0;
  double spectralGap = 0.0;  // smallest non-null |eigenvalue| / spectral radius
  bool morseBott = false;    // gap above the Morse-Bott threshold
  int iterations = 0;
};

struct Spectrum {
  int index = 0;
  int nullity = 0;
  double radius = 0.0;
  double gap = 0.0;  // relative gap between the null cluster and the rest
};

struct NewtonOptions {
  double tol = 1e-11;        // on |grad| relative to max(1, |v|)
  int maxIter = 100;
  double zeroRel = 1e-8;     // eigenvalue zero threshold (x spectral radius)
  double gapRel = 1e-4;      // Morse-Bott spectral gap threshold
  double trustRadius = 1.0;  // initial trust radius
  bool reduceFibre = true;   // base Newton on the fibre-reduced function first
};

Spectrum classify_hessian(const Mat& H, double zeroRel = 1e-8);

// Damped Newton with a trust region on grad G; the step uses the spectral
// pseudo-inverse so that Morse-Bott manifolds are approached transversally.
// Throws NoConvergence.
CriticalManifold newton_critical(const GenFn& G, const Vec& seed,
                                 const NewtonOptions& opt = {});

// Periodic orbit (w_1, ..., w_k) of the map generated by F from a critical
// point p of sharp_k(F, k).  Throws NotFibreCritical / OrbitRelationViolated.
std::vector<Vec> reconstruct(const GenFn& F, int k, const Vec& p, double tol = 1e-8);

// |eps F^#k(p) - sum_j A(w_j)|, A = eps * (-S) the point action.
double check_value(const GenFn& F, int k, const Vec& p, int orientationSign = kCalibratedOrientation);

// nu = index - k iota - n (k - 1).
int maslov(int indexOfHessian, int k, int iota, int n);

// Seed of sharp_k(F, k) whose fibre-critical point comes from the orbit
// of w: z_j = phi^{j-1}(w), fibres seeded per factor.
Vec sharp_seed(const GenFn& sharp, const Vec& w);

// Z_k orbit type of a point under the cyclic shift `shift`.
ZkOrbit zk_orbit_type(const Vec& v, int k, const std::function<Vec(const Vec&)>& shift,
                      double tol = 1e-8);

// Newton from the analytic shell/origin seeds of the radial profile, for
// F the time-1 generating function (e.g. gf_broken_geodesic).  Results are
// classified, labelled with their shell and deduplicated.
std::vector<CriticalManifold> sharp_scan(const Ambient& amb, const RadialProfile& rho,
                                         const GenFnPtr& F, int k,
                                         const NewtonOptions& opt = {}, int workers = 0);

// Measured sign eps with eps * raw critical value = c_{k,1} on the l = 1
// shell of F^#k; throws DomainError if either sign fails to match.
int calibrate_orientation(const Ambient& amb, const RadialProfile& rho, int k = 3);

// Seed of P = contact_P(F, k) from a translated chain: z_j = chain base
// points, theta_j = -chain theta_j, r_j = 0, fibres seeded per factor.
Vec chain_seed(const GenFn& P, const GenFn& F, const TranslatedChain& chain);

// Bordered Newton on {grad P = 0, sum r_j = 0, theta_1 = 0}; one
// representative per family class (value and level set), with
// linkedOrbitId taken from `chains` by matching level and action.
// Throws NoConvergence, GaugeDegenerate.
std::vector<CriticalManifold> chain_scan(const GenFn& P, const GenFn& F, int k,
                                         const std::vector<Vec>& seeds,
                                         const std::vector<TranslatedChain>& chains = {},
                                         const NewtonOptions& opt = {},
                                         int orientationSign = kCalibratedOrientation);

// Source levels H(w_j) of the factor points of a P critical point
// (F a contact lift, ambient radius R).
std::vector<double> chain_levels(const GenFn& P, const GenFn& F, const Vec& v, double R = 1.0);

// Does the cyclic shift map every manifold onto a found manifold
// (critical and with a matching value)?
bool zk_equivariant(const GenFn& G, const std::vector<CriticalManifold>& found,
                    const std::function<Vec(const Vec&)>& shift, double tol = 1e-8);

// CSV with columns kind,l,value,index,nullity,maslov,orbit.
void export_csv(std::ostream& os, const std::vector<CriticalManifold>& ms, int k, int iota, int n);

}  // namespace gfs
