#include "gfs/crit.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <thread>

namespace gfs {

namespace {

double rel_scale(const Vec& v) { return std::max(1.0, v.norm()); }

struct Eval {
  double f = 0.0;
  Vec g;
  Mat h;
};

Eval eval_all(const GenFn& G, const Vec& v) {
  Eval e;
  G.evaluate(v, e.f, &e.g, &e.h);
  return e;
}

// Spectral pseudo-inverse solve, discarding |lambda| <= zeroRel * radius.
Vec pinv_step(const Mat& H, const Vec& rhs, double zeroRel) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
  const Vec& lam = es.eigenvalues();
  const Mat& U = es.eigenvectors();
  const double radius = lam.cwiseAbs().maxCoeff();
  const double zt = zeroRel * std::max(radius, 1e-300);
  const Vec c = U.transpose() * rhs;
  Vec y = Vec::Zero(c.size());
  for (int i = 0; i < c.size(); ++i)
    if (std::abs(lam[i]) > zt) y[i] = c[i] / lam[i];
  return U * y;
}

// Generic trust-region Newton on a residual r(v) with Jacobian J(v):
// step = -J^+ r, merit |r|^2.  `solve` returns the step for (J, r).
template <class Residual, class Solve>
bool residual_newton(Vec& v, const Residual& residual, const Solve& solve, const NewtonOptions& opt,
                     int& iterations, double& rnorm) {
  Vec r;
  Mat J;
  residual(v, r, &J);
  rnorm = r.norm();
  double radius = opt.trustRadius * rel_scale(v);
  for (iterations = 0; iterations < opt.maxIter; ++iterations) {
    if (rnorm <= opt.tol * rel_scale(v)) return true;
    Vec step = solve(J, r);
    if (!step.allFinite()) step = -J.transpose() * r;
    bool accepted = false;
    for (int shrink = 0; shrink < 40 && !accepted; ++shrink) {
      Vec s = step;
      const double sn = s.norm();
      if (sn > radius) s *= radius / sn;
      Vec v2 = v + s;
      Vec r2;
      Mat J2;
      residual(v2, r2, &J2);
      const double rn2 = r2.allFinite() ? r2.norm() : std::numeric_limits<double>::infinity();
      if (rn2 < rnorm) {
        if (sn <= radius && rn2 < 0.5 * rnorm) radius = std::max(radius, 2.0 * sn);
        v = v2;
        r = r2;
        J = J2;
        rnorm = rn2;
        accepted = true;
      } else {
        radius = 0.25 * std::min(radius, sn);
      }
    }
    if (!accepted) {
      // Steepest descent on the merit as a last resort.
      const Vec d = -J.transpose() * r;
      double lam = 1.0 / std::max(1.0, d.norm());
      for (int bt = 0; bt < 60 && !accepted; ++bt, lam *= 0.5) {
        Vec v2 = v + lam * d;
        Vec r2;
        Mat J2;
        residual(v2, r2, &J2);
        if (r2.allFinite() && r2.norm() < rnorm) {
          v = v2;
          r = r2;
          J = J2;
          rnorm = r2.norm();
          accepted = true;
          radius = opt.trustRadius * rel_scale(v);
        }
      }
      if (!accepted) return rnorm <= opt.tol * rel_scale(v);
    }
  }
  return rnorm <= opt.tol * rel_scale(v);
}

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(i) for i in [0, count) on up to `workers` threads.
template <class T, class Fn>
std::vector<T> parallel_map(int count, int workers, const Fn& fn) {
  std::vector<T> out(count);
  std::vector<std::exception_ptr> errs(count);
  const int w = std::max(1, std::min(resolve_workers(workers), count));
  std::vector<std::thread> pool;
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += w) {
        try {
          out[i] = fn(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

void fill_spectrum(CriticalManifold& m, const Mat& H, const NewtonOptions& opt) {
  const Spectrum s = classify_hessian(H, opt.zeroRel);
  m.index = s.index;
  m.nullity = s.nullity;
  m.spectralGap = s.gap;
  m.morseBott = s.gap > opt.gapRel;
}

// Twist part of F^#k: 1/2 sum_j (x_{j+1} y_j - x_j y_{j+1}).
double twist_value(const std::vector<Vec>& z) {
  const size_t k = z.size();
  double t = 0.0;
  for (size_t j = 0; j < k; ++j) {
    const Vec& a = z[j];
    const Vec& b = z[(j + 1) % k];
    for (int i = 0; i + 1 < a.size(); i += 2) t += 0.5 * (b[i] * a[i + 1] - a[i] * b[i + 1]);
  }
  return t;
}

// Factor arguments (midpoint_j, zeta_j) of a point of sharp_k(F, k).
std::vector<Vec> sharp_args(const GenFn& F, int k, const Vec& p, std::vector<Vec>* zs) {
  const int n2 = F.baseDim(), N = F.fibreDim();
  if (p.size() != k * (n2 + N)) throw InvalidArgument("point does not match sharp_k(F, k)");
  std::vector<Vec> z(k), args(k);
  for (int j = 0; j < k; ++j) z[j] = p.segment(j * n2, n2);
  for (int j = 0; j < k; ++j) {
    Vec a(n2 + N);
    a.head(n2) = 0.5 * (z[j] + z[(j + 1) % k]);
    a.tail(N) = p.segment(k * n2 + j * N, N);
    args[j] = a;
  }
  if (zs) *zs = z;
  return args;
}

// Newton on the base for the fibre-reduced function q -> G(q, zeta(q)),
// the fibre re-solved at every trial point.  Improves basins when the
// full Hessian has small transverse eigenvalues; leaves v at the best
// fibre-critical point found (the full solve then polishes it).
void reduced_newton(const GenFn& G, Vec& v, const NewtonOptions& opt) {
  const int b = G.baseDim(), N = G.fibreDim();
  Vec x = v;
  if (!fibre_critical(G, x)) return;
  Eval e = eval_all(G, x);
  double gn = e.g.head(b).norm();
  double radius = 0.25 * opt.trustRadius * rel_scale(x.head(b));
  for (int it = 0; it < opt.maxIter && gn > opt.tol * rel_scale(x); ++it) {
    const Mat Hff = e.h.bottomRightCorner(N, N);
    const Mat Hfb = e.h.bottomLeftCorner(N, b);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(Hff);
    const Mat X = cod.solve(Hfb);  // dzeta/dq = -X
    const Mat S = e.h.topLeftCorner(b, b) - e.h.topRightCorner(b, N) * X;
    const Vec step = -pinv_step(S, e.g.head(b), opt.zeroRel);
    bool accepted = false;
    for (int shrink = 0; shrink < 30 && !accepted; ++shrink) {
      Vec s = step;
      const double sn = s.norm();
      if (sn > radius) s *= radius / sn;
      Vec y = x;
      y.head(b) += s;
      y.tail(N) -= X * s;
      if (fibre_critical(G, y)) {
        Eval e2 = eval_all(G, y);
        const double g2 = e2.g.head(b).norm();
        if (g2 < gn) {
          if (g2 < 0.5 * gn) radius = std::max(radius, 2.0 * sn);
          x = y;
          e = std::move(e2);
          gn = g2;
          accepted = true;
          continue;
        }
      }
      radius = 0.25 * std::min(radius, sn);
    }
    if (!accepted) break;
  }
  v = x;
}

}  // namespace

std::string to_string(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::Isolated: return "isolated";
    case ManifoldKind::SphereShell: return "sphereShell";
    case ManifoldKind::ChainFamily: return "chainFamily";
  }
  return "?";
}

std::string to_string(ZkOrbit o) { return o == ZkOrbit::Free ? "free" : "fixed"; }

Spectrum classify_hessian(const Mat& H, double zeroRel) {
  Spectrum s;
  if (H.rows() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
  const Vec lam = es.eigenvalues();
  s.radius = lam.cwiseAbs().maxCoeff();
  const double zt = zeroRel * s.radius;
  double maxNull = 0.0, minRest = s.radius;
  for (int i = 0; i < lam.size(); ++i) {
    const double a = std::abs(lam[i]);
    if (a <= zt) {
      ++s.nullity;
      maxNull = std::max(maxNull, a);
    } else {
      minRest = std::min(minRest, a);
      if (lam[i] < 0) ++s.index;
    }
  }
  s.gap = s.radius > 0 ? (minRest - maxNull) / s.radius : 0.0;
  return s;
}

CriticalManifold newton_critical(const GenFn& G, const Vec& seed, const NewtonOptions& opt) {
  if (seed.size() != G.dim() || !seed.allFinite()) throw InvalidArgument("seed must be finite with dim G");
  Vec v = seed;
  if (opt.reduceFibre && G.fibreDim() > 0) reduced_newton(G, v, opt);
  auto residual = [&](const Vec& x, Vec& r, Mat* J) {
    double f;
    G.evaluate(x, f, &r, J);
  };
  auto solve = [&](const Mat& J, const Vec& r) { return Vec(-pinv_step(J, r, opt.zeroRel)); };
  int iters = 0;
  double rn = 0.0;
  if (!residual_newton(v, residual, solve, opt, iters, rn))
    throw NoConvergence("newton_critical: |grad| = " + std::to_string(rn) + " after " +
                        std::to_string(iters) + " iterations");
  const Eval e = eval_all(G, v);
  CriticalManifold m;
  m.representative = v;
  m.value = e.f;
  m.gradNorm = e.g.norm();
  m.iterations = iters;
  fill_spectrum(m, e.h, opt);
  m.kind = m.nullity == 0 ? ManifoldKind::Isolated : ManifoldKind::SphereShell;
  return m;
}

std::vector<Vec> reconstruct(const GenFn& F, int k, const Vec& p, double tol) {
  if (k < 1 || k % 2 == 0) throw EvenK("reconstruct needs odd k");
  if (F.contact()) throw InvalidArgument("reconstruct needs a symplectic-base generating function");
  if (!F.generated()) throw InvalidArgument("reconstruct needs the generated map");
  std::vector<Vec> z;
  const auto args = sharp_args(F, k, p, &z);
  const int n2 = F.baseDim();
  std::vector<Vec> w(k);
  for (int j = 0; j < k; ++j) {
    const Vec g = F.gradient(args[j]);
    const double fg = g.tail(F.fibreDim()).norm();
    if (fg > tol * rel_scale(args[j]))
      throw NotFibreCritical("factor " + std::to_string(j + 1) + " fibre gradient " + std::to_string(fg));
    w[j] = graph_source(args[j].head(n2), g.head(n2));
  }
  for (int j = 0; j < k; ++j) {
    const Vec img = F.generated()->apply(w[j]);
    const double d = (img - w[(j + 1) % k]).norm();
    if (d > tol * rel_scale(img))
      throw OrbitRelationViolated("phi(w_" + std::to_string(j + 1) + ") misses w_" +
                                  std::to_string((j + 1) % k + 1) + " by " + std::to_string(d));
  }
  return w;
}

double check_value(const GenFn& F, int k, const Vec& p, int orientationSign) {
  const auto w = reconstruct(F, k, p);
  std::vector<Vec> z;
  const auto args = sharp_args(F, k, p, &z);
  double value = twist_value(z);
  for (const auto& a : args) value += F.value(a);
  double action = 0.0;
  for (const auto& x : w) action -= F.generated()->primitive(x);
  return std::abs(orientationSign * value - orientationSign * action);
}

int maslov(int indexOfHessian, int k, int iota, int n) { return indexOfHessian - k * iota - n * (k - 1); }

Vec sharp_seed(const GenFn& sharp, const Vec& w) {
  Vec v(sharp.dim());
  v << sharp.base_seed(w), sharp.fibre_seed(w);
  return v;
}

ZkOrbit zk_orbit_type(const Vec& v, int k, const std::function<Vec(const Vec&)>& shift, double tol) {
  Vec u = v;
  for (int s = 1; s < k; ++s) {
    u = shift(u);
    if ((u - v).norm() <= tol * rel_scale(v)) return ZkOrbit::Fixed;
  }
  return k == 1 ? ZkOrbit::Fixed : ZkOrbit::Free;
}

std::vector<CriticalManifold> sharp_scan(const Ambient& amb, const RadialProfile& rho, const GenFnPtr& F,
                                         int k, const NewtonOptions& opt, int workers) {
  const auto data = shells(amb, rho, k);
  const GenFnPtr G = sharp_k(F, k);
  auto found = parallel_map<CriticalManifold>(static_cast<int>(data.size()), workers, [&](int i) {
    const auto& d = data[i];
    Vec w = Vec::Zero(2 * amb.n);
    w[0] = amb.R * std::sqrt(d.m);
    CriticalManifold m = newton_critical(*G, sharp_seed(*G, w), opt);
    m.value *= amb.orientationSign;
    m.l = d.l;
    m.linkedOrbitId = d.origin ? "origin" : "shell-" + std::to_string(d.l);
    m.kind = d.origin ? ManifoldKind::Isolated : ManifoldKind::SphereShell;
    m.zkOrbit = zk_orbit_type(m.representative, k, [&](const Vec& x) { return cyclic_shift_sharp(*G, x); });
    return m;
  });
  std::vector<CriticalManifold> out;
  for (auto& m : found) {
    bool dup = false;
    for (const auto& o : out) dup = dup || std::abs(o.value - m.value) < 1e-6;
    if (!dup) out.push_back(std::move(m));
  }
  return out;
}

int calibrate_orientation(const Ambient& amb, const RadialProfile& rho, int k) {
  const auto data = shells(amb, rho, k);
  if (data.size() < 2) throw DomainError("calibration needs an l = 1 shell");
  Ambient raw = amb;
  raw.orientationSign = 1;
  const GenFnPtr F = gf_broken_geodesic(raw, rho);
  const GenFnPtr G = sharp_k(F, k);
  Vec w = Vec::Zero(2 * amb.n);
  w[0] = amb.R * std::sqrt(data.front().m);
  const CriticalManifold m = newton_critical(*G, sharp_seed(*G, w));
  const double c = data.front().value;
  if (std::abs(m.value - c) < 1e-6) return 1;
  if (std::abs(m.value + c) < 1e-6) return -1;
  throw DomainError("calibration failed: raw value " + std::to_string(m.value) + " vs closed form " +
                    std::to_string(c));
}

Vec chain_seed(const GenFn& P, const GenFn& F, const TranslatedChain& chain) {
  const ContactLayout L = contact_layout(P);
  if (static_cast<int>(chain.points.size()) != L.k) throw InvalidArgument("chain length != k");
  Vec v = Vec::Zero(P.dim());
  for (int j = 0; j < L.k; ++j) {
    const auto& p = chain.points[j];
    v.segment(L.z(j), 2 * L.n) = p.base;
    v[L.theta(j)] = -p.theta;
    v.segment(L.zeta(j), L.fibre) = F.fibre_seed(p.base);
  }
  return v;
}

std::vector<double> chain_levels(const GenFn& P, const GenFn& F, const Vec& v, double R) {
  const ContactLayout L = contact_layout(P);
  const int n2 = 2 * L.n;
  std::vector<double> out;
  for (int j = 0; j < L.k; ++j) {
    const int jn = (j + 1) % L.k;
    Vec a(F.dim());
    a.head(n2) = std::exp(-0.5 * v[L.r(j)]) * 0.5 * (v.segment(L.z(j), n2) + v.segment(L.z(jn), n2));
    a[n2] = v[L.theta(jn)];
    a.tail(L.fibre) = v.segment(L.zeta(j), L.fibre);
    const Vec g = F.gradient(a);
    const Vec w = graph_source(a.head(n2), g.head(n2));
    out.push_back(w.squaredNorm() / (R * R));
  }
  return out;
}

std::vector<CriticalManifold> chain_scan(const GenFn& P, const GenFn& F, int k, const std::vector<Vec>& seeds,
                                         const std::vector<TranslatedChain>& chains, const NewtonOptions& opt,
                                         int orientationSign) {
  if (k < 1 || k % 2 == 0) throw EvenK("chain_scan needs odd k");
  const ContactLayout L = contact_layout(P);
  if (L.k != k) throw InvalidArgument("P was built for a different k");
  const int D = P.dim();
  Mat C = Mat::Zero(2, D);
  for (int j = 0; j < k; ++j) C(0, L.r(j)) = 1.0;
  C(1, L.theta(0)) = 1.0;
  const double R = 1.0;  // levels are compared as |w|^2 on both sides
  std::vector<CriticalManifold> out;
  for (const auto& seed : seeds) {
    if (seed.size() != D || !seed.allFinite()) throw InvalidArgument("chain seed has wrong size");
    Vec v = seed;
    // Residual (grad P, C v) with Jacobian [H; C]; the step solves the
    // bordered system [H C^T; C 0] (dv, mu) = -(grad P, C v).
    auto residual = [&](const Vec& x, Vec& r, Mat* J) {
      double f;
      Vec g;
      Mat h;
      P.evaluate(x, f, &g, J ? &h : nullptr);
      r.resize(D + 2);
      r.head(D) = g;
      r.tail(2) = C * x;
      if (J) {
        J->resize(D + 2, D);
        J->topRows(D) = h;
        J->bottomRows(2) = C;
      }
    };
    auto solve = [&](const Mat& J, const Vec& r) {
      Mat B = Mat::Zero(D + 2, D + 2);
      B.topLeftCorner(D, D) = J.topRows(D);
      B.block(0, D, D, 2) = C.transpose();
      B.block(D, 0, 2, D) = C;
      Eigen::CompleteOrthogonalDecomposition<Mat> cod;
      cod.setThreshold(opt.zeroRel);
      cod.compute(B);
      return Vec(cod.solve(-r).head(D));
    };
    int iters = 0;
    double rn = 0.0;
    if (!residual_newton(v, residual, solve, opt, iters, rn))
      throw NoConvergence("chain_scan: residual " + std::to_string(rn) + " after " + std::to_string(iters) +
                          " iterations");
    const Eval e = eval_all(P, v);
    CriticalManifold m;
    m.kind = ManifoldKind::ChainFamily;
    m.representative = v;
    m.value = orientationSign * e.f;
    m.gradNorm = e.g.norm();
    m.iterations = iters;
    fill_spectrum(m, e.h, opt);
    // Gauge transversality: the constraints must cut the null space of
    // the Hessian in full rank.
    {
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (e.h + e.h.transpose()));
      const Vec& lam = es.eigenvalues();
      const double zt = opt.zeroRel * lam.cwiseAbs().maxCoeff();
      std::vector<int> nullIdx;
      for (int i = 0; i < lam.size(); ++i)
        if (std::abs(lam[i]) <= zt) nullIdx.push_back(i);
      Mat N(D, nullIdx.size());
      for (size_t i = 0; i < nullIdx.size(); ++i) N.col(i) = es.eigenvectors().col(nullIdx[i]);
      const int need = std::min<int>(2, static_cast<int>(nullIdx.size()));
      if (need > 0) {
        Eigen::JacobiSVD<Mat> svd(C * N);
        const Vec sv = svd.singularValues();
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i) rank += sv[i] > 1e-8;
        if (rank < need) throw GaugeDegenerate("gauge slice {sum r = 0, theta_1 = 0} is not transversal");
      }
    }
    m.zkOrbit = zk_orbit_type(v, k, [&](const Vec& x) { return cyclic_shift_contact(P, x); });
    const auto levels = chain_levels(P, F, v, R);
    double meanLevel = 0.0;
    for (double h : levels) meanLevel += h / k;
    for (const auto& ch : chains) {
      if (ch.points.empty()) continue;
      const double lev = ch.points.front().base.squaredNorm();
      if (std::abs(ch.action - m.value) < 1e-6 * std::max(1.0, std::abs(ch.action)) &&
          std::abs(lev - meanLevel) < 1e-6) {
        m.linkedOrbitId = ch.orbitId;
        m.l = ch.l;
        break;
      }
    }
    bool dup = false;
    for (const auto& o : out) {
      if (std::abs(o.value - m.value) >= 1e-6) continue;
      const auto ol = chain_levels(P, F, o.representative, R);
      double om = 0.0;
      for (double h : ol) om += h / k;
      dup = dup || std::abs(om - meanLevel) < 1e-6;
    }
    if (!dup) out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  return out;
}

bool zk_equivariant(const GenFn& G, const std::vector<CriticalManifold>& found,
                    const std::function<Vec(const Vec&)>& shift, double tol) {
  for (const auto& m : found) {
    const Vec u = shift(m.representative);
    double f;
    Vec g;
    G.evaluate(u, f, &g, nullptr);
    if (g.norm() > tol * rel_scale(u)) return false;
    bool match = false;
    for (const auto& o : found) {
      const double fo = G.value(o.representative);
      match = match || std::abs(fo - f) <= tol * std::max(1.0, std::abs(f));
    }
    if (!match) return false;
  }
  return true;
}

void export_csv(std::ostream& os, const std::vector<CriticalManifold>& ms, int k, int iota, int n) {
  os << "kind,l,value,index,nullity,maslov,orbit\n";
  os.precision(17);
  for (const auto& m : ms) {
    os << to_string(m.kind) << ',' << m.l << ',' << m.value << ',' << m.index << ',' << m.nullity << ','
       << maslov(m.index, k, iota, n) << ',' << (m.linkedOrbitId.empty() ? "-" : m.linkedOrbitId) << '/'
       << to_string(m.zkOrbit) << '\n';
  }
}

}  // namespace gfs
