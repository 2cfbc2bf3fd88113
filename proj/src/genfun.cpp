#include "gfs/genfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gfs {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Interleaved covector (a, b) = (d_y, -d_x) of a displacement d.
Vec twist_covector(const Vec& d) {
  Vec c(d.size());
  for (int i = 0; i + 1 < d.size(); i += 2) {
    c[i] = d[i + 1];
    c[i + 1] = -d[i];
  }
  return c;
}

Mat block_diag(const Mat& A, const Mat& B) {
  Mat M = Mat::Zero(A.rows() + B.rows(), A.cols() + B.cols());
  M.topLeftCorner(A.rows(), A.cols()) = A;
  M.bottomRightCorner(B.rows(), B.cols()) = B;
  return M;
}

// Scatter target of one local argument: global indices with weights.
struct Slot {
  int idx[2];
  double w[2];
  int count;
};

// Adds the local gradient/Hessian of a term to the global arrays.
void scatter(const std::vector<Slot>& slots, const Vec& g, const Mat* H, Vec* G, Mat* HG) {
  const int m = static_cast<int>(slots.size());
  if (G)
    for (int a = 0; a < m; ++a)
      for (int s = 0; s < slots[a].count; ++s) (*G)[slots[a].idx[s]] += slots[a].w[s] * g[a];
  if (HG && H)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const double h = (*H)(a, b);
        if (h == 0.0) continue;
        for (int s = 0; s < slots[a].count; ++s)
          for (int u = 0; u < slots[b].count; ++u)
            (*HG)(slots[a].idx[s], slots[b].idx[u]) += slots[a].w[s] * slots[b].w[u] * h;
      }
}

// Constant Hessian of T = 1/2 sum_j (x_{j+1} y_j - x_j y_{j+1}) with block
// offsets zoff(j), cyclic in j.
Mat twist_matrix(int dim, int n, int K, const std::function<int(int)>& zoff) {
  Mat M = Mat::Zero(dim, dim);
  for (int j = 0; j < K; ++j) {
    const int jn = (j + 1) % K;
    for (int i = 0; i < n; ++i) {
      const int xj = zoff(j) + 2 * i, yj = xj + 1;
      const int xn = zoff(jn) + 2 * i, yn = xn + 1;
      M(xn, yj) += 0.5;
      M(yj, xn) += 0.5;
      M(xj, yn) -= 0.5;
      M(yn, xj) -= 0.5;
    }
  }
  return M;
}

// ---------------------------------------------------------------- handles

class QuadraticGF : public GenFn {
 public:
  QuadraticGF(int n, Mat A, Mat Q, MapPtr map, std::string kind, bool normalized = false)
      : A_(std::move(A)), kind_(std::move(kind)) {
    n_ = n;
    normalized_ = normalized;
    baseDim_ = 2 * n;
    fibreDim_ = static_cast<int>(Q.rows());
    quadPart_ = Q;
    quadIndex_ = negative_index(Q);
    quadExt_ = block_diag(A_, Q);
    generated_ = std::move(map);
  }
  Vec fibre_seed(const Vec&) const override { return Vec::Zero(fibreDim_); }
  std::string kind() const override { return kind_; }

 protected:
  void evaluate_raw(const Vec& v, double& f, Vec* g, Mat* h) const override {
    f = 0.5 * v.dot(quadExt_ * v);
    if (g) *g = quadExt_ * v;
    if (h) *h = quadExt_;
  }

 private:
  Mat A_;
  std::string kind_;
};

class SmallMapGF : public GenFn {
 public:
  SmallMapGF(int n, MapPtr map) {
    n_ = n;
    baseDim_ = 2 * n;
    fibreDim_ = 0;
    quadPart_ = Mat(0, 0);
    quadExt_ = Mat::Zero(2 * n, 2 * n);
    generated_ = std::move(map);
    const double supp = generated_->support_radius();
    farFieldBound_ = std::isfinite(supp) ? 2.0 * supp : std::numeric_limits<double>::infinity();
    if (std::isfinite(supp)) {
      Vec far = Vec::Zero(2 * n);
      far[0] = 2.0 * std::max(supp, 1e-300);
      double f0;
      evaluate_raw(far, f0, nullptr, nullptr);
      normShift_ = f0;
      normalized_ = true;
    }
  }
  Vec fibre_seed(const Vec&) const override { return Vec(0); }
  std::string kind() const override { return "small-map"; }

  Vec solve_midpoint(const Vec& q) const {
    const int d = baseDim_;
    const double scale = std::max(1.0, q.norm());
    Vec z = q;
    Vec r = 0.5 * (z + generated_->apply(z)) - q;
    double rn = r.norm();
    for (int it = 0; it < 50; ++it) {
      if (rn <= 1e-15 * scale) return z;
      Mat J = 0.5 * (Mat::Identity(d, d) + generated_->jacobian(z));
      Vec step = J.partialPivLu().solve(-r);
      double lam = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < 30; ++bt) {
        Vec z2 = z + lam * step;
        Vec r2 = 0.5 * (z2 + generated_->apply(z2)) - q;
        const double rn2 = r2.norm();
        if (rn2 < rn) {
          z = z2;
          r = r2;
          rn = rn2;
          accepted = true;
          break;
        }
        lam *= 0.5;
      }
      if (!accepted) break;
    }
    if (rn <= 1e-12 * scale) return z;
    throw MidpointSolveFailed("residual " + std::to_string(rn) + " after 50 iterations");
  }

 protected:
  void evaluate_raw(const Vec& q, double& f, Vec* g, Mat* h) const override {
    const Vec z = solve_midpoint(q);
    const Vec pz = generated_->apply(z);
    f = -generated_->primitive(z);
    for (int i = 0; i + 1 < z.size(); i += 2) f += 0.5 * (z[i] * pz[i + 1] - z[i + 1] * pz[i]);
    if (g) *g = twist_covector(pz - z);
    if (h) {
      const int d = baseDim_;
      const Mat D = generated_->jacobian(z);
      const Mat I = Mat::Identity(d, d);
      Mat AD(d, d);  // A (D - I)
      const Mat DmI = D - I;
      for (int i = 0; i + 1 < d; i += 2) {
        AD.row(i) = DmI.row(i + 1);
        AD.row(i + 1) = -DmI.row(i);
      }
      Mat Hs = 2.0 * (I + D).transpose().partialPivLu().solve(AD.transpose()).transpose();
      *h = 0.5 * (Hs + Hs.transpose());
    }
  }
};

class ChainGF : public GenFn {
 public:
  ChainGF(std::vector<GenFnPtr> factors, bool sameFactor) : f_(std::move(factors)) {
    K_ = static_cast<int>(f_.size());
    n_ = f_.front()->n();
    const int n2 = 2 * n_;
    for (const auto& F : f_) {
      if (F->contact() || F->baseDim() != n2) throw InvalidArgument("factors must share base 2n");
    }
    zoffs_.resize(K_);
    zetaOff_.resize(K_);
    int off = K_ * n2;
    for (int j = 0; j < K_; ++j) {
      zoffs_[j] = j * n2;
      zetaOff_[j] = off;
      off += f_[j]->fibreDim();
    }
    baseDim_ = n2;
    fibreDim_ = off - n2;
    M_ = twist_matrix(off, n_, K_, [this](int j) { return zoffs_[j]; });

    int iota = 0;
    Mat Q = M_.block(n2, n2, n2 * (K_ - 1), n2 * (K_ - 1));
    quadExt_ = M_;
    bool allMaps = true, allNorm = true;
    std::vector<MapPtr> maps;
    for (int j = 0; j < K_; ++j) {
      iota += f_[j]->quadIndex();
      Q = block_diag(Q, f_[j]->quadPart());
      farFieldBound_ += f_[j]->farFieldBound();
      const auto slots = slots_for(j);
      Vec zero = Vec::Zero(f_[j]->dim());
      const Mat& E = f_[j]->quadExt();
      scatter(slots, zero, &E, nullptr, &quadExt_);
      allMaps = allMaps && f_[j]->generated() != nullptr;
      allNorm = allNorm && f_[j]->normalized();
      maps.push_back(f_[j]->generated());
    }
    quadPart_ = Q;
    quadIndex_ = iota + n_ * (K_ - 1);
    if (allMaps) generated_ = std::make_shared<ComposedMap>(maps);
    if (sameFactor) symmetry_.cyclic = K_;
    if (allNorm && generated_ && std::isfinite(generated_->support_radius())) {
      Vec w = Vec::Zero(n2);
      w[0] = 2.0 * std::max(generated_->support_radius(), 1e-300);
      Vec v(dim());
      v << base_seed(w), fibre_seed(w);
      fibre_critical(*this, v);
      double f0;
      evaluate_raw(v, f0, nullptr, nullptr);
      normShift_ = f0;
      normalized_ = true;
    }
  }

  Vec fibre_seed(const Vec& w) const override {
    const int n2 = 2 * n_;
    std::vector<Vec> s{w};
    for (int j = 0; j < K_; ++j) s.push_back(f_[j]->generated()->apply(s.back()));
    const Vec delta = s.back() - s.front();
    Vec out(fibreDim_);
    for (int j = 1; j < K_; ++j)
      out.segment((j - 1) * n2, n2) = s[j] + ((j % 2 == 0) ? 0.5 : -0.5) * delta;
    for (int j = 0; j < K_; ++j)
      out.segment(zetaOff_[j] - n2, f_[j]->fibreDim()) = f_[j]->fibre_seed(s[j]);
    return out;
  }
  std::string kind() const override { return symmetry_.cyclic > 1 ? "sharp" : "chain"; }

 protected:
  void evaluate_raw(const Vec& v, double& f, Vec* g, Mat* h) const override {
    const int n2 = 2 * n_;
    const int D = dim();
    f = 0.5 * v.dot(M_ * v);
    if (g) *g = M_ * v;
    if (h) *h = M_;
    for (int j = 0; j < K_; ++j) {
      const int jn = (j + 1) % K_;
      const int N = f_[j]->fibreDim();
      Vec arg(n2 + N);
      arg.head(n2) = 0.5 * (v.segment(zoffs_[j], n2) + v.segment(zoffs_[jn], n2));
      arg.tail(N) = v.segment(zetaOff_[j], N);
      double fj;
      Vec gj;
      Mat hj;
      f_[j]->evaluate(arg, fj, g ? &gj : nullptr, h ? &hj : nullptr);
      f += fj;
      if (g || h) scatter(slots_for(j), g ? gj : Vec::Zero(arg.size()), h ? &hj : nullptr, g, h);
    }
    (void)D;
  }

 private:
  std::vector<Slot> slots_for(int j) const {
    const int n2 = 2 * n_;
    const int jn = (j + 1) % K_;
    std::vector<Slot> s;
    for (int i = 0; i < n2; ++i) {
      if (jn == j) s.push_back(Slot{{zoffs_[j] + i, 0}, {1.0, 0.0}, 1});
      else s.push_back(Slot{{zoffs_[j] + i, zoffs_[jn] + i}, {0.5, 0.5}, 2});
    }
    for (int i = 0; i < f_[j]->fibreDim(); ++i) s.push_back(Slot{{zetaOff_[j] + i, 0}, {1.0, 0.0}, 1});
    return s;
  }

  std::vector<GenFnPtr> f_;
  int K_ = 1;
  std::vector<int> zoffs_, zetaOff_;
  Mat M_;
};

class StabilizedGF : public GenFn {
 public:
  StabilizedGF(GenFnPtr F, Mat Q) : F_(std::move(F)), Q_(std::move(Q)) {
    n_ = F_->n();
    baseDim_ = F_->baseDim();
    fibreDim_ = F_->fibreDim() + static_cast<int>(Q_.rows());
    contact_ = F_->contact();
    quadPart_ = block_diag(F_->quadPart(), Q_);
    quadIndex_ = F_->quadIndex() + negative_index(Q_);
    quadExt_ = block_diag(F_->quadExt(), Q_);
    farFieldBound_ = F_->farFieldBound();
    normalized_ = F_->normalized();
    symmetry_ = F_->symmetry();
    generated_ = F_->generated();
  }
  Vec fibre_seed(const Vec& w) const override {
    Vec out = Vec::Zero(fibreDim_);
    out.head(F_->fibreDim()) = F_->fibre_seed(w);
    return out;
  }
  std::string kind() const override { return "stabilized"; }

 protected:
  void evaluate_raw(const Vec& v, double& f, Vec* g, Mat* h) const override {
    const int d = F_->dim(), e = static_cast<int>(Q_.rows());
    Vec gi;
    Mat hi;
    F_->evaluate(v.head(d), f, g ? &gi : nullptr, h ? &hi : nullptr);
    const Vec eta = v.tail(e);
    f += 0.5 * eta.dot(Q_ * eta);
    if (g) {
      g->resize(d + e);
      g->head(d) = gi;
      g->tail(e) = Q_ * eta;
    }
    if (h) *h = block_diag(hi, Q_);
  }

 private:
  GenFnPtr F_;
  Mat Q_;
};

class ContactLiftGF : public GenFn {
 public:
  explicit ContactLiftGF(GenFnPtr f) : f_(std::move(f)) {
    n_ = f_->n();
    baseDim_ = 2 * n_ + 1;
    fibreDim_ = f_->fibreDim();
    contact_ = true;
    quadPart_ = f_->quadPart();
    quadIndex_ = f_->quadIndex();
    normalized_ = true;
    farFieldBound_ = f_->farFieldBound();
    const int n2 = 2 * n_;
    quadExt_ = Mat::Zero(dim(), dim());
    const Mat& E = f_->quadExt();
    quadExt_.topLeftCorner(n2, n2) = E.topLeftCorner(n2, n2);
    quadExt_.bottomRightCorner(fibreDim_, fibreDim_) = E.bottomRightCorner(fibreDim_, fibreDim_);
    quadExt_.block(n2 + 1, 0, fibreDim_, n2) = E.block(n2, 0, fibreDim_, n2);
    quadExt_.block(0, n2 + 1, n2, fibreDim_) = E.block(0, n2, n2, fibreDim_);
    symmetry_.zAction = true;
  }
  std::string kind() const override { return "contact-lift"; }
  Vec fibre_seed(const Vec& w) const override { return f_->fibre_seed(w); }

 protected:
  void evaluate_raw(const Vec& v, double& f, Vec* g, Mat* h) const override {
    const int n2 = 2 * n_, N = fibreDim_;
    Vec a(n2 + N);
    a << v.head(n2), v.tail(N);
    Vec ga;
    Mat ha;
    f_->evaluate(a, f, g ? &ga : nullptr, h ? &ha : nullptr);
    if (g) {
      g->setZero(dim());
      g->head(n2) = ga.head(n2);
      g->tail(N) = ga.tail(N);
    }
    if (h) {
      h->setZero(dim(), dim());
      h->topLeftCorner(n2, n2) = ha.topLeftCorner(n2, n2);
      h->bottomRightCorner(N, N) = ha.bottomRightCorner(N, N);
      h->block(n2 + 1, 0, N, n2) = ha.block(n2, 0, N, n2);
      h->block(0, n2 + 1, n2, N) = ha.block(0, n2, n2, N);
    }
  }

 private:
  GenFnPtr f_;
};

class ReebShiftGF : public GenFn {
 public:
  ReebShiftGF(GenFnPtr F, double t) : F_(std::move(F)), t_(t) {
    n_ = F_->n();
    baseDim_ = F_->baseDim();
    fibreDim_ = F_->fibreDim();
    contact_ = F_->contact();
    quadPart_ = F_->quadPart();
    quadIndex_ = F_->quadIndex();
    quadExt_ = F_->quadExt();
    farFieldBound_ = F_->farFieldBound();
    normalized_ = F_->normalized();
    symmetry_ = F_->symmetry();
    generated_ = F_->generated();
  }
  std::string kind() const override { return "reeb-shift"; }
  Vec fibre_seed(const Vec& w) const override { return F_->fibre_seed(w); }

 protected:
  void evaluate_raw(const Vec& v, double& f, Vec* g, Mat* h) const override {
    F_->evaluate(v, f, g, h);
    f -= t_;
  }

 private:
  GenFnPtr F_;
  double t_;
};

class ContactSharpGF : public GenFn {
 public:
  ContactSharpGF(GenFnPtr F, int k) : F_(std::move(F)) {
    L_.n = F_->n();
    L_.k = k;
    L_.fibre = F_->fibreDim();
    n_ = L_.n;
    baseDim_ = k * L_.block();
    fibreDim_ = k * L_.fibre;
    contact_ = true;
    Mat Q(0, 0);
    for (int j = 0; j < k; ++j) Q = block_diag(Q, F_->quadPart());
    quadPart_ = Q;
    quadIndex_ = k * F_->quadIndex();
    normalized_ = F_->normalized();
    symmetry_.cyclic = k;
    symmetry_.zAction = F_->symmetry().zAction;
    M_ = twist_matrix(L_.dim(), n_, k, [this](int j) { return L_.z(j); });
    quadExt_ = M_;
  }
  std::string kind() const override { return "contact-sharp"; }
  const ContactLayout& layout() const { return L_; }

  void eval_sharp(const Vec& v, double& f, Vec* g, Mat* h) const {
    const int n2 = 2 * n_, k = L_.k, N = L_.fibre, D = L_.dim();
    f = 0.5 * v.dot(M_ * v);
    if (g) *g = M_ * v;
    if (h) *h = M_;
    const int m = 1 + n2 + 1 + N;  // local s = (r, mid, theta', zeta)
    for (int j = 0; j < k; ++j) {
      const int jn = (j + 1) % k;
      const double r = v[L_.r(j)];
      const double er = std::exp(r), emh = std::exp(-0.5 * r);
      const Vec mid = 0.5 * (v.segment(L_.z(j), n2) + v.segment(L_.z(jn), n2));
      Vec a(n2 + 1 + N);
      a.head(n2) = emh * mid;
      a[n2] = v[L_.theta(jn)];
      a.tail(N) = v.segment(L_.zeta(j), N);
      double f0;
      Vec ga;
      Mat ha;
      const bool deriv = g || h;
      F_->evaluate(a, f0, deriv ? &ga : nullptr, h ? &ha : nullptr);
      f += er * f0;
      if (!deriv) continue;
      // Ja: a = (e^{-r/2} mid, theta', zeta) as a function of s.
      Mat Ja = Mat::Zero(a.size(), m);
      Ja.block(0, 0, n2, 1) = -0.5 * a.head(n2);
      Ja.block(0, 1, n2, n2) = emh * Mat::Identity(n2, n2);
      Ja(n2, 1 + n2) = 1.0;
      Ja.block(n2 + 1, 2 + n2, N, N) = Mat::Identity(N, N);
      Vec er_vec = Vec::Zero(m);
      er_vec[0] = 1.0;
      const Vec Jg = Ja.transpose() * ga;
      const Vec gs = er * (f0 * er_vec + Jg);
      Mat hs;
      if (h) {
        hs = Ja.transpose() * ha * Ja;
        hs += f0 * er_vec * er_vec.transpose() + er_vec * Jg.transpose() + Jg * er_vec.transpose();
        for (int i = 0; i < n2; ++i) {
          hs(0, 0) += ga[i] * 0.25 * a[i];
          hs(0, 1 + i) += ga[i] * (-0.5 * emh);
          hs(1 + i, 0) += ga[i] * (-0.5 * emh);
        }
        hs *= er;
      }
      std::vector<Slot> slots;
      slots.push_back(Slot{{L_.r(j), 0}, {1.0, 0.0}, 1});
      for (int i = 0; i < n2; ++i) {
        if (jn == j) slots.push_back(Slot{{L_.z(j) + i, 0}, {1.0, 0.0}, 1});
        else slots.push_back(Slot{{L_.z(j) + i, L_.z(jn) + i}, {0.5, 0.5}, 2});
      }
      slots.push_back(Slot{{L_.theta(jn), 0}, {1.0, 0.0}, 1});
      for (int i = 0; i < N; ++i) slots.push_back(Slot{{L_.zeta(j) + i, 0}, {1.0, 0.0}, 1});
      scatter(slots, gs, h ? &hs : nullptr, g, h);
    }
    // e^{r_{j-1}} (theta_j - theta_{j+1})
    for (int j = 0; j < k; ++j) {
      const int jp = (j + k - 1) % k, jn = (j + 1) % k;
      const double e = std::exp(v[L_.r(jp)]);
      const double dth = v[L_.theta(j)] - v[L_.theta(jn)];
      f += e * dth;
      if (g) {
        (*g)[L_.r(jp)] += e * dth;
        (*g)[L_.theta(j)] += e;
        (*g)[L_.theta(jn)] -= e;
      }
      if (h) {
        const int r = L_.r(jp), t1 = L_.theta(j), t2 = L_.theta(jn);
        (*h)(r, r) += e * dth;
        (*h)(r, t1) += e;
        (*h)(t1, r) += e;
        (*h)(r, t2) -= e;
        (*h)(t2, r) -= e;
      }
    }
    (void)D;
  }

 protected:
  void evaluate_raw(const Vec& v, double& f, Vec* g, Mat* h) const override { eval_sharp(v, f, g, h); }

  GenFnPtr F_;
  ContactLayout L_;
  Mat M_;
};

class ContactPGF : public ContactSharpGF {
 public:
  ContactPGF(GenFnPtr F, int k) : ContactSharpGF(std::move(F), k) {
    symmetry_.rAction = true;
    symmetry_.zAction = true;
  }
  std::string kind() const override { return "contact-P"; }

 protected:
  void evaluate_raw(const Vec& v, double& f, Vec* g, Mat* h) const override {
    const int k = L_.k, D = L_.dim();
    double C;
    Vec gC;
    Mat hC;
    eval_sharp(v, C, (g || h) ? &gC : nullptr, h ? &hC : nullptr);
    double W = 0.0;
    Vec gW = Vec::Zero(D);
    for (int j = 0; j < k; ++j) {
      const double e = std::exp(v[L_.r(j)]);
      W += e;
      gW[L_.r(j)] = e;
    }
    f = k * C / W;
    if (g) *g = k * (gC / W - C * gW / (W * W));
    if (h) {
      Mat Hm = hC / W - (gC * gW.transpose() + gW * gC.transpose()) / (W * W) +
               2.0 * C * gW * gW.transpose() / (W * W * W);
      for (int j = 0; j < k; ++j) Hm(L_.r(j), L_.r(j)) -= C * gW[L_.r(j)] / (W * W);
      *h = k * Hm;
    }
  }
};

}  // namespace

// ---------------------------------------------------------------- maps

double SymplecticMap::support_radius() const { return std::numeric_limits<double>::infinity(); }

Vec LinearRotationMap::apply(const Vec& z) const { return jacobian(z) * z; }

Mat LinearRotationMap::jacobian(const Vec&) const {
  const int d = dim();
  Mat J = Mat::Zero(d, d);
  for (size_t i = 0; i < angles_.size(); ++i) {
    const double c = std::cos(angles_[i]), s = std::sin(angles_[i]);
    const int a = 2 * static_cast<int>(i);
    J(a, a) = c;
    J(a, a + 1) = -s;
    J(a + 1, a) = s;
    J(a + 1, a + 1) = c;
  }
  return J;
}

RadialFlowMap::RadialFlowMap(Ambient amb, RadialProfile rho, double t)
    : amb_(std::move(amb)), rho_(std::move(rho)), t_(t) {}

Vec RadialFlowMap::apply(const Vec& z) const { return flow(amb_, rho_, t_, z); }

Mat RadialFlowMap::jacobian(const Vec& z) const {
  const double R2 = amb_.R * amb_.R;
  const double H = z.squaredNorm() / R2;
  const double th = 2.0 * t_ * rho_.d1(H) / R2;
  const double dth = 2.0 * t_ * rho_.d2(H) / R2;  // d theta / dH
  const int d = dim();
  const double c = std::cos(th), s = std::sin(th);
  Mat J = Mat::Zero(d, d);
  Vec dRz(d);  // d/dtheta of the rotated point
  for (int i = 0; i + 1 < d; i += 2) {
    J(i, i) = c;
    J(i, i + 1) = -s;
    J(i + 1, i) = s;
    J(i + 1, i + 1) = c;
    dRz[i] = -s * z[i] - c * z[i + 1];
    dRz[i + 1] = c * z[i] - s * z[i + 1];
  }
  if (dth != 0.0) J += dRz * (dth * 2.0 / R2 * z).transpose();
  return J;
}

double RadialFlowMap::primitive(const Vec& z) const { return raw_primitive(amb_, rho_, t_, z); }

double RadialFlowMap::support_radius() const {
  if (!rho_.compact()) return std::numeric_limits<double>::infinity();
  return amb_.R * std::sqrt(rho_.knots().back());
}

double RadialFlowMap::max_angle() const {
  double m = std::abs(rho_.d1(0.0));
  const double top = rho_.compact() ? rho_.knots().back() : 1.0;
  for (int i = 0; i <= 2000; ++i) m = std::max(m, std::abs(rho_.d1(top * i / 2000.0)));
  return 2.0 * std::abs(t_) * m / (amb_.R * amb_.R);
}

ComposedMap::ComposedMap(std::vector<MapPtr> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw InvalidArgument("empty composition");
}

Vec ComposedMap::apply(const Vec& z) const {
  Vec w = z;
  for (const auto& f : factors_) w = f->apply(w);
  return w;
}

Mat ComposedMap::jacobian(const Vec& z) const {
  Vec w = z;
  Mat J = Mat::Identity(z.size(), z.size());
  for (const auto& f : factors_) {
    J = f->jacobian(w) * J;
    w = f->apply(w);
  }
  return J;
}

double ComposedMap::primitive(const Vec& z) const {
  Vec w = z;
  double s = 0.0;
  for (const auto& f : factors_) {
    s += f->primitive(w);
    w = f->apply(w);
  }
  return s;
}

double ComposedMap::support_radius() const {
  double r = 0.0;
  for (const auto& f : factors_) r = std::max(r, f->support_radius());
  return r;
}

// ---------------------------------------------------------------- graphs

GraphPoint graph_of(const SymplecticMap& map, const Vec& z) {
  const Vec pz = map.apply(z);
  GraphPoint g;
  g.base = 0.5 * (z + pz);
  g.covector = twist_covector(pz - z);
  return g;
}

GraphPoint graph_of(const ContactMap& map, const ContactPoint& p) {
  ContactPoint q = p;
  q.circleMode = false;
  const double g = map.conformal(q);
  const ContactPoint ph = map.apply(q);
  const double e = std::exp(0.5 * g);
  const int d = static_cast<int>(p.base.size());
  GraphPoint out;
  out.base.resize(d + 1);
  out.covector.resize(d);
  double wedge = 0.0;
  for (int i = 0; i + 1 < d; i += 2) {
    const double x = p.base[i], y = p.base[i + 1], X = ph.base[i], Y = ph.base[i + 1];
    out.base[i] = 0.5 * (e * x + X);
    out.base[i + 1] = 0.5 * (e * y + Y);
    out.covector[i] = Y - e * y;
    out.covector[i + 1] = e * x - X;
    wedge += x * Y - y * X;
  }
  out.base[d] = p.theta;
  out.rhoCoord = std::exp(g) - 1.0;
  out.thetaDefect = ph.theta - p.theta + 0.5 * e * wedge;
  return out;
}

// ---------------------------------------------------------------- GenFn

double GenFn::value(const Vec& v) const {
  double f;
  evaluate(v, f, nullptr, nullptr);
  return f;
}

void GenFn::evaluate(const Vec& v, double& f, Vec* grad, Mat* hess) const {
  if (v.size() != dim()) throw InvalidArgument("GenFn argument has wrong dimension");
  evaluate_raw(v, f, grad, hess);
  f -= normShift_;
}

Vec GenFn::gradient(const Vec& v) const {
  double f;
  Vec g;
  evaluate(v, f, &g, nullptr);
  return g;
}

Mat GenFn::hessian(const Vec& v) const {
  double f;
  Vec g;
  Mat h;
  evaluate(v, f, &g, &h);
  return h;
}

Vec GenFn::fibre_seed(const Vec&) const {
  throw InvalidArgument("fibre_seed not available for " + kind());
}

Vec GenFn::base_seed(const Vec& w) const {
  if (!generated_) throw InvalidArgument("base_seed needs a generated map");
  return 0.5 * (w + generated_->apply(w));
}

nlohmann::ordered_json GenFn::descriptor() const {
  nlohmann::ordered_json j;
  j["kind"] = kind();
  j["n"] = n_;
  j["baseDim"] = baseDim_;
  j["fibreDim"] = fibreDim_;
  j["quadIndex"] = quadIndex_;
  j["normShift"] = normShift_;
  j["normalized"] = normalized_;
  j["symmetry"] = {{"cyclic", symmetry_.cyclic}, {"R", symmetry_.rAction}, {"Z", symmetry_.zAction}};
  return j;
}

int negative_index(const Mat& Q) {
  if (Q.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Q + Q.transpose()));
  const Vec ev = es.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  int c = 0;
  for (int i = 0; i < ev.size(); ++i) c += ev[i] < -tol;
  return c;
}

GenFnPtr gf_linear_rotation(const Ambient& amb, const std::vector<double>& angles) {
  amb.validate();
  if (static_cast<int>(angles.size()) != amb.n) throw InvalidArgument("need one angle per plane");
  Mat A = Mat::Zero(2 * amb.n, 2 * amb.n);
  for (int i = 0; i < amb.n; ++i) {
    if (!(std::abs(angles[i]) < kPi)) throw AngleOutOfRange("|alpha| must be < pi");
    A(2 * i, 2 * i) = A(2 * i + 1, 2 * i + 1) = 2.0 * std::tan(0.5 * angles[i]);
  }
  // Only the identity is compactly supported; its F == 0 is normalized.
  const bool identity = A.isZero(0.0);
  return std::make_shared<QuadraticGF>(amb.n, A, Mat(0, 0), std::make_shared<LinearRotationMap>(angles),
                                       "linear-rotation", identity);
}

GenFnPtr gf_small_map(const Ambient& amb, MapPtr map) {
  amb.validate();
  if (!map || map->dim() != 2 * amb.n) throw InvalidArgument("map dimension must be 2n");
  return std::make_shared<SmallMapGF>(amb.n, std::move(map));
}

GenFnPtr gf_quadratic(const Ambient& amb, const Mat& baseForm, const Mat& fibreForm) {
  return std::make_shared<QuadraticGF>(amb.n, baseForm, fibreForm, nullptr, "quadratic");
}

GenFnPtr gf_compose_chain(const std::vector<GenFnPtr>& factors, int K) {
  if (K < 1 || K % 2 == 0) throw EvenFactorCount("composition needs an odd factor count, got " + std::to_string(K));
  if (static_cast<int>(factors.size()) != K) throw InvalidArgument("factor count != K");
  if (K == 1) return factors.front();
  bool same = true;
  for (const auto& f : factors) same = same && f == factors.front();
  return std::make_shared<ChainGF>(factors, same);
}

GenFnPtr sharp_k(const GenFnPtr& F, int k) {
  if (k < 1 || k % 2 == 0) throw EvenK("sharp_k needs odd k, got " + std::to_string(k));
  if (F->contact()) throw InvalidArgument("sharp_k needs a symplectic-base function");
  if (k == 1) return F;
  return std::make_shared<ChainGF>(std::vector<GenFnPtr>(k, F), true);
}

GenFnPtr stabilize(const GenFnPtr& F, const Mat& Q) { return std::make_shared<StabilizedGF>(F, Q); }

int broken_geodesic_slices(const Ambient& amb, const RadialProfile& rho, double t) {
  const double ang = RadialFlowMap(amb, rho, t).max_angle();
  int K = 1;
  while (!(ang / K < 0.5 * kPi)) K += 2;
  return K;
}

GenFnPtr gf_broken_geodesic(const Ambient& amb, const RadialProfile& rho, double t) {
  const int K = broken_geodesic_slices(amb, rho, t);
  auto slice = gf_small_map(amb, std::make_shared<RadialFlowMap>(amb, rho, t / K));
  if (K == 1) return slice;
  std::vector<GenFnPtr> fs(K, slice);
  return std::make_shared<ChainGF>(fs, false);
}

GenFnPtr contact_lift_gf(const GenFnPtr& f) {
  if (f->contact()) throw InvalidArgument("contact_lift_gf needs a symplectic function");
  if (!f->normalized()) throw NotNormalized("contact lift requires a normalized generating function");
  return std::make_shared<ContactLiftGF>(f);
}

GenFnPtr reeb_shift(const GenFnPtr& F, double t) { return std::make_shared<ReebShiftGF>(F, t); }

GenFnPtr contact_sharp(const GenFnPtr& F, int k) {
  if (k < 1 || k % 2 == 0) throw EvenK("contact_sharp needs odd k, got " + std::to_string(k));
  if (!F->contact()) throw InvalidArgument("contact_sharp needs a contact-base function");
  return std::make_shared<ContactSharpGF>(F, k);
}

GenFnPtr contact_P(const GenFnPtr& F, int k) {
  if (k < 1 || k % 2 == 0) throw EvenK("contact_P needs odd k, got " + std::to_string(k));
  if (!F->contact()) throw InvalidArgument("contact_P needs a contact-base function");
  return std::make_shared<ContactPGF>(F, k);
}

bool fibre_critical(const GenFn& F, Vec& v, double tol, int maxIter) {
  const int b = F.baseDim(), N = F.fibreDim();
  if (N == 0) return true;
  auto fibre_grad = [&](const Vec& x, Mat* H) {
    double f;
    Vec g;
    Mat h;
    F.evaluate(x, f, &g, H ? &h : nullptr);
    if (H) *H = h.bottomRightCorner(N, N);
    return Vec(g.tail(N));
  };
  Mat H;
  Vec g = fibre_grad(v, &H);
  double gn = g.norm();
  for (int it = 0; it < maxIter; ++it) {
    if (gn <= tol * std::max(1.0, v.norm())) return true;
    Vec step = H.partialPivLu().solve(-g);
    if (!step.allFinite()) step = H.completeOrthogonalDecomposition().solve(-g);
    double lam = 1.0;
    bool ok = false;
    for (int bt = 0; bt < 40; ++bt) {
      Vec x = v;
      x.tail(N) += lam * step;
      Mat H2;
      Vec g2 = fibre_grad(x, &H2);
      if (g2.norm() < gn) {
        v = x;
        g = g2;
        H = H2;
        gn = g.norm();
        ok = true;
        break;
      }
      lam *= 0.5;
    }
    if (!ok) break;
  }
  (void)b;
  return gn <= 10 * tol * std::max(1.0, v.norm());
}

GraphPoint i_F(const GenFn& F, const Vec& v) {
  const Vec g = F.gradient(v);
  GraphPoint p;
  p.base = v.head(F.baseDim());
  p.covector = g.head(F.baseDim());
  return p;
}

Vec graph_source(const Vec& base, const Vec& covector) {
  Vec w(base.size());
  for (int i = 0; i + 1 < base.size(); i += 2) {
    w[i] = base[i] + 0.5 * covector[i + 1];
    w[i + 1] = base[i + 1] - 0.5 * covector[i];
  }
  return w;
}

Vec cyclic_shift_sharp(const GenFn& sharp, const Vec& v) {
  const int k = sharp.symmetry().cyclic, n2 = 2 * sharp.n();
  if (k <= 1) return v;
  const int N = (sharp.fibreDim() - n2 * (k - 1)) / k;
  Vec out(v.size());
  for (int j = 0; j < k; ++j) {
    const int jn = (j + 1) % k;
    out.segment(j * n2, n2) = v.segment(jn * n2, n2);
    out.segment(k * n2 + j * N, N) = v.segment(k * n2 + jn * N, N);
  }
  return out;
}

ContactLayout contact_layout(const GenFn& P) {
  ContactLayout L;
  L.n = P.n();
  L.k = P.symmetry().cyclic;
  L.fibre = P.fibreDim() / L.k;
  return L;
}

Vec cyclic_shift_contact(const GenFn& P, const Vec& v) {
  const ContactLayout L = contact_layout(P);
  Vec out(v.size());
  for (int j = 0; j < L.k; ++j) {
    const int jn = (j + 1) % L.k;
    out.segment(L.z(j), L.block()) = v.segment(L.z(jn), L.block());
    out.segment(L.zeta(j), L.fibre) = v.segment(L.zeta(jn), L.fibre);
  }
  return out;
}

Vec r_action(const GenFn& P, const Vec& v, double a) {
  const ContactLayout L = contact_layout(P);
  Vec out = v;
  const double s = std::exp(0.5 * a);
  for (int j = 0; j < L.k; ++j) {
    out.segment(L.z(j), 2 * L.n) *= s;
    out[L.r(j)] += a;
  }
  return out;
}

Vec z_action(const GenFn& P, const Vec& v) {
  const ContactLayout L = contact_layout(P);
  Vec out = v;
  for (int j = 0; j < L.k; ++j) out[L.theta(j)] += 1.0;
  return out;
}

}  // namespace gfs
