#include "gfs/sympl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace gfs {

namespace {

constexpr double kPi = 3.14159265358979323846;

double poly_eval(const std::vector<double>& a, double t, int deriv) {
  double s = 0.0;
  for (int j = static_cast<int>(a.size()) - 1; j >= deriv; --j) {
    double coef = a[j];
    for (int d = 0; d < deriv; ++d) coef *= (j - d);
    s = s * t + coef;
  }
  return s;
}

// Antiderivative (zero constant) of a polynomial in local variable t.
std::vector<double> poly_integrate(const std::vector<double>& d) {
  std::vector<double> r(d.size() + 1, 0.0);
  for (size_t j = 0; j < d.size(); ++j) r[j + 1] = d[j] / static_cast<double>(j + 1);
  return r;
}

}  // namespace

void Ambient::validate() const {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("R must be > 0");
  if (orientationSign != 1 && orientationSign != -1)
    throw InvalidArgument("orientationSign must be +1 or -1");
}

double Ambient::area() const { return kPi * R * R; }

RadialProfile::RadialProfile(double c, double delta, std::vector<double> knots,
                             std::vector<std::vector<double>> pieces)
    : c_(c), delta_(delta), knots_(std::move(knots)), pieces_(std::move(pieces)) {
  if (knots_.size() < 2 || pieces_.size() + 1 != knots_.size())
    throw InvalidArgument("profile needs |knots| = |pieces| + 1 >= 2");
  for (size_t i = 1; i < knots_.size(); ++i)
    if (!(knots_[i] > knots_[i - 1])) throw InvalidArgument("knots must increase");
  if (knots_.front() != 0.0) throw InvalidArgument("first knot must be 0");
}

RadialProfile RadialProfile::ref(double c, double delta, double blend) {
  if (!(c < 0.0)) throw InvalidArgument("REF slope c must be negative");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("REF delta must lie in (0,1)");
  const double w = blend;
  if (!(w > 0.0) || delta + w >= 1.0 - w)
    throw InvalidArgument("REF blend width too large for delta");
  const double s = -c / (1.0 - delta);  // slope of rho' on the interior

  std::vector<double> knots{0.0, delta, delta + w, 1.0 - w, 1.0};
  // rho' on each interval in the local variable t = m - knot.
  std::vector<std::vector<double>> d1{
      {c},
      {c, 0.0, 2.0 * s / w, -s / (w * w)},
      {c + s * w, s},
      {-s * w, s, s / w, -s / (w * w)},
  };
  std::vector<std::vector<double>> pieces(d1.size());
  double right = 0.0;  // rho at the right end of the current interval
  for (int i = static_cast<int>(d1.size()) - 1; i >= 0; --i) {
    auto p = poly_integrate(d1[i]);
    const double len = knots[i + 1] - knots[i];
    p[0] = right - poly_eval(p, len, 0);
    right = p[0];
    pieces[i] = std::move(p);
  }
  return RadialProfile(c, delta, std::move(knots), std::move(pieces));
}

RadialProfile RadialProfile::linear(double slope) {
  return RadialProfile(slope, 0.5, {0.0, std::numeric_limits<double>::infinity()},
                       {{0.0, slope}});
}

RadialProfile RadialProfile::zero() { return RadialProfile(0.0, 0.5, {0.0, 1.0}, {{0.0}}); }

bool RadialProfile::compact() const { return std::isfinite(knots_.back()); }

double RadialProfile::eval(double m, int deriv) const {
  if (m >= knots_.back()) return 0.0;
  if (m < 0.0) m = 0.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), m);
  const size_t i = static_cast<size_t>(std::distance(knots_.begin(), it)) - 1;
  return poly_eval(pieces_[i], m - knots_[i], deriv);
}

double RadialProfile::rho(double m) const { return eval(m, 0); }
double RadialProfile::d1(double m) const { return eval(m, 1); }
double RadialProfile::d2(double m) const { return eval(m, 2); }

std::string RadialProfile::check_invariants(int samples) const {
  std::ostringstream err;
  const double top = compact() ? knots_.back() : 1.0;
  for (int i = 0; i <= samples; ++i) {
    const double m = top * i / samples;
    if (d2(m) < -1e-9) err << "rho'' < 0 at m=" << m << "; ";
    if (rho(m) < -1e-12) err << "rho < 0 at m=" << m << "; ";
    if (m <= delta_ && std::abs(d1(m) - c_) > 1e-12 * std::max(1.0, std::abs(c_)))
      err << "rho' != c at m=" << m << "; ";
  }
  if (compact()) {
    const double e = knots_.back() * (1.0 - 1e-12);
    if (std::abs(rho(e)) > 1e-9 || std::abs(d1(e)) > 1e-9)
      err << "rho not flat at the support edge; ";
    if (rho(knots_.back() + 0.5) != 0.0 || d1(knots_.back() + 0.5) != 0.0)
      err << "rho nonzero outside support; ";
    if (knots_.back() > 1.0) err << "support exceeds [0,1]; ";
  }
  return err.str();
}

nlohmann::ordered_json RadialProfile::to_json() const {
  nlohmann::ordered_json j;
  j["c"] = c_;
  j["delta"] = delta_;
  j["knots"] = knots_;
  j["pieces"] = pieces_;
  return j;
}

RadialProfile RadialProfile::from_json(const nlohmann::json& j) {
  try {
    return RadialProfile(j.at("c").get<double>(), j.at("delta").get<double>(),
                         j.at("knots").get<std::vector<double>>(),
                         j.at("pieces").get<std::vector<std::vector<double>>>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("profile JSON: ") + e.what());
  }
}

double hamiltonian_level(const Ambient& amb, const Vec& z) {
  return z.squaredNorm() / (amb.R * amb.R);
}

Vec flow(const Ambient& amb, const RadialProfile& rho, double t, const Vec& z) {
  const double angle = 2.0 * t * rho.d1(hamiltonian_level(amb, z)) / (amb.R * amb.R);
  if (angle == 0.0) return z;
  const double c = std::cos(angle), s = std::sin(angle);
  Vec out(z.size());
  for (int i = 0; i + 1 < z.size(); i += 2) {
    out[i] = c * z[i] - s * z[i + 1];
    out[i + 1] = s * z[i] + c * z[i + 1];
  }
  return out;
}

double action_density(const RadialProfile& rho, double m) {
  return rho.rho(m) - m * rho.d1(m);
}

double raw_primitive(const Ambient& amb, const RadialProfile& rho, double t,
                     const Vec& z) {
  const double H = hamiltonian_level(amb, z);
  return t * (H * rho.d1(H) - rho.rho(H));
}

std::vector<ShellDatum> shells(const Ambient& amb, const RadialProfile& rho, int k) {
  amb.validate();
  if (k < 1 || k % 2 == 0) throw EvenK("shells need an odd k >= 1, got " + std::to_string(k));
  const double A = amb.area();
  const double lo0 = rho.delta(), hi0 = rho.compact() ? rho.knots().back() : 1.0;
  // rho' must be non-decreasing on [delta, 1].
  {
    double prev = rho.d1(lo0);
    for (int i = 1; i <= 4000; ++i) {
      const double v = rho.d1(lo0 + (hi0 - lo0) * i / 4000.0);
      if (v < prev - 1e-12) throw NonMonotoneProfile("rho' decreases on [delta,1]");
      prev = v;
    }
  }
  std::vector<ShellDatum> out;
  for (int l = 1;; ++l) {
    const double target = -static_cast<double>(l) / k * A;
    if (!(target > rho.d1(0.0))) break;  // l/k < -rho'(0)/(pi R^2)
    double lo = lo0, hi = hi0;
    if (!(rho.d1(lo) < target && rho.d1(hi) > target))
      throw NonMonotoneProfile("cannot bracket rho' = " + std::to_string(target));
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      (rho.d1(mid) < target ? lo : hi) = mid;
    }
    const double m = 0.5 * (lo + hi);
    if (!(rho.d2(m) > 1e-12))
      throw NonMonotoneProfile("rho' flat at the shell level (tie), l=" + std::to_string(l));
    ShellDatum d;
    d.l = l;
    d.m = m;
    d.value = l * m * A + k * rho.rho(m);
    d.index = 2 * amb.n * l;
    d.freeOrbit = std::gcd(l, k) == 1;
    out.push_back(d);
  }
  ShellDatum o;
  o.origin = true;
  o.value = k * rho.rho(0.0);
  o.index = 2 * amb.n * (static_cast<int>(out.size()) + 1);
  o.freeOrbit = k == 1;
  out.push_back(o);
  return out;
}

LiftedMap::LiftedMap(Ambient amb, RadialProfile rho)
    : amb_(std::move(amb)), rho_(std::move(rho)) {
  amb_.validate();
}

double LiftedMap::raw_primitive(const Vec& z) const {
  return gfs::raw_primitive(amb_, rho_, 1.0, z);
}

double LiftedMap::action(const Vec& z) const {
  return -amb_.orientationSign * raw_primitive(z);
}

ContactPoint LiftedMap::apply(const ContactPoint& p) const {
  ContactPoint q;
  q.base = flow(amb_, rho_, 1.0, p.base);
  q.theta = p.theta - raw_primitive(p.base);
  q.circleMode = p.circleMode;
  if (q.circleMode) q.theta -= std::floor(q.theta);
  return q;
}

std::shared_ptr<const LiftedMap> lift_contact(const Ambient& amb, const RadialProfile& rho) {
  return std::make_shared<LiftedMap>(amb, rho);
}

std::vector<TranslatedChain> translated_chains(const Ambient& amb, const RadialProfile& rho,
                                               int k) {
  const auto data = shells(amb, rho, k);
  LiftedMap lift(amb, rho);
  std::vector<TranslatedChain> out;
  for (const auto& d : data) {
    TranslatedChain ch;
    ch.l = d.l;
    ch.freeOrbit = d.freeOrbit;
    ch.orbitId = d.origin ? "origin" : "shell-" + std::to_string(d.l);
    Vec z = Vec::Zero(2 * amb.n);
    z[0] = amb.R * std::sqrt(d.m);
    std::vector<Vec> orbit{z};
    for (int j = 1; j < k; ++j) orbit.push_back(flow(amb, rho, 1.0, orbit.back()));
    double sum = 0.0;
    for (const auto& w : orbit) sum += lift.action(w);
    ch.t = sum / k;
    ch.action = k * ch.t;
    const double traw = -amb.orientationSign * ch.t;
    double theta = 0.0;
    for (int j = 0; j < k; ++j) {
      ch.points.push_back(ContactPoint{orbit[j], theta, false});
      theta = theta - lift.raw_primitive(orbit[j]) + traw;
    }
    out.push_back(std::move(ch));
  }
  return out;
}

bool verify_chain(const ContactMap& map, const TranslatedChain& chain, double tol,
                  std::string* diagnostic) {
  std::ostringstream why;
  const size_t k = chain.points.size();
  bool ok = k > 0;
  if (!ok) why << "empty chain; ";
  double gsum = 0.0;
  const double traw = -map.orientation() * chain.t;
  for (size_t j = 0; j < k; ++j) {
    const auto& p = chain.points[j];
    const auto& next = chain.points[(j + 1) % k];
    gsum += map.conformal(p);
    ContactPoint img = map.apply(p);
    double dtheta = img.theta + traw - next.theta;
    if (p.circleMode || next.circleMode) dtheta -= std::round(dtheta);
    const double dz = (img.base - next.base).lpNorm<Eigen::Infinity>();
    if (dz > tol || std::abs(dtheta) > tol) {
      ok = false;
      why << "p" << (j + 2 > k ? 1 : j + 2) << " != Reeb_t(phi(p" << j + 1
          << ")) (|dz|=" << dz << ", |dtheta|=" << std::abs(dtheta) << "); ";
    }
  }
  if (std::abs(gsum) > tol) {
    ok = false;
    why << "sum of conformal factors = " << gsum << "; ";
  }
  if (diagnostic) *diagnostic = why.str();
  return ok;
}

TranslatedChain rotate_chain(const TranslatedChain& chain) {
  TranslatedChain r = chain;
  if (!r.points.empty()) std::rotate(r.points.begin(), r.points.begin() + 1, r.points.end());
  return r;
}

ContactPoint phi_m(int m, const ContactPoint& p) {
  const double ang = 2.0 * kPi * m * p.theta;
  const double scale = 1.0 / std::sqrt(1.0 + m * kPi * p.base.squaredNorm());
  const double c = std::cos(ang) * scale, s = std::sin(ang) * scale;
  ContactPoint q = p;
  for (int i = 0; i + 1 < p.base.size(); i += 2) {
    q.base[i] = c * p.base[i] - s * p.base[i + 1];
    q.base[i + 1] = s * p.base[i] + c * p.base[i + 1];
  }
  return q;
}

double sqz_radius(int m, double A) {
  if (A < 0.0) throw InvalidArgument("area must be >= 0");
  if (std::isinf(A)) return 1.0 / m;
  return A / (1.0 + m * A);
}

}  // namespace gfs
