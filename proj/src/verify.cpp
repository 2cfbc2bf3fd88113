#include "gfs/verify.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "gfs/crit.hpp"
#include "gfs/equivar.hpp"
#include "gfs/errors.hpp"
#include "gfs/genfun.hpp"
#include "gfs/sympl.hpp"

namespace gfs {

namespace {

constexpr double PI = std::numbers::pi;

RadialProfile ref_profile() { return RadialProfile::ref(-0.9 * PI, 0.1); }

Ambient plane(int n) {
  Ambient a;
  a.n = n;
  return a;
}

Vec random_vec(std::mt19937_64& gen, int d, double a) {
  std::uniform_real_distribution<double> u(-a, a);
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = u(gen);
  return v;
}

Vec shell_point(const Ambient& amb, double m) {
  Vec w = Vec::Zero(2 * amb.n);
  w[0] = amb.R * std::sqrt(m);
  return w;
}

CheckResult bound(std::string name, double residual, double tol, std::string detail = "") {
  return {std::move(name), residual < tol, residual, tol, std::move(detail)};
}

CheckResult exact(std::string name, bool ok, std::string detail = "") {
  return {std::move(name), ok, 0.0, 0.0, std::move(detail)};
}

std::vector<CheckResult> generation_suite(const SuiteOptions& opt) {
  std::vector<CheckResult> out;
  const Ambient amb = plane(1);
  const auto rho = ref_profile();
  out.push_back(exact("broken-geodesic slices K = 5", broken_geodesic_slices(amb, rho) == 5));
  const auto F = gf_broken_geodesic(amb, rho);
  const RadialFlowMap phi(amb, rho, 1.0);
  std::mt19937_64 gen(opt.seed);
  double worst = 0.0;
  int failed = 0;
  for (int s = 0; s < 100; ++s) {
    const Vec w = random_vec(gen, 2, 1.2);
    Vec v(F->dim());
    v << F->base_seed(w), F->fibre_seed(w);
    v.tail(F->fibreDim()) += random_vec(gen, F->fibreDim(), 1e-3);  // re-solve the fibre
    if (!fibre_critical(*F, v)) {
      ++failed;
      continue;
    }
    const GraphPoint ip = i_F(*F, v);
    const GraphPoint gp = graph_of(phi, graph_source(ip.base, ip.covector));
    worst = std::max(worst, std::max((ip.base - gp.base).norm(), (ip.covector - gp.covector).norm()));
  }
  out.push_back(exact("fibre-critical solves converge (100 samples)", failed == 0,
                      std::to_string(failed) + " failures"));
  out.push_back(bound("max |i_F - Gamma_phi| over 100 samples", worst, 1e-8));
  return out;
}

std::vector<CheckResult> values_suite(const SuiteOptions&) {
  std::vector<CheckResult> out;
  const Ambient amb = plane(1);
  const auto rho = ref_profile();
  const auto F = gf_broken_geodesic(amb, rho);
  const auto G = sharp_k(F, 3);
  const auto m = newton_critical(*G, sharp_seed(*G, shell_point(amb, 2.0 / 3.0)));
  out.push_back(bound("F^#3 shell l = 1 value = 5 pi / 6", std::abs(m.value - 5 * PI / 6), 1e-6));
  out.push_back(bound("F^#3 shell value = sum of orbit actions", check_value(*F, 3, m.representative), 1e-6));
  const auto o = newton_critical(*G, sharp_seed(*G, Vec::Zero(2)));
  out.push_back(bound("F^#3 origin value = 3 rho(0)", std::abs(o.value - 3 * rho.rho(0.0)), 1e-9));
  return out;
}

std::vector<CheckResult> index_suite(const SuiteOptions& opt) {
  std::vector<CheckResult> out;
  const auto rho = ref_profile();
  for (auto [n, k] : std::vector<std::pair<int, int>>{{1, 3}, {1, 5}, {2, 3}}) {
    const Ambient amb = plane(n);
    const auto F = gf_broken_geodesic(amb, rho);
    const auto data = shells(amb, rho, k);
    const auto found = sharp_scan(amb, rho, F, k, {}, opt.workers);
    std::ostringstream detail;
    bool ok = found.size() == data.size();
    double minGap = 1.0;
    int checked = 0;
    for (size_t i = 0; ok && i < data.size(); ++i) {
      if (data[i].origin || data[i].l >= k) continue;
      const auto& m = found[i];
      const int nu = maslov(m.index, k, F->quadIndex(), n);
      detail << "l=" << data[i].l << ": index " << m.index << " - " << k * F->quadIndex() + n * (k - 1) << " = "
             << nu << ", nullity " << m.nullity << "; ";
      ok = ok && m.l == data[i].l && nu == 2 * n * data[i].l && m.nullity == 2 * n - 1;
      minGap = std::min(minGap, m.spectralGap);
      ++checked;
    }
    ok = ok && checked > 0 && minGap >= 1e-4;
    detail << "min relative gap " << minGap;
    out.push_back(exact("index - (k iota + n(k-1)) = 2nl, nullity 2n-1 (n=" + std::to_string(n) +
                            ", k=" + std::to_string(k) + ")",
                        ok, detail.str()));
  }
  return out;
}

std::vector<CheckResult> chains_suite(const SuiteOptions&) {
  std::vector<CheckResult> out;
  const Ambient amb = plane(1);
  const auto rho = ref_profile();
  const auto f = gf_broken_geodesic(amb, rho);
  const auto F = contact_lift_gf(f);
  const auto P = contact_P(F, 3);
  const auto lift = lift_contact(amb, rho);
  const auto chains = translated_chains(amb, rho, 3);
  bool chainsOk = true;
  for (const auto& c : chains) chainsOk = chainsOk && verify_chain(*lift, c, 1e-9);
  out.push_back(exact("predicted translated chains verify", chainsOk, std::to_string(chains.size()) + " chains"));
  std::vector<Vec> seeds;
  for (const auto& c : chains) seeds.push_back(chain_seed(*P, *F, c));
  const auto fams = chain_scan(*P, *F, 3, seeds, chains);
  out.push_back(exact("chain_scan family count = predicted", fams.size() == chains.size(),
                      std::to_string(fams.size()) + " vs " + std::to_string(chains.size())));
  int freeFound = 0, freePred = 0;
  for (const auto& m : fams) freeFound += m.zkOrbit == ZkOrbit::Free;
  for (const auto& c : chains) freePred += c.freeOrbit;
  out.push_back(exact("free Z_3 orbit count", freeFound == freePred,
                      std::to_string(freeFound) + " vs " + std::to_string(freePred)));
  double err = 1e300;
  for (const auto& m : fams)
    if (m.linkedOrbitId == "shell-1") err = std::abs(m.value - 5 * PI / 6);
  out.push_back(bound("shell-1 chain action = 5 pi / 6", err, 1e-6));
  bool linked = true;
  for (size_t i = 0; i < fams.size() && i < chains.size(); ++i)
    linked = linked && std::abs(fams[i].value - chains[i].action) < 1e-6;
  out.push_back(exact("family values match chain actions", linked));
  return out;
}

std::vector<CheckResult> invariance_suite(const SuiteOptions& opt) {
  std::vector<CheckResult> out;
  const Ambient amb = plane(1);
  const auto rho = ref_profile();
  const auto f = gf_broken_geodesic(amb, rho);
  std::mt19937_64 gen(opt.seed);
  for (int k : {3, 5}) {
    const auto G = sharp_k(f, k);
    double err = 0.0;
    for (int s = 0; s < 1000; ++s) {
      const Vec v = random_vec(gen, G->dim(), 0.8);
      err = std::max(err, std::abs(G->value(cyclic_shift_sharp(*G, v)) - G->value(v)));
    }
    out.push_back(bound("F^#" + std::to_string(k) + " cyclic invariance (1000 points)", err, 1e-12));
  }
  const auto F = contact_lift_gf(f);
  const auto P = contact_P(F, 3);
  double ek = 0.0, er = 0.0, ez = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const Vec x = random_vec(gen, P->dim(), 0.8);
    const double p = P->value(x);
    ek = std::max(ek, std::abs(P->value(cyclic_shift_contact(*P, x)) - p));
    er = std::max(er, std::abs(P->value(r_action(*P, x, 0.7)) - p));
    ez = std::max(ez, std::abs(P->value(z_action(*P, x)) - p));
  }
  out.push_back(bound("P Z_3 invariance (1000 points)", ek, 1e-12));
  out.push_back(bound("P R-invariance, a = 0.7 (1000 points)", er, 1e-12));
  out.push_back(bound("P Z-invariance (1000 points)", ez, 1e-12));
  return out;
}

std::vector<CheckResult> algebra_suite(const SuiteOptions&) {
  std::vector<CheckResult> out;
  const auto lens = lens_complex(2, 5);
  out.push_back(exact("lens_complex(2,5): d^2 = 0", lens.check().empty()));
  const auto plain = homology_ranks(lens, HomologyMode::Plain);
  out.push_back(exact("lens_complex(2,5) plain ranks (1,0,0,1)",
                      plain == std::map<int, int>{{0, 1}, {1, 0}, {2, 0}, {3, 1}}));
  const auto eq = homology_ranks(lens, HomologyMode::Equivariant);
  out.push_back(exact("lens_complex(2,5) coinvariant ranks (1,1,1,1)",
                      eq == std::map<int, int>{{0, 1}, {1, 1}, {2, 1}, {3, 1}}));
  for (int k : {3, 5}) {
    const auto c = circle_complex(k);
    const bool ok = c.check().empty() && homology_ranks(c, HomologyMode::Plain) == std::map<int, int>{{0, 1}, {1, 1}} &&
                    homology_ranks(c, HomologyMode::Equivariant) == std::map<int, int>{{0, 1}, {1, 1}};
    out.push_back(exact("circle_complex(" + std::to_string(k) + ") plain and coinvariant ranks (1,1)", ok));
    const auto T = GroupRingElem::T(k), N = GroupRingElem::norm(k);
    out.push_back(exact("(T-1)N = 0 and T^k = 1 in F_" + std::to_string(k) + "[T]/(T^k-1)",
                        ((T - GroupRingElem::one(k)) * N).is_zero() && T.pow(k) == GroupRingElem::one(k)));
    const auto forced = forcing_connecting_maps(1, k);
    bool onlyN = forced.size() == static_cast<size_t>(k - 1);
    for (const auto& e : forced) onlyN = onlyN && e == N.scaled(e.coeffs()[0]);
    out.push_back(exact("two-shell vanishing forces the connecting map to be a multiple of N (k=" +
                            std::to_string(k) + ")",
                        onlyN));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"generation", "values", "index", "chains", "invariance", "algebra"};
  return names;
}

bool is_suite(const std::string& name) {
  for (const auto& s : suite_names())
    if (s == name) return true;
  return false;
}

std::vector<CheckResult> run_suite(const std::string& name, const SuiteOptions& opt) {
  if (name == "generation") return generation_suite(opt);
  if (name == "values") return values_suite(opt);
  if (name == "index") return index_suite(opt);
  if (name == "chains") return chains_suite(opt);
  if (name == "invariance") return invariance_suite(opt);
  if (name == "algebra") return algebra_suite(opt);
  throw InvalidArgument("unknown suite '" + name + "'");
}

}  // namespace gfs
