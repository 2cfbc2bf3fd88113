#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "gfs/crit.hpp"

using namespace gfs;

namespace {

const double PI = std::acos(-1.0);
const double W = 1e-3;  // REF blend width

RadialProfile ref() { return RadialProfile::ref(-0.9 * PI, 0.1); }

Ambient plane(int n = 1) {
  Ambient a;
  a.n = n;
  return a;
}

Vec shell_point(const Ambient& amb, double m) {
  Vec w = Vec::Zero(2 * amb.n);
  w[0] = amb.R * std::sqrt(m);
  return w;
}

Vec rotate(const Vec& z, double a) {
  Vec out(z.size());
  for (int i = 0; i + 1 < z.size(); i += 2) {
    out[i] = std::cos(a) * z[i] - std::sin(a) * z[i + 1];
    out[i + 1] = std::sin(a) * z[i] + std::cos(a) * z[i + 1];
  }
  return out;
}

}  // namespace

TEST_CASE("hessian classification") {
  Mat H = Vec((Vec(4) << -2.0, 0.0, 1.0, 3.0).finished()).asDiagonal();
  const Spectrum s = classify_hessian(H);
  CHECK(s.index == 1);
  CHECK(s.nullity == 1);
  CHECK(s.radius == 3.0);
  CHECK(std::abs(s.gap - 1.0 / 3.0) < 1e-15);
  CHECK(classify_hessian(Mat(0, 0)).nullity == 0);
}

TEST_CASE("newton on a non-degenerate quadratic form finds the origin") {
  Mat Q = Mat::Zero(3, 3);
  Q.diagonal() << 1.0, -2.0, -0.5;
  auto G = gf_quadratic(plane(1), Mat::Identity(2, 2), Q);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int s = 0; s < 5; ++s) {
    Vec seed(G->dim());
    for (int i = 0; i < seed.size(); ++i) seed[i] = u(gen);
    const auto m = newton_critical(*G, seed);
    CHECK(m.representative.norm() < 1e-10);
    CHECK(m.index == 2);
    CHECK(m.nullity == 0);
    CHECK(m.kind == ManifoldKind::Isolated);
  }
  CHECK_THROWS_AS(newton_critical(*G, Vec::Zero(2)), InvalidArgument);
}

TEST_CASE("newton reports non-convergence") {
  auto G = gf_quadratic(plane(1), Mat::Identity(2, 2), Mat::Identity(1, 1));
  NewtonOptions opt;
  opt.maxIter = 0;
  CHECK_THROWS_AS(newton_critical(*G, Vec::Ones(G->dim()), opt), NoConvergence);
}

TEST_CASE("REF shell of F^#3: value, nullity and index") {
  const Ambient amb = plane(1);
  const auto rho = ref();
  auto F = gf_broken_geodesic(amb, rho);
  auto G = sharp_k(F, 3);
  CHECK(F->quadIndex() == 4);
  const auto m = newton_critical(*G, sharp_seed(*G, shell_point(amb, 2.0 / 3.0)));
  CHECK(std::abs(m.value - 5 * PI / 6) < 1e-6);
  CHECK(std::abs(m.value - (5 * PI / 6 - 3 * PI * W * W / 12)) < 1e-10);
  CHECK(m.nullity == 1);
  CHECK(m.index == 2 + 3 * 4 + 2);
  CHECK(m.kind == ManifoldKind::SphereShell);
  CHECK(m.gradNorm < 1e-9);
  CHECK(m.morseBott);
  // basin: seeds 0.1 off the shell (inside and outside) reach the same manifold
  for (double d : {-0.1, 0.1}) {
    Vec w = shell_point(amb, 2.0 / 3.0);
    w[0] += d;
    const auto p = newton_critical(*G, sharp_seed(*G, w));
    CHECK(std::abs(p.value - m.value) < 1e-9);
    const auto orbit = reconstruct(*F, 3, p.representative);
    CHECK(std::abs(orbit[0].squaredNorm() - 2.0 / 3.0) < 1e-9);
  }
}

TEST_CASE("reconstruct") {
  const Ambient amb = plane(1);
  SUBCASE("identity map gives a constant orbit") {
    auto F = gf_linear_rotation(amb, {0.0});
    Vec c(2);
    c << 0.3, -0.7;
    Vec p(6);
    p << c, c, c;
    CHECK(sharp_k(F, 3)->gradient(p).norm() < 1e-15);
    const auto w = reconstruct(*F, 3, p);
    for (const auto& x : w) CHECK((x - c).norm() < 1e-15);
    CHECK(check_value(*F, 3, p) < 1e-15);
  }
  SUBCASE("REF shell orbit lies on H = 2/3, steps rotate by 2 rho'(m)") {
    const auto rho = ref();
    auto F = gf_broken_geodesic(amb, rho);
    auto G = sharp_k(F, 3);
    const auto m = newton_critical(*G, sharp_seed(*G, rotate(shell_point(amb, 2.0 / 3.0), 0.4)));
    const auto w = reconstruct(*F, 3, m.representative);
    REQUIRE(w.size() == 3);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(w[j].squaredNorm() - 2.0 / 3.0) < 1e-9);
      CHECK((rotate(w[j], -2 * PI / 3) - w[(j + 1) % 3]).norm() < 1e-9);
    }
    // cyclic shift of the critical point: phi-shifted orbit
    const Vec ps = cyclic_shift_sharp(*G, m.representative);
    CHECK(G->gradient(ps).norm() < 1e-9);
    const auto ws = reconstruct(*F, 3, ps);
    for (int j = 0; j < 3; ++j) CHECK((ws[j] - w[(j + 1) % 3]).norm() < 1e-9);
  }
  SUBCASE("non-critical input is rejected") {
    const auto rho = ref();
    auto F = gf_broken_geodesic(amb, rho);
    auto G = sharp_k(F, 3);
    Vec p = sharp_seed(*G, shell_point(amb, 0.5));  // fibre-critical, not critical
    CHECK_THROWS_AS(reconstruct(*F, 3, p), OrbitRelationViolated);
    p[p.size() - 1] += 0.3;
    CHECK_THROWS_AS(reconstruct(*F, 3, p), NotFibreCritical);
    CHECK_THROWS_AS(reconstruct(*F, 2, p), EvenK);
  }
}

TEST_CASE("check_value on shell and origin") {
  const Ambient amb = plane(1);
  const auto rho = ref();
  auto F = gf_broken_geodesic(amb, rho);
  auto G = sharp_k(F, 3);
  const auto m = newton_critical(*G, sharp_seed(*G, shell_point(amb, 2.0 / 3.0)));
  CHECK(check_value(*F, 3, m.representative) < 1e-6);
  const auto o = newton_critical(*G, sharp_seed(*G, Vec::Zero(2)));
  CHECK(std::abs(o.value - 3 * rho.rho(0.0)) < 1e-12);
  CHECK(std::abs(o.value - 3 * 0.495 * PI) < 1e-12);
  CHECK(check_value(*F, 3, o.representative) < 1e-12);
  CHECK(o.nullity == 0);
}

TEST_CASE("maslov bookkeeping") {
  CHECK(maslov(16, 3, 4, 1) == 2);
  CHECK(maslov(7, 1, 4, 2) == 3);
  for (int n : {1, 2})
    for (int k : {1, 3, 5})
      for (int l = 1; l < 4; ++l) CHECK(maslov(2 * n * l + k * 4 + n * (k - 1), k, 4, n) == 2 * n * l);
}

TEST_CASE("index theorem on all REF shells") {
  const auto rho = ref();
  for (auto [n, k] : std::vector<std::pair<int, int>>{{1, 3}, {1, 5}, {2, 3}}) {
    CAPTURE(n);
    CAPTURE(k);
    const Ambient amb = plane(n);
    auto F = gf_broken_geodesic(amb, rho);
    const auto data = shells(amb, rho, k);
    const auto found = sharp_scan(amb, rho, F, k);
    REQUIRE(found.size() == data.size());
    for (size_t i = 0; i < data.size(); ++i) {
      const auto& m = found[i];
      CAPTURE(m.l);
      CHECK(m.l == data[i].l);
      CHECK(std::abs(m.value - data[i].value) < 1e-9);
      CHECK(maslov(m.index, k, F->quadIndex(), n) == data[i].index);
      CHECK(m.spectralGap >= 1e-4);
      if (data[i].origin) {
        CHECK(m.nullity == 0);
        CHECK(m.zkOrbit == ZkOrbit::Fixed);
      } else {
        CHECK(m.nullity == 2 * n - 1);
        CHECK(m.zkOrbit == ZkOrbit::Free);
      }
      CHECK(check_value(*F, k, m.representative) < 1e-6);
    }
    auto G = sharp_k(F, k);
    CHECK(zk_equivariant(*G, found, [&](const Vec& v) { return cyclic_shift_sharp(*G, v); }));
  }
}

TEST_CASE("sign calibration") {
  CHECK(calibrate_orientation(plane(1), ref(), 3) == kCalibratedOrientation);
  CHECK(calibrate_orientation(plane(1), ref(), 5) == kCalibratedOrientation);
  CHECK_THROWS_AS(calibrate_orientation(plane(1), RadialProfile::ref(-0.2 * PI, 0.1), 3), DomainError);
}

TEST_CASE("chain scan over P") {
  const Ambient amb = plane(1);
  SUBCASE("identity lift: one family at value 0") {
    auto F = contact_lift_gf(gf_linear_rotation(amb, {0.0}));
    auto P = contact_P(F, 3);
    TranslatedChain ch;
    for (int j = 0; j < 3; ++j) ch.points.push_back(ContactPoint{(Vec(2) << 0.3, 0.1).finished(), 0.0, false});
    const auto fams = chain_scan(*P, *F, 3, {chain_seed(*P, *F, ch)});
    REQUIRE(fams.size() == 1);
    CHECK(std::abs(fams[0].value) < 1e-14);
    CHECK(fams[0].kind == ManifoldKind::ChainFamily);
  }
  SUBCASE("REF, k = 3: families match translated_chains") {
    const auto rho = ref();
    auto f = gf_broken_geodesic(amb, rho);
    auto F = contact_lift_gf(f);
    auto P = contact_P(F, 3);
    const auto chains = translated_chains(amb, rho, 3);
    std::vector<Vec> seeds;
    for (const auto& c : chains) seeds.push_back(chain_seed(*P, *F, c));
    // Z_3-rotated and perturbed copies collapse onto the same classes
    seeds.push_back(cyclic_shift_contact(*P, seeds[0]));
    seeds.push_back(r_action(*P, seeds[0], 0.3));
    const auto fams = chain_scan(*P, *F, 3, seeds, chains);
    REQUIRE(fams.size() == chains.size());
    CHECK(fams.size() == 3);
    int free = 0;
    for (const auto& m : fams) {
      free += m.zkOrbit == ZkOrbit::Free;
      CHECK(!m.linkedOrbitId.empty());
      CHECK(m.gradNorm < 1e-9);
      double rs = 0.0;
      const auto L = contact_layout(*P);
      for (int j = 0; j < 3; ++j) rs += m.representative[L.r(j)];
      CHECK(std::abs(rs) < 1e-10);
      CHECK(std::abs(m.representative[L.theta(0)]) < 1e-10);
    }
    CHECK(free == 2);
    CHECK(fams[0].linkedOrbitId == "shell-1");
    CHECK(std::abs(fams[0].value - 5 * PI / 6) < 1e-6);
    CHECK(std::abs(fams[1].value - 4 * PI / 3) < 1e-6);
    CHECK(fams[2].linkedOrbitId == "origin");
    // nullity: the R and theta gauge directions, plus the circle of chains
    CHECK(fams[0].nullity == 2 + 1);
    CHECK(fams[2].nullity == 2);
    CHECK(zk_equivariant(*P, fams, [&](const Vec& v) { return cyclic_shift_contact(*P, v); }));
  }
  SUBCASE("even k is rejected") {
    auto F = contact_lift_gf(gf_linear_rotation(amb, {0.0}));
    auto P = contact_P(F, 3);
    CHECK_THROWS_AS(chain_scan(*P, *F, 2, {}), EvenK);
  }
}

TEST_CASE("csv export") {
  CriticalManifold m;
  m.kind = ManifoldKind::SphereShell;
  m.l = 1;
  m.value = 2.5;
  m.index = 16;
  m.nullity = 1;
  m.linkedOrbitId = "shell-1";
  m.zkOrbit = ZkOrbit::Free;
  std::ostringstream os;
  export_csv(os, {m}, 3, 4, 1);
  CHECK(os.str() == "kind,l,value,index,nullity,maslov,orbit\nsphereShell,1,2.5,16,1,2,shell-1/free\n");
}
