// Acceptance binary: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance <id>...    run only the named criteria (e.g. 3 13c)
//
// Exit status is 0 iff every selected criterion passed.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfs/crit.hpp"
#include "gfs/equivar.hpp"
#include "gfs/genfun.hpp"
#include "gfs/squeeze.hpp"
#include "gfs/sympl.hpp"
#include "gfs/verify.hpp"

#ifndef GFS_CLI_PATH
#error "GFS_CLI_PATH must point at the gfs executable"
#endif

using namespace gfs;

namespace {

constexpr double PI = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string measured;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<Outcome()> run;
};

std::string fmt(double x, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

std::string run_cli(const std::string& args, int& code) {
  const std::string cmd = std::string(GFS_CLI_PATH) + " " + args + " 2>/dev/null";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    code = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), got);
  const int status = pclose(p);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

Ambient plane(int n, double R = 1.0) {
  Ambient a;
  a.n = n;
  a.R = R;
  return a;
}

// A property suite passes iff every check in it passes.
Outcome suite(const std::string& name) {
  const auto checks = run_suite(name);
  Outcome o{!checks.empty(), ""};
  std::ostringstream os;
  for (const auto& c : checks) {
    o.pass = o.pass && c.passed;
    os << (c.passed ? "" : "[failed] ") << c.name;
    if (c.tolerance > 0) os << " = " << fmt(c.residual, 3) << " < " << fmt(c.tolerance, 1);
    if (!c.detail.empty() && !c.passed) os << " (" << c.detail << ")";
    os << "; ";
  }
  o.measured = os.str();
  return o;
}

// ---------------------------------------------------------------- 1, 2

Outcome equivariant_limit() {
  int code = 0;
  const auto out = run_cli("barcode --n 1 --R 1 --k 5 --limit --no-files", code);
  if (code != 0) return {false, "gfs exited with " + std::to_string(code)};
  const auto bc = Barcode::from_json(nlohmann::json::parse(out)["barcode"]);
  bool ok = bc.field == 5;
  std::vector<Bar> inRange;
  for (const auto& b : bc.bars)
    if (b.degree >= 2 && b.degree <= 9) inRange.push_back(b);
  std::vector<Bar> expected;
  for (int l = 1; l <= 4; ++l) expected.push_back({2 * l, 0.0, l * PI, 1});
  ok = ok && inRange == expected;
  std::ostringstream os;
  os << "field F_" << bc.field << ", " << inRange.size() << " bars in degrees 2..9:";
  for (const auto& b : inRange) os << " H_" << b.degree << "[" << b.birth << ", " << b.death / PI << "pi) x" << b.rank;
  // The full coinvariant barcode adds exactly the odd lens partners
  // (degree 2l+1, same interval) of the displayed bars.
  const auto full = Barcode::from_json(
      nlohmann::json::parse(run_cli("barcode --n 1 --R 1 --k 5 --limit --all-degrees --no-files", code))["barcode"]);
  std::vector<Bar> odd;
  for (const auto& b : full.bars)
    if (b.degree % 2 == 1) odd.push_back(b);
  std::vector<Bar> partners;
  for (const auto& b : expected) partners.push_back({b.degree + 1, b.birth, b.death, b.rank});
  const bool partnersOk = code == 0 && odd == partners && full.bars.size() == expected.size() + partners.size();
  ok = ok && partnersOk;
  os << "; --all-degrees adds " << odd.size() << " odd lens partners" << (partnersOk ? "" : " [mismatch]");
  return {ok, os.str()};
}

Outcome plain_limit() {
  bool ok = true;
  std::ostringstream os;
  for (int n : {1, 2}) {
    for (double R : {1.0, 0.7}) {
      int code = 0;
      const auto out = run_cli("barcode --n " + std::to_string(n) + " --R " + fmt(R, 17) +
                                   " --k 1 --mode plain --limit --no-files",
                               code);
      if (code != 0) return {false, "gfs exited with " + std::to_string(code)};
      const auto bc = Barcode::from_json(nlohmann::json::parse(out)["barcode"]);
      // Degrees 2n l for l = 1..4 are the displayed groups.
      std::vector<Bar> got;
      for (const auto& b : bc.bars)
        if (b.degree >= 2 * n && b.degree <= 8 * n) got.push_back(b);
      std::vector<Bar> expected;
      const double A = PI * R * R;
      for (int l = 1; l <= 4; ++l) expected.push_back({2 * n * l, (l - 1) * A, l * A, 1});
      bool match = bc.field == 2 && got.size() == expected.size();
      for (size_t i = 0; match && i < got.size(); ++i)
        match = got[i].degree == expected[i].degree && got[i].rank == 1 &&
                got[i].birth == expected[i].birth && got[i].death == expected[i].death;
      ok = ok && match;
      os << "n=" << n << " R=" << R << ": " << (match ? "4/4 bars exact" : "mismatch") << "; ";
    }
  }
  return {ok, os.str()};
}

// ---------------------------------------------------------------- 3

Outcome finite_j() {
  bool ok = true;
  double worst = 0.0;
  int cases = 0;
  std::ostringstream os;
  for (int n : {1, 2}) {
    for (double R : {1.0, 0.8}) {
      const Ambient amb = plane(n, R);
      const double A = PI * R * R;
      for (int k : {3, 5}) {
        std::vector<double> prev(k, -1.0);
        for (int j = 1; j <= 40; ++j) {
          const double c = -5.0 * j * A;
          const auto rho = RadialProfile::ref(c, 0.1);
          // Keep the free shells l < k: cut the window between c_{k,k-1}
          // and the next stratum.
          const auto data = shells(amb, rho, k);
          double hi = std::numeric_limits<double>::infinity();
          double below = -std::numeric_limits<double>::infinity();
          for (const auto& d : data) {
            if (!d.origin && d.l == k - 1) below = d.value;
          }
          for (const auto& d : data)
            if (d.value > below && (d.origin || d.l >= k)) hi = std::min(hi, d.value);
          if (!(below > 0)) {
            ok = false;
            os << "missing shell l=" << k - 1 << " at j=" << j << "; ";
            continue;
          }
          AWindow w;
          w.hi = std::isfinite(hi) ? 0.5 * (below + hi) : std::numeric_limits<double>::infinity();
          const auto bc = barcode(ball_complex(amb, rho, k, w), HomologyMode::Equivariant, w).figure_view(n);
          for (int l = 1; l < k; ++l) {
            double end = -1.0;
            for (const auto& b : bc.bars)
              if (b.degree == 2 * n * l) end = b.death;
            if (end < 0) {
              ok = false;
              os << "no bar in degree " << 2 * n * l << " (k=" << k << ", j=" << j << "); ";
              continue;
            }
            if (end < prev[l]) {
              ok = false;
              os << "non-monotone at n=" << n << " R=" << R << " k=" << k << " l=" << l << " j=" << j << "; ";
            }
            prev[l] = end;
            if (std::abs(c) >= 50.0 * A) {
              const double rel = std::abs(end - l * A) / (l * A);
              worst = std::max(worst, rel);
              ++cases;
              if (rel >= 0.01) ok = false;
            }
          }
        }
      }
    }
  }
  os << cases << " endpoints with |c_j| >= 50 pi R^2 (n in {1,2}, R in {1,0.8}, k in {3,5}, l < k), "
     << "max relative error " << fmt(worst, 4) << " < 0.01; monotone in j over j = 1..40";
  return {ok && cases > 0, os.str()};
}

// ---------------------------------------------------------------- 10

Barcode measured_barcode(const std::vector<CriticalManifold>& ms, int n, int k) {
  std::vector<Stratum> strata;
  for (const auto& m : ms)
    strata.push_back({m.value, m.index, m.kind == ManifoldKind::SphereShell, "l=" + std::to_string(m.l)});
  return barcode(assemble_complex(n, k, strata), HomologyMode::Equivariant);
}

Outcome thom() {
  bool ok = true;
  std::ostringstream os;
  Mat Q = Mat::Zero(2, 2);
  Q(0, 0) = 1.0;
  Q(1, 1) = -1.0;
  const auto rho = RadialProfile::ref(-0.9 * PI, 0.1);
  for (auto [n, k] : std::vector<std::pair<int, int>>{{1, 3}, {1, 5}, {2, 3}}) {
    const Ambient amb = plane(n);
    const auto F = gf_broken_geodesic(amb, rho);
    const auto Fs = stabilize(F, Q);
    const auto base = sharp_scan(amb, rho, F, k);
    const auto stab = sharp_scan(amb, rho, Fs, k);
    const Barcode b0 = measured_barcode(base, n, k);
    const Barcode b1 = measured_barcode(stab, n, k);
    const Barcode pred = thom_shift(b0, 1, k);
    bool same = b1.field == pred.field && b1.bars.size() == pred.bars.size() && !b0.bars.empty();
    double dv = 0.0;
    for (size_t i = 0; same && i < b1.bars.size(); ++i) {
      const auto& x = b1.bars[i];
      const auto& y = pred.bars[i];
      same = x.degree == y.degree && x.rank == y.rank && std::isinf(x.death) == std::isinf(y.death);
      dv = std::max(dv, std::abs(x.birth - y.birth));
      if (std::isfinite(x.death) && std::isfinite(y.death)) dv = std::max(dv, std::abs(x.death - y.death));
    }
    same = same && dv < 1e-9 && Fs->quadIndex() == F->quadIndex() + 1;
    int shift = base.size() == stab.size() && !base.empty() ? stab[0].index - base[0].index : -1;
    for (size_t i = 0; same && i < base.size(); ++i) same = stab[i].index - base[i].index == k;
    ok = ok && same;
    os << "(n,k)=(" << n << "," << k << "): " << b0.bars.size() << " bars, degree shift " << shift
       << ", max endpoint change " << fmt(dv, 2) << (same ? "" : " [mismatch]") << "; ";
  }
  return {ok, os.str()};
}

// ---------------------------------------------------------------- 11

Outcome inclusions() {
  bool ok = true;
  int tested = 0, mismatches = 0;
  const double R1 = 1.0, R2 = 0.8;
  for (int k : {3, 5}) {
    const auto large = limit_complex(1, R1, k);
    const auto small = limit_complex(1, R2, k);
    const auto bl = barcode(large, HomologyMode::Equivariant);
    const auto bs = barcode(small, HomologyMode::Equivariant);
    for (int l = 1; l < k; ++l) {
      const double lo = l * PI * R2 * R2, hi = l * PI * R1 * R1;
      // 20 thresholds: 10 below l pi R2^2, 10 strictly between.
      std::vector<double> grid;
      for (int i = 0; i < 10; ++i) grid.push_back(lo * (i + 0.5) / 10.0);
      for (int i = 0; i < 10; ++i) grid.push_back(lo + (hi - lo) * (i + 0.5) / 10.0);
      for (double a : grid) {
        const int expected = a < lo ? 1 : 0;
        const int chain = inclusion_rank(large, small, 2 * l, a, HomologyMode::Equivariant);
        const int viaBars = inclusion_map(bl, bs, 2 * l, a);
        ++tested;
        if (chain != expected || viaBars != expected) ++mismatches;
      }
    }
  }
  ok = mismatches == 0;
  return {ok, std::to_string(tested) + " (k, l, a) triples over 20-threshold grids (k in {3,5}, R1=1, R2=0.8), " +
                  std::to_string(mismatches) + " mismatches (chain route and barcode route)"};
}

// ---------------------------------------------------------------- 12

Outcome kunneth() {
  bool ok = true;
  std::ostringstream os;
  const auto fig = barcode(limit_complex(1, 1.0, 5), HomologyMode::Equivariant).figure_view(1);
  const auto pre = tensor_circle(fig);
  std::vector<Bar> expected;
  for (int l = 1; l <= 4; ++l) {
    expected.push_back({2 * l, 0.0, l * PI, 1});
    expected.push_back({2 * l + 1, 0.0, l * PI, 1});
  }
  auto sorted = pre.bars;
  std::sort(sorted.begin(), sorted.end(),
            [](const Bar& a, const Bar& b) { return std::tie(a.degree, a.birth) < std::tie(b.degree, b.birth); });
  ok = ok && sorted == expected && pre.field == 5;
  os << "prequantized figure barcode: " << pre.bars.size() << " bars" << (ok ? " in degrees 2l, 2l+1" : " [mismatch]");
  // Every bar of several barcodes is duplicated exactly one degree up.
  std::vector<Barcode> samples{
      barcode(limit_complex(1, 1.0, 5), HomologyMode::Equivariant),
      barcode(limit_complex(2, 0.8, 3), HomologyMode::Equivariant),
      barcode(limit_complex(1, 1.0, 1), HomologyMode::Plain),
      barcode(ball_complex(plane(1), RadialProfile::ref(-0.5 * PI, 0.1), 5), HomologyMode::Equivariant)};
  int dup = 0;
  for (const auto& bc : samples) {
    const auto t = tensor_circle(bc);
    bool good = t.bars.size() == 2 * bc.bars.size() && t.field == bc.field;
    for (const auto& b : bc.bars) {
      Bar up = b;
      up.degree += 1;
      good = good && std::count(t.bars.begin(), t.bars.end(), b) >= 1 &&
             std::count(t.bars.begin(), t.bars.end(), up) >= 1;
    }
    dup += good;
  }
  ok = ok && dup == static_cast<int>(samples.size());
  os << "; duplication exact on " << dup << "/" << samples.size() << " barcodes";
  return {ok, os.str()};
}

// ---------------------------------------------------------------- 13

std::string describe(const SqueezeCertificate& c) {
  std::ostringstream os;
  os << to_string(c.kind);
  if (c.kind == CertKind::IntegerK) os << " K=" << c.K;
  if (c.kind == CertKind::PrimeFraction || c.kind == CertKind::EqualRadii || c.kind == CertKind::Conjugated)
    os << " (k,l)=(" << c.k << "," << c.l << ")";
  if (c.kind == CertKind::Conjugated) os << " m=" << c.m;
  if (c.inner) os << " inner " << describe(*c.inner);
  return os.str();
}

Outcome cert_integer() {
  const auto c = find_obstruction({2.5, 1.7});
  const auto why = validate_certificate(c);
  return {c.kind == CertKind::IntegerK && c.K == 2 && why.empty(),
          "(2.5, 1.7) -> " + describe(c) + (why.empty() ? ", sound" : ", unsound: " + why)};
}

Outcome cert_prime() {
  const auto c = find_obstruction({1.5, 1.2});
  const auto why = validate_certificate(c);
  const auto ev = evidence(c);
  const bool ranksOk = ev.ranks[0] == 1 && ev.ranks[1] == 1 && ev.ranks[2] == 0;
  std::ostringstream os;
  os << "(1.5, 1.2) -> " << describe(c) << (why.empty() ? ", sound" : ", unsound: " + why) << "; evidence ranks ("
     << ev.ranks[0] << "," << ev.ranks[1] << "," << ev.ranks[2] << ") in degree " << ev.degree << " at a = " << ev.a
     << ", contradiction " << (ev.contradiction ? "yes" : "no");
  return {c.kind == CertKind::PrimeFraction && c.k == 5 && c.l == 4 && why.empty() && ranksOk && ev.contradiction,
          os.str()};
}

Outcome cert_near() {
  const auto c = find_obstruction({1.01, 1.0});
  const auto why = validate_certificate(c);
  const bool ok = c.kind == CertKind::PrimeFraction && c.k == 1009 && c.l == 1000 && why.empty();
  return {ok, "(1.01, 1.0) -> " + describe(c) + (why.empty() ? ", sound" : ", unsound: " + why) +
                  "; expected primeFraction (1009,1000)"};
}

Outcome cert_room() {
  SqueezeQuery q{0.45, 0.40};
  q.A3 = 0.5;
  const auto c = find_obstruction(q);
  const auto why = validate_certificate(c);
  return {c.kind == CertKind::Conjugated && why.empty(),
          "(0.45, 0.40, 0.5) -> " + describe(c) + (why.empty() ? ", sound" : ", unsound: " + why)};
}

std::vector<Criterion> criteria() {
  return {
      {"1", "Equivariant limit barcode, k=5", equivariant_limit},
      {"2", "Plain limit barcode, k=1", plain_limit},
      {"3", "Finite-j convergence of bar endpoints", finite_j},
      {"4", "Generation test, REF(-0.9pi, 0.1), K=5", [] { return suite("generation"); }},
      {"5", "Critical-value theorem, F^#3 l=1 shell", [] { return suite("values"); }},
      {"6", "Index theorem", [] { return suite("index"); }},
      {"7", "Translated chains, k=3", [] { return suite("chains"); }},
      {"8", "Symmetry invariance", [] { return suite("invariance"); }},
      {"9", "Exact algebra", [] { return suite("algebra"); }},
      {"10", "Stabilization shifts degrees by k", thom},
      {"11", "Inclusion maps over threshold grids", inclusions},
      {"12", "Kunneth with the circle", kunneth},
      {"13a", "Certificate (2.5, 1.7) -> integer K=2", cert_integer},
      {"13b", "Certificate (1.5, 1.2) -> (5,4) with evidence", cert_prime},
      {"13c", "Certificate (1.01, 1.0) -> (1009,1000)", cert_near},
      {"13d", "Certificate (0.45, 0.40, 0.5) -> conjugated", cert_room},
  };
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> only(argv + 1, argv + argc);
  int selected = 0, failed = 0;
  for (const auto& c : criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++selected;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.title << " -- " << o.measured << " ("
              << fmt(secs, 3) << " s)" << std::endl;
  }
  if (selected == 0) {
    std::cerr << "no criterion matches the given ids\n";
    return 2;
  }
  std::cout << (selected - failed) << "/" << selected << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
