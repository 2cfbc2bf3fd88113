#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "gfs/equivar.hpp"
#include "gfs/errors.hpp"

using namespace gfs;

namespace {

const double PI = std::acos(-1.0);
constexpr double INF = std::numeric_limits<double>::infinity();

Ambient plane(int n = 1) {
  Ambient a;
  a.n = n;
  return a;
}

std::vector<Bar> bars_in(const Barcode& bc, int degree) {
  std::vector<Bar> out;
  for (const auto& b : bc.bars)
    if (b.degree == degree) out.push_back(b);
  return out;
}

}  // namespace

TEST_CASE("group ring arithmetic") {
  for (int k : {1, 3, 5, 7}) {
    const auto T = GroupRingElem::T(k);
    const auto N = GroupRingElem::norm(k);
    const auto one = GroupRingElem::one(k);
    CHECK(T.pow(k) == one);
    CHECK((N * (T - one)).is_zero());
    CHECK(((T - one) * N).is_zero());
    CHECK(N.augmentation() == k % field_of(k));
    CHECK(T.augmentation() == 1);
  }
  // Multiplication agrees with multiplication of the circulant matrices.
  const GroupRingElem a(5, {1, 2, 0, 4, 3}), b(5, {0, 1, 1, 2, 4});
  const auto ma = a.matrix(), mb = b.matrix(), mab = (a * b).matrix();
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      int s = 0;
      for (int j = 0; j < 5; ++j) s += ma[r][j] * mb[j][c];
      CHECK(s % 5 == mab[r][c]);
    }
  CHECK(GroupRingElem(3, {1, 1, 2}).str() == "1+T+2T^2");
  CHECK(GroupRingElem(3, {3, 0, 6}).is_zero());
  CHECK(GroupRingElem(3, {0, 0, 0, 1}) == GroupRingElem::one(3));  // T^3 = 1
  CHECK_THROWS_AS(GroupRingElem::one(4), NonPrimeK);
  CHECK_THROWS_AS(GroupRingElem::one(3) + GroupRingElem::one(5), InvalidArgument);
}

TEST_CASE("circle complex") {
  for (int k : {3, 5}) {
    const auto cx = circle_complex(k);
    REQUIRE(cx.generators().size() == 2);
    CHECK(cx.check().empty());
    const auto plain = homology_ranks(cx, HomologyMode::Plain);
    CHECK(plain.at(0) == 1);
    CHECK(plain.at(1) == 1);
    const auto eq = homology_ranks(cx, HomologyMode::Equivariant);
    CHECK(eq.at(0) == 1);
    CHECK(eq.at(1) == 1);
  }
  // Independent oracle: real rank of the circulant matrix of T - 1 (k = 3)
  // is 2, so kernel and cokernel are one-dimensional.
  Eigen::Matrix3d m;
  m << -1, 0, 1, 1, -1, 0, 0, 1, -1;
  CHECK(Eigen::FullPivLU<Eigen::Matrix3d>(m).rank() == 2);
  CHECK_THROWS_AS(circle_complex(4), NonPrimeK);
}

TEST_CASE("lens complexes") {
  for (int n : {1, 2, 3})
    for (int k : {3, 5}) {
      const auto cx = lens_complex(n, k);
      REQUIRE(cx.generators().size() == static_cast<size_t>(2 * n));
      CHECK(cx.check().empty());
      const auto plain = homology_ranks(cx, HomologyMode::Plain);
      const auto eq = homology_ranks(cx, HomologyMode::Equivariant);
      for (int d = 0; d < 2 * n; ++d) {
        CHECK(plain.at(d) == ((d == 0 || d == 2 * n - 1) ? 1 : 0));
        CHECK(eq.at(d) == 1);
      }
    }
  const auto p25 = homology_ranks(lens_complex(2, 5), HomologyMode::Plain);
  CHECK(p25 == std::map<int, int>{{0, 1}, {1, 0}, {2, 0}, {3, 1}});
  CHECK_THROWS_AS(lens_complex(0, 3), InvalidArgument);
}

TEST_CASE("coinvariants kill the norm element") {
  for (int k : {3, 5, 7}) CHECK(GroupRingElem::norm(k).augmentation() == 0);
  // Two lens blocks joined by N: every coinvariant differential vanishes.
  const auto cx = assemble_complex(1, 5, {{1.0, 2, true, "a"}, {2.0, 4, true, "b"}});
  CHECK(cx.check().empty());
  const auto eq = homology_ranks(cx, HomologyMode::Equivariant);
  for (int d = 2; d <= 5; ++d) CHECK(eq.at(d) == 1);
}

TEST_CASE("forcing of the connecting map") {
  for (auto [n, k] : {std::pair{1, 3}, std::pair{1, 5}, std::pair{2, 3}}) {
    const auto cs = forcing_connecting_maps(n, k);
    REQUIRE(cs.size() == static_cast<size_t>(k - 1));
    for (const auto& c : cs) {
      const int lambda = c.coeffs()[0];
      CHECK(lambda != 0);
      CHECK(c == GroupRingElem::norm(k).scaled(lambda));
    }
  }
}

TEST_CASE("complex checks") {
  FilteredComplex bad(3);
  const int a = bad.add_generator(0, 0.0);
  const int b = bad.add_generator(1, 0.0);
  const int c = bad.add_generator(2, 1.0);
  bad.add_entry(b, a, GroupRingElem::t_minus_one(3));
  bad.add_entry(c, b, GroupRingElem::T(3));
  CHECK(bad.check().find("d^2") != std::string::npos);

  FilteredComplex up(3);
  const int lo = up.add_generator(0, 2.0);
  const int hi = up.add_generator(1, 1.0);
  up.add_entry(hi, lo, GroupRingElem::one(3));
  CHECK(up.check().find("filtration") != std::string::npos);
  CHECK_THROWS_AS(up.add_entry(0, 7, GroupRingElem::one(3)), InvalidArgument);
  CHECK(barcode(FilteredComplex(5), HomologyMode::Equivariant).bars.empty());
}

TEST_CASE("ball complex of a two-shell profile") {
  // REF(-pi/2, 0.1), k = 5: shells l = 1, 2 at c_{5,1} = 0.82 pi and
  // c_{5,2} = 1.28 pi, origin 5 rho(0) = 1.375 pi (linear-profile closed
  // form; the corner blends move these by O(w^2)).
  const auto rho = RadialProfile::ref(-0.5 * PI, 0.1);
  const auto cx = ball_complex(plane(), rho, 5);
  CHECK(cx.check().empty());
  REQUIRE(cx.generators().size() == 5);
  const auto sh = shells(plane(), rho, 5);
  REQUIRE(sh.size() == 3);
  CHECK(sh[0].value == doctest::Approx(0.82 * PI).epsilon(1e-5));
  CHECK(sh[1].value == doctest::Approx(1.28 * PI).epsilon(1e-5));
  CHECK(sh[2].value == doctest::Approx(1.375 * PI).epsilon(1e-5));

  const auto bc = barcode(cx, HomologyMode::Equivariant);
  CHECK(bc.field == 5);
  const auto d2 = bars_in(bc, 2), d4 = bars_in(bc, 4), d6 = bars_in(bc, 6);
  REQUIRE(d2.size() == 1);
  REQUIRE(d4.size() == 1);
  REQUIRE(d6.size() == 1);
  CHECK(d2[0] == Bar{2, 0.0, sh[0].value, 1});
  CHECK(d4[0] == Bar{4, 0.0, sh[1].value, 1});
  CHECK(d6[0] == Bar{6, 0.0, sh[2].value, 1});
  CHECK(bars_in(bc, 3).size() == 1);
  CHECK(bars_in(bc, 5).size() == 1);

  // Window: only the first shell.
  const auto lo = ball_complex(plane(), rho, 5, {0.0, 0.9 * PI});
  CHECK(lo.generators().size() == 2);

  CHECK_THROWS_AS(ball_complex(plane(), rho, 9), NonPrimeK);
  CHECK_THROWS_AS(ball_complex(plane(), RadialProfile::ref(-3.5 * PI, 0.1), 3), NonFree);
}

TEST_CASE("limit barcodes") {
  const auto eq = barcode(limit_complex(1, 1.0, 5), HomologyMode::Equivariant);
  const auto fig = eq.figure_view(1);
  REQUIRE(fig.bars.size() == 4);
  for (int l = 1; l <= 4; ++l) CHECK(fig.bars[l - 1] == Bar{2 * l, 0.0, l * PI, 1});
  // The full coinvariant barcode also carries the odd lens degrees.
  CHECK(eq.bars.size() == 8);

  const auto plain = barcode(limit_complex(1, 1.0, 1), HomologyMode::Plain);
  CHECK(plain.field == 2);
  REQUIRE(plain.bars.size() == 5);
  for (int l = 1; l <= 4; ++l) CHECK(plain.bars[l - 1] == Bar{2 * l, (l - 1) * PI, l * PI, 1});
  CHECK(plain.bars[4] == Bar{10, 4 * PI, INF, 1});

  const auto plain2 = barcode(limit_complex(2, 1.0, 1), HomologyMode::Plain);
  for (int l = 1; l <= 4; ++l) CHECK(bars_in(plain2, 4 * l).at(0) == Bar{4 * l, (l - 1) * PI, l * PI, 1});
}

TEST_CASE("barcode matches pointwise ranks on a refined grid") {
  const auto rho = RadialProfile::ref(-0.9 * PI, 0.1);
  std::vector<std::pair<FilteredComplex, HomologyMode>> cases{
      {ball_complex(plane(), rho, 5), HomologyMode::Equivariant},
      {ball_complex(plane(), rho, 3), HomologyMode::Equivariant},
      {limit_complex(1, 1.0, 1), HomologyMode::Plain},
      {limit_complex(2, 0.7, 3), HomologyMode::Plain},
  };
  for (const auto& [cx, mode] : cases) {
    const auto bc = barcode(cx, mode);
    for (int i = 0; i <= 400; ++i) {
      const double a = i * 0.05;
      const auto h = homology_ranks(cx, mode, a);
      for (const auto& [d, r] : h) CHECK(bc.rank_at(d, a) == r);
      int alt = 0;
      for (const auto& [d, r] : h) alt += (d % 2 == 0) ? r : -r;
      CHECK(alt == euler_characteristic(cx, mode, a));
    }
  }
}

TEST_CASE("thom shift and circle tensor") {
  const auto bc = barcode(limit_complex(1, 1.0, 5), HomologyMode::Equivariant).figure_view(1);
  CHECK(thom_shift(bc, 0, 5) == bc);
  CHECK(thom_shift(thom_shift(bc, 1, 5), 2, 5) == thom_shift(bc, 3, 5));
  const auto sh = thom_shift(bc, 1, 3);
  for (size_t i = 0; i < bc.bars.size(); ++i) {
    CHECK(sh.bars[i].degree == bc.bars[i].degree + 3);
    CHECK(sh.bars[i].birth == bc.bars[i].birth);
    CHECK(sh.bars[i].death == bc.bars[i].death);
  }
  CHECK(tensor_circle(Barcode{5, {}}).bars.empty());
  const auto tc = tensor_circle(bc);
  REQUIRE(tc.bars.size() == 8);
  for (int l = 1; l <= 4; ++l) {
    CHECK(tc.bars[2 * l - 2] == Bar{2 * l, 0.0, l * PI, 1});
    CHECK(tc.bars[2 * l - 1] == Bar{2 * l + 1, 0.0, l * PI, 1});
  }
}

TEST_CASE("inclusion maps") {
  const double R1 = 1.0, R2 = 0.8;
  const auto c1 = limit_complex(1, R1, 5), c2 = limit_complex(1, R2, 5);
  const auto b1 = barcode(c1, HomologyMode::Equivariant), b2 = barcode(c2, HomologyMode::Equivariant);
  for (int l = 1; l <= 4; ++l) {
    const double A1 = l * PI * R1 * R1, A2 = l * PI * R2 * R2;
    for (int i = 1; i <= 20; ++i) {
      const double a = 1.2 * A1 * i / 21.0;
      if (std::abs(a - A2) < 1e-9 || std::abs(a - A1) < 1e-9) continue;
      const int expected = (a < A2) ? 1 : 0;
      CHECK(inclusion_map(b1, b2, 2 * l, a) == expected);
      CHECK(inclusion_rank(c1, c2, 2 * l, a, HomologyMode::Equivariant) == expected);
    }
  }
  CHECK_THROWS_AS(inclusion_map(b1, b2, 2, PI * R2 * R2), ThresholdOnSpectrum);
  CHECK(inclusion_map(b1, b1, 4, 1.0) == 1);
  CHECK(inclusion_rank(c1, c1, 4, 1.0, HomologyMode::Equivariant) == 1);
  CHECK_THROWS_AS(inclusion_rank(c2, c1, 2, 1.0, HomologyMode::Equivariant), InvalidArgument);

  // Plain limit: the degree-2l group lives on [(l-1)A, lA).
  const auto p1 = limit_complex(1, R1, 1), p2 = limit_complex(1, R2, 1);
  const double A1 = PI * R1 * R1, A2 = PI * R2 * R2;
  CHECK(inclusion_rank(p1, p2, 4, 0.5 * (A1 + 2 * A2), HomologyMode::Plain) == 1);
  CHECK(inclusion_rank(p1, p2, 4, 0.5 * (2 * A2 + 2 * A1), HomologyMode::Plain) == 0);
}

TEST_CASE("serialization") {
  const auto bc = barcode(limit_complex(1, 1.0, 1), HomologyMode::Plain);
  const auto j = bc.to_json();
  CHECK(j["bars"].back()["death"].is_null());
  CHECK(Barcode::from_json(nlohmann::json::parse(j.dump())) == bc);
  std::ostringstream os;
  write_tsv(os, bc);
  const auto s = os.str();
  CHECK(s.rfind("a\tdegree\trank\n", 0) == 0);
  CHECK(s.find("0\t2\t1\n") != std::string::npos);
  CHECK(homology_mode_from_string("plain") == HomologyMode::Plain);
  CHECK_THROWS_AS(homology_mode_from_string("borel"), InvalidArgument);
}
