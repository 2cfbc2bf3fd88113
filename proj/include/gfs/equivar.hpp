#pragma once

// Exact homological algebra over F_k and F_k[T]/(T^k - 1): circle and lens
// complexes, Morse-Bott assembly of the ball complexes, coinvariants,
// barcodes, Thom shifts and inclusion-induced persistence maps.
//
// Plain-mode sentinel: k = 1 means the trivial group with coefficients F_2.

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfs/sympl.hpp"

namespace gfs {

bool is_prime(long long k);
// Coefficient field of the group ring: F_k for k prime, F_2 for k = 1.
int field_of(int k);

// Element of F_p[T]/(T^k - 1), p = field_of(k).
class GroupRingElem {
 public:
  GroupRingElem() = default;
  GroupRingElem(int k, std::vector<int> coeffs);

  static GroupRingElem zero(int k);
  static GroupRingElem one(int k);
  static GroupRingElem T(int k);
  static GroupRingElem norm(int k);  // N = 1 + T + ... + T^{k-1}
  static GroupRingElem t_minus_one(int k);

  int k() const { return k_; }
  int p() const { return p_; }
  const std::vector<int>& coeffs() const { return c_; }
  bool is_zero() const;
  int augmentation() const;  // p(1) mod p
  // Matrix of multiplication in the basis 1, T, ..., T^{k-1}.
  std::vector<std::vector<int>> matrix() const;
  GroupRingElem pow(int e) const;
  std::string str() const;

  GroupRingElem operator+(const GroupRingElem& o) const;
  GroupRingElem operator-(const GroupRingElem& o) const;
  GroupRingElem operator*(const GroupRingElem& o) const;
  GroupRingElem scaled(int s) const;
  bool operator==(const GroupRingElem& o) const;
  bool operator!=(const GroupRingElem& o) const { return !(*this == o); }

 private:
  int k_ = 1;
  int p_ = 2;
  std::vector<int> c_{0};
};

struct Generator {
  int degree = 0;  // normalized degree (shift removed)
  double value = 0.0;
  std::string label;
  int rawIndex = 0;  // degree + shift, for audit
};

struct ComplexEntry {
  int from = 0;  // generator index
  int to = 0;
  GroupRingElem coeff;
};

// Complex of free F_p[T]/(T^k - 1)-modules, one rank-1 module per
// generator; d(from) contains coeff * to.
class FilteredComplex {
 public:
  FilteredComplex() = default;
  explicit FilteredComplex(int k, int shift = 0) : k_(k), shift_(shift) {}

  int add_generator(int degree, double value, std::string label = "");
  void add_entry(int from, int to, const GroupRingElem& c);

  int k() const { return k_; }
  int field() const { return field_of(k_); }
  int shift() const { return shift_; }
  const std::vector<Generator>& generators() const { return gens_; }
  const std::vector<ComplexEntry>& entries() const { return entries_; }
  // Copy with every generator value replaced.
  FilteredComplex with_values(const std::vector<double>& values) const;

  // Empty when d o d = 0, degrees drop by one and values do not increase.
  std::string check() const;

 private:
  int k_ = 1;
  int shift_ = 0;
  std::vector<Generator> gens_;
  std::vector<ComplexEntry> entries_;
};

enum class HomologyMode { Equivariant, Plain };
std::string to_string(HomologyMode m);
HomologyMode homology_mode_from_string(const std::string& s);

// Ranks over F_p of H_d(C / C_{<= a}) in every degree d carrying
// generators; equivariant = coinvariants (p(T) -> p(1)), plain = forget
// the module structure.  a = -inf gives the homology of the whole complex.
std::map<int, int> homology_ranks(const FilteredComplex& cx, HomologyMode mode,
                                  double a = -std::numeric_limits<double>::infinity());
// Alternating count of field generators above a (Euler characteristic).
int euler_characteristic(const FilteredComplex& cx, HomologyMode mode, double a);

FilteredComplex circle_complex(int k);
FilteredComplex lens_complex(int n, int k);

// Morse-Bott stratum: a (2n-1)-sphere (lens block) or an isolated point.
struct Stratum {
  double value = 0.0;
  int bottomDegree = 0;
  bool sphere = true;
  std::string label;
};

// Lens blocks and points sorted by value; consecutive strata whose degrees
// abut (upper bottom = lower top + 1) are joined by N.
FilteredComplex assemble_complex(int n, int k, std::vector<Stratum> strata, int shift = 0);

struct AWindow {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

// Shells of rho (value c_{k,l}, degree 2nl) plus the origin (value
// k rho(0), degree 2n(L+1)); strata above window.hi are dropped.
// Throws NonPrimeK, NonFree (l multiple of k).
FilteredComplex ball_complex(const Ambient& amb, const RadialProfile& rho, int k,
                             const AWindow& window = {});
// j -> infinity limit: equivariant (k prime) shells l = 1..k-1 at l pi R^2;
// plain (k = 1) shells l = 1..plainShells and the origin at +inf.
FilteredComplex limit_complex(int n, double R, int k, int plainShells = 4);
// Same, parametrized by the area A = pi R^2 (exact bar endpoints l A).
FilteredComplex limit_complex_area(int n, double A, int k, int plainShells = 4);

struct Bar {
  int degree = 0;
  double birth = 0.0;
  double death = std::numeric_limits<double>::infinity();
  int rank = 1;
  bool operator==(const Bar& o) const = default;
};

struct Barcode {
  int field = 2;
  std::vector<Bar> bars;

  int rank_at(int degree, double a) const;
  // Bars in degrees divisible by 2n (the groups displayed in the figures).
  Barcode figure_view(int n) const;
  nlohmann::ordered_json to_json() const;
  static Barcode from_json(const nlohmann::json& j);
  bool operator==(const Barcode& o) const = default;
};

// Maximal intervals [birth, death) of constant nonzero rank of
// H(C, C_{<= a}) for a >= window.lo.
Barcode barcode(const FilteredComplex& cx, HomologyMode mode, const AWindow& window = {});
Barcode thom_shift(const Barcode& bc, int qIndex, int k);
Barcode tensor_circle(const Barcode& bc);

// Barcode route: min of the two ranks.  Throws ThresholdOnSpectrum if a is
// a bar endpoint in that degree.
int inclusion_map(const Barcode& bcLarge, const Barcode& bcSmall, int degree, double a);
// Chain route: rank of H_d(C/C^{large}_{<=a}) -> H_d(C/C^{small}_{<=a}),
// induced by the quotient projection (values of the small ball never
// exceed those of the large one generator-wise).
int inclusion_rank(const FilteredComplex& large, const FilteredComplex& small, int degree, double a,
                   HomologyMode mode);

// Ring elements c with d o d = 0 and plain H_{2nl} = 0 for the two-shell
// complex joined by c (enumerated exhaustively).
std::vector<GroupRingElem> forcing_connecting_maps(int n, int k);

// TSV step plot: columns a, degree, rank at every breakpoint.
void write_tsv(std::ostream& os, const Barcode& bc);

}  // namespace gfs
