#include "gfs/equivar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "gfs/errors.hpp"

namespace gfs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int mod(long long a, int p) {
  long long r = a % p;
  return static_cast<int>(r < 0 ? r + p : r);
}

int inverse_mod(int a, int p) {
  // p prime: a^{p-2}.
  long long r = 1, b = mod(a, p);
  for (int e = p - 2; e > 0; e >>= 1) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
  }
  return static_cast<int>(r);
}

using IntMat = std::vector<std::vector<int>>;  // row-major, entries in [0, p)

IntMat zeros(size_t rows, size_t cols) { return IntMat(rows, std::vector<int>(cols, 0)); }

// Row-reduces m in place; returns the pivot columns.
std::vector<size_t> row_reduce(IntMat& m, int p) {
  std::vector<size_t> pivots;
  if (m.empty()) return pivots;
  const size_t rows = m.size(), cols = m[0].size();
  size_t r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t piv = r;
    while (piv < rows && m[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[r]);
    const int inv = inverse_mod(m[r][c], p);
    for (auto& x : m[r]) x = static_cast<int>(static_cast<long long>(x) * inv % p);
    for (size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      const int f = m[i][c];
      for (size_t j = 0; j < cols; ++j) m[i][j] = mod(m[i][j] - static_cast<long long>(f) * m[r][j], p);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

int rank_mod(IntMat m, int p) { return static_cast<int>(row_reduce(m, p).size()); }

// Basis of the right null space (as columns, returned as vectors).
std::vector<std::vector<int>> nullspace_mod(IntMat m, size_t cols, int p) {
  std::vector<std::vector<int>> basis;
  if (m.empty()) {
    for (size_t c = 0; c < cols; ++c) {
      std::vector<int> e(cols, 0);
      e[c] = 1;
      basis.push_back(e);
    }
    return basis;
  }
  const auto pivots = row_reduce(m, p);
  std::vector<bool> isPivot(cols, false);
  for (size_t c : pivots) isPivot[c] = true;
  for (size_t f = 0; f < cols; ++f) {
    if (isPivot[f]) continue;
    std::vector<int> v(cols, 0);
    v[f] = 1;
    for (size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = mod(-m[r][f], p);
    basis.push_back(v);
  }
  return basis;
}

// The complex over F_p obtained by coinvariants or by forgetting the
// module structure; generator g of ring generator i and basis slot s.
struct FieldComplex {
  int p = 2;
  struct Gen {
    int ring = 0;
    int slot = 0;
    int degree = 0;
    double value = 0.0;
  };
  std::vector<Gen> gens;
  struct Entry {
    int from, to, val;
  };
  std::vector<Entry> entries;
};

FieldComplex to_field(const FilteredComplex& cx, HomologyMode mode) {
  FieldComplex f;
  f.p = cx.field();
  const int k = cx.k();
  const int slots = (mode == HomologyMode::Plain) ? k : 1;
  const auto& gens = cx.generators();
  for (size_t i = 0; i < gens.size(); ++i)
    for (int s = 0; s < slots; ++s)
      f.gens.push_back({static_cast<int>(i), s, gens[i].degree, gens[i].value});
  for (const auto& e : cx.entries()) {
    if (mode == HomologyMode::Equivariant) {
      const int a = e.coeff.augmentation();
      if (a != 0) f.entries.push_back({e.from, e.to, a});
      continue;
    }
    const auto& c = e.coeff.coeffs();
    for (int s = 0; s < k; ++s)
      for (int r = 0; r < k; ++r) {
        const int v = c[mod(r - s, k)];
        if (v != 0) f.entries.push_back({e.from * k + s, e.to * k + r, v});
      }
  }
  return f;
}

// Generators of degree d with value > a, in field order.
std::vector<int> surviving(const FieldComplex& f, int d, double a) {
  std::vector<int> out;
  for (size_t g = 0; g < f.gens.size(); ++g)
    if (f.gens[g].degree == d && f.gens[g].value > a) out.push_back(static_cast<int>(g));
  return out;
}

// Matrix of d: C_d -> C_{d-1} on the given bases.
IntMat boundary(const FieldComplex& f, const std::vector<int>& src, const std::vector<int>& dst) {
  IntMat m = zeros(dst.size(), src.size());
  if (src.empty() || dst.empty()) return m;
  std::map<int, size_t> srcPos, dstPos;
  for (size_t i = 0; i < src.size(); ++i) srcPos[src[i]] = i;
  for (size_t i = 0; i < dst.size(); ++i) dstPos[dst[i]] = i;
  for (const auto& e : f.entries) {
    auto s = srcPos.find(e.from);
    auto t = dstPos.find(e.to);
    if (s == srcPos.end() || t == dstPos.end()) continue;
    m[t->second][s->second] = mod(m[t->second][s->second] + e.val, f.p);
  }
  return m;
}

int homology_rank(const FieldComplex& f, int d, double a) {
  const auto cd = surviving(f, d, a);
  if (cd.empty()) return 0;
  const auto cdm = surviving(f, d - 1, a);
  const auto cdp = surviving(f, d + 1, a);
  return static_cast<int>(cd.size()) - rank_mod(boundary(f, cd, cdm), f.p) -
         rank_mod(boundary(f, cdp, cd), f.p);
}

std::set<int> degrees_of(const FilteredComplex& cx) {
  std::set<int> ds;
  for (const auto& g : cx.generators()) ds.insert(g.degree);
  return ds;
}

bool same_value(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

bool is_prime(long long k) {
  if (k < 2) return false;
  for (long long d = 2; d * d <= k; ++d)
    if (k % d == 0) return false;
  return true;
}

int field_of(int k) {
  if (k == 1) return 2;
  if (!is_prime(k)) throw NonPrimeK("k = " + std::to_string(k) + " is not prime");
  return k;
}

// ---------------------------------------------------------------- ring

GroupRingElem::GroupRingElem(int k, std::vector<int> coeffs) : k_(k), p_(field_of(k)), c_(k, 0) {
  for (size_t i = 0; i < coeffs.size(); ++i) c_[i % k] = mod(c_[i % k] + coeffs[i], p_);
}

GroupRingElem GroupRingElem::zero(int k) { return GroupRingElem(k, {}); }
GroupRingElem GroupRingElem::one(int k) { return GroupRingElem(k, {1}); }
GroupRingElem GroupRingElem::T(int k) {
  std::vector<int> c(2, 0);
  c[1] = 1;
  return GroupRingElem(k, c);
}
GroupRingElem GroupRingElem::norm(int k) { return GroupRingElem(k, std::vector<int>(k, 1)); }
GroupRingElem GroupRingElem::t_minus_one(int k) { return T(k) - one(k); }

bool GroupRingElem::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](int x) { return x == 0; });
}

int GroupRingElem::augmentation() const {
  long long s = 0;
  for (int x : c_) s += x;
  return mod(s, p_);
}

std::vector<std::vector<int>> GroupRingElem::matrix() const {
  auto m = zeros(k_, k_);
  for (int s = 0; s < k_; ++s)
    for (int r = 0; r < k_; ++r) m[r][s] = c_[mod(r - s, k_)];
  return m;
}

GroupRingElem GroupRingElem::pow(int e) const {
  if (e < 0) throw InvalidArgument("negative power");
  GroupRingElem r = one(k_), b = *this;
  for (; e > 0; e >>= 1) {
    if (e & 1) r = r * b;
    b = b * b;
  }
  return r;
}

std::string GroupRingElem::str() const {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < k_; ++i) {
    if (c_[i] == 0) continue;
    if (!first) os << "+";
    first = false;
    if (i == 0) {
      os << c_[i];
      continue;
    }
    if (c_[i] != 1) os << c_[i];
    os << "T";
    if (i > 1) os << "^" << i;
  }
  return first ? "0" : os.str();
}

GroupRingElem GroupRingElem::operator+(const GroupRingElem& o) const {
  if (o.k_ != k_) throw InvalidArgument("group ring mismatch");
  auto c = c_;
  for (int i = 0; i < k_; ++i) c[i] += o.c_[i];
  return GroupRingElem(k_, c);
}

GroupRingElem GroupRingElem::operator-(const GroupRingElem& o) const { return *this + o.scaled(-1); }

GroupRingElem GroupRingElem::operator*(const GroupRingElem& o) const {
  if (o.k_ != k_) throw InvalidArgument("group ring mismatch");
  std::vector<long long> c(k_, 0);
  for (int i = 0; i < k_; ++i)
    for (int j = 0; j < k_; ++j) c[(i + j) % k_] += static_cast<long long>(c_[i]) * o.c_[j];
  std::vector<int> r(k_);
  for (int i = 0; i < k_; ++i) r[i] = mod(c[i], p_);
  return GroupRingElem(k_, r);
}

GroupRingElem GroupRingElem::scaled(int s) const {
  auto c = c_;
  for (auto& x : c) x = mod(static_cast<long long>(x) * s, p_);
  return GroupRingElem(k_, c);
}

bool GroupRingElem::operator==(const GroupRingElem& o) const { return k_ == o.k_ && c_ == o.c_; }

// ---------------------------------------------------------------- complexes

int FilteredComplex::add_generator(int degree, double value, std::string label) {
  gens_.push_back({degree, value, std::move(label), degree + shift_});
  return static_cast<int>(gens_.size()) - 1;
}

void FilteredComplex::add_entry(int from, int to, const GroupRingElem& c) {
  const int n = static_cast<int>(gens_.size());
  if (from < 0 || from >= n || to < 0 || to >= n) throw InvalidArgument("entry index out of range");
  if (c.k() != k_) throw InvalidArgument("entry coefficient in the wrong group ring");
  if (!c.is_zero()) entries_.push_back({from, to, c});
}

FilteredComplex FilteredComplex::with_values(const std::vector<double>& values) const {
  if (values.size() != gens_.size()) throw InvalidArgument("with_values: size mismatch");
  FilteredComplex out = *this;
  for (size_t i = 0; i < values.size(); ++i) out.gens_[i].value = values[i];
  return out;
}

std::string FilteredComplex::check() const {
  std::ostringstream err;
  for (const auto& e : entries_) {
    const auto& a = gens_[e.from];
    const auto& b = gens_[e.to];
    if (b.degree != a.degree - 1)
      err << "entry " << e.from << "->" << e.to << " does not lower the degree by one; ";
    // Equal values occur inside a Morse-Bott block.
    if (b.value > a.value && !same_value(a.value, b.value))
      err << "entry " << e.from << "->" << e.to << " raises the filtration; ";
  }
  std::map<std::pair<int, int>, GroupRingElem> dd;
  for (const auto& e1 : entries_)
    for (const auto& e2 : entries_) {
      if (e2.from != e1.to) continue;
      const auto key = std::make_pair(e1.from, e2.to);
      auto prod = e2.coeff * e1.coeff;
      auto it = dd.find(key);
      if (it == dd.end()) dd.emplace(key, prod);
      else it->second = it->second + prod;
    }
  for (const auto& [key, c] : dd)
    if (!c.is_zero()) err << "d^2 != 0 on " << key.first << "->" << key.second << " (" << c.str() << "); ";
  return err.str();
}

std::string to_string(HomologyMode m) { return m == HomologyMode::Equivariant ? "equivariant" : "plain"; }

HomologyMode homology_mode_from_string(const std::string& s) {
  if (s == "equivariant") return HomologyMode::Equivariant;
  if (s == "plain") return HomologyMode::Plain;
  throw InvalidArgument("unknown homology mode '" + s + "'");
}

std::map<int, int> homology_ranks(const FilteredComplex& cx, HomologyMode mode, double a) {
  const auto f = to_field(cx, mode);
  std::map<int, int> out;
  for (int d : degrees_of(cx)) out[d] = homology_rank(f, d, a);
  return out;
}

int euler_characteristic(const FilteredComplex& cx, HomologyMode mode, double a) {
  const auto f = to_field(cx, mode);
  int chi = 0;
  for (const auto& g : f.gens)
    if (g.value > a) chi += (g.degree % 2 == 0) ? 1 : -1;
  return chi;
}

namespace {

// Appends a lens block of 2n generators in degrees bottom..bottom+2n-1;
// returns the index of the bottom generator.
int append_lens(FilteredComplex& cx, int n, int bottom, double value, const std::string& label) {
  const int k = cx.k();
  int first = -1;
  for (int j = 0; j < 2 * n; ++j) {
    const int g = cx.add_generator(bottom + j, value, label + "/" + std::to_string(j));
    if (j == 0) first = g;
    if (j == 0) continue;
    // Odd local degree -> even: T - 1; even -> odd: N.
    cx.add_entry(g, g - 1, (j % 2 == 1) ? GroupRingElem::t_minus_one(k) : GroupRingElem::norm(k));
  }
  return first;
}

}  // namespace

FilteredComplex lens_complex(int n, int k) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  field_of(k);
  FilteredComplex cx(k);
  append_lens(cx, n, 0, 0.0, "lens");
  return cx;
}

FilteredComplex circle_complex(int k) { return lens_complex(1, k); }

FilteredComplex assemble_complex(int n, int k, std::vector<Stratum> strata, int shift) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  field_of(k);
  std::stable_sort(strata.begin(), strata.end(),
                   [](const Stratum& a, const Stratum& b) { return a.value < b.value; });
  FilteredComplex cx(k, shift);
  int prevTop = -1, prevTopDegree = 0;
  for (const auto& s : strata) {
    int bottom, top, topDegree;
    if (s.sphere) {
      bottom = append_lens(cx, n, s.bottomDegree, s.value, s.label);
      top = bottom + 2 * n - 1;
      topDegree = s.bottomDegree + 2 * n - 1;
    } else {
      bottom = top = cx.add_generator(s.bottomDegree, s.value, s.label);
      topDegree = s.bottomDegree;
    }
    if (prevTop >= 0 && s.bottomDegree == prevTopDegree + 1)
      cx.add_entry(bottom, prevTop, GroupRingElem::norm(k));
    prevTop = top;
    prevTopDegree = topDegree;
  }
  return cx;
}

FilteredComplex ball_complex(const Ambient& amb, const RadialProfile& rho, int k, const AWindow& window) {
  amb.validate();
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (k != 1 && !is_prime(k)) throw NonPrimeK("k = " + std::to_string(k) + " is not prime");
  std::vector<Stratum> strata;
  for (const auto& s : shells(amb, rho, k)) {
    if (s.value > window.hi) continue;
    if (!s.origin && k > 1 && s.l % k == 0)
      throw NonFree("shell l = " + std::to_string(s.l) + " is not a free Z_" + std::to_string(k) + " orbit");
    // The origin is a single cell, modelled as one free generator.
    strata.push_back({s.value, s.index, !s.origin, s.origin ? "origin" : "l=" + std::to_string(s.l)});
  }
  return assemble_complex(amb.n, k, strata);
}

FilteredComplex limit_complex(int n, double R, int k, int plainShells) {
  if (!(R > 0.0)) throw InvalidArgument("R must be positive");
  return limit_complex_area(n, std::numbers::pi * R * R, k, plainShells);
}

FilteredComplex limit_complex_area(int n, double A, int k, int plainShells) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (!(A > 0.0)) throw InvalidArgument("area must be positive");
  std::vector<Stratum> strata;
  if (k == 1) {
    if (plainShells < 1) throw InvalidArgument("plainShells must be >= 1");
    for (int l = 1; l <= plainShells; ++l) strata.push_back({l * A, 2 * n * l, true, "l=" + std::to_string(l)});
    strata.push_back({kInf, 2 * n * (plainShells + 1), false, "origin"});
  } else {
    if (!is_prime(k)) throw NonPrimeK("k = " + std::to_string(k) + " is not prime");
    for (int l = 1; l < k; ++l) strata.push_back({l * A, 2 * n * l, true, "l=" + std::to_string(l)});
  }
  return assemble_complex(n, k, strata);
}

// ---------------------------------------------------------------- barcodes

int Barcode::rank_at(int degree, double a) const {
  int r = 0;
  for (const auto& b : bars)
    if (b.degree == degree && b.birth <= a && a < b.death) r += b.rank;
  return r;
}

Barcode Barcode::figure_view(int n) const {
  Barcode out{field, {}};
  for (const auto& b : bars)
    if (b.degree % (2 * n) == 0) out.bars.push_back(b);
  return out;
}

nlohmann::ordered_json Barcode::to_json() const {
  nlohmann::ordered_json j;
  j["field"] = field;
  j["bars"] = nlohmann::ordered_json::array();
  for (const auto& b : bars) {
    nlohmann::ordered_json e;
    e["degree"] = b.degree;
    e["birth"] = b.birth;
    if (std::isinf(b.death)) e["death"] = nullptr;
    else e["death"] = b.death;
    e["rank"] = b.rank;
    j["bars"].push_back(e);
  }
  return j;
}

Barcode Barcode::from_json(const nlohmann::json& j) {
  Barcode bc;
  bc.field = j.at("field").get<int>();
  for (const auto& e : j.at("bars")) {
    Bar b;
    b.degree = e.at("degree").get<int>();
    b.birth = e.at("birth").get<double>();
    b.death = e.at("death").is_null() ? kInf : e.at("death").get<double>();
    b.rank = e.at("rank").get<int>();
    bc.bars.push_back(b);
  }
  return bc;
}

Barcode barcode(const FilteredComplex& cx, HomologyMode mode, const AWindow& window) {
  const auto f = to_field(cx, mode);
  std::vector<double> breaks{window.lo};
  for (const auto& g : cx.generators())
    if (std::isfinite(g.value) && g.value > window.lo && g.value <= window.hi) breaks.push_back(g.value);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), same_value), breaks.end());

  Barcode bc{f.p, {}};
  for (int d : degrees_of(cx)) {
    int cur = 0;
    double start = 0.0;
    for (size_t i = 0; i < breaks.size(); ++i) {
      const int r = homology_rank(f, d, breaks[i]);
      if (r == cur) continue;
      if (cur > 0) bc.bars.push_back({d, start, breaks[i], cur});
      cur = r;
      start = breaks[i];
    }
    if (cur > 0) bc.bars.push_back({d, start, kInf, cur});
  }
  std::sort(bc.bars.begin(), bc.bars.end(), [](const Bar& a, const Bar& b) {
    return a.degree != b.degree ? a.degree < b.degree : a.birth < b.birth;
  });
  return bc;
}

Barcode thom_shift(const Barcode& bc, int qIndex, int k) {
  Barcode out = bc;
  for (auto& b : out.bars) b.degree += k * qIndex;
  return out;
}

Barcode tensor_circle(const Barcode& bc) {
  Barcode out{bc.field, {}};
  for (const auto& b : bc.bars) {
    out.bars.push_back(b);
    Bar up = b;
    ++up.degree;
    out.bars.push_back(up);
  }
  std::stable_sort(out.bars.begin(), out.bars.end(), [](const Bar& a, const Bar& b) {
    return a.degree != b.degree ? a.degree < b.degree : a.birth < b.birth;
  });
  return out;
}

int inclusion_map(const Barcode& bcLarge, const Barcode& bcSmall, int degree, double a) {
  for (const Barcode* bc : {&bcLarge, &bcSmall})
    for (const auto& b : bc->bars) {
      if (b.degree != degree) continue;
      if (same_value(a, b.birth) || (std::isfinite(b.death) && same_value(a, b.death)))
        throw ThresholdOnSpectrum("a = " + std::to_string(a) + " is a bar endpoint in degree " +
                                  std::to_string(degree));
    }
  return std::min(bcLarge.rank_at(degree, a), bcSmall.rank_at(degree, a));
}

int inclusion_rank(const FilteredComplex& large, const FilteredComplex& small, int degree, double a,
                   HomologyMode mode) {
  const auto& gl = large.generators();
  const auto& gs = small.generators();
  if (large.k() != small.k() || gl.size() != gs.size() || large.entries().size() != small.entries().size())
    throw InvalidArgument("inclusion_rank: complexes differ in structure");
  for (size_t i = 0; i < gl.size(); ++i) {
    if (gl[i].degree != gs[i].degree) throw InvalidArgument("inclusion_rank: degree mismatch");
    if (gs[i].value > gl[i].value && !same_value(gs[i].value, gl[i].value))
      throw InvalidArgument("inclusion_rank: small complex has a larger value");
  }
  const auto fl = to_field(large, mode);
  const auto fs = to_field(small, mode);
  const int p = fl.p;

  const auto srcL = surviving(fl, degree, a);
  const auto dstL = surviving(fl, degree - 1, a);
  const auto cyclesL = nullspace_mod(boundary(fl, srcL, dstL), srcL.size(), p);
  if (cyclesL.empty()) return 0;

  const auto cdS = surviving(fs, degree, a);
  if (cdS.empty()) return 0;
  const auto upS = surviving(fs, degree + 1, a);
  const IntMat bS = boundary(fs, upS, cdS);  // cdS x upS
  std::map<int, size_t> posS;
  for (size_t i = 0; i < cdS.size(); ++i) posS[cdS[i]] = i;

  // Columns: projected cycles, then boundaries of the small quotient.
  IntMat both = zeros(cdS.size(), cyclesL.size() + upS.size());
  for (size_t c = 0; c < cyclesL.size(); ++c)
    for (size_t i = 0; i < srcL.size(); ++i) {
      auto it = posS.find(srcL[i]);
      if (it != posS.end()) both[it->second][c] = cyclesL[c][i];
    }
  for (size_t r = 0; r < cdS.size(); ++r)
    for (size_t c = 0; c < upS.size(); ++c) both[r][cyclesL.size() + c] = bS[r][c];
  return rank_mod(both, p) - rank_mod(bS, p);
}

std::vector<GroupRingElem> forcing_connecting_maps(int n, int k) {
  field_of(k);
  const int p = field_of(k);
  std::vector<GroupRingElem> out;
  long long total = 1;
  for (int i = 0; i < k; ++i) total *= p;
  for (long long code = 0; code < total; ++code) {
    std::vector<int> c(k);
    long long x = code;
    for (int i = 0; i < k; ++i, x /= p) c[i] = static_cast<int>(x % p);
    const GroupRingElem conn(k, c);
    FilteredComplex cx(k);
    const int lower = append_lens(cx, n, 2 * n, 1.0, "l=1");
    const int upper = append_lens(cx, n, 4 * n, 2.0, "l=2");
    cx.add_entry(upper, lower + 2 * n - 1, conn);
    if (!cx.check().empty()) continue;
    const auto h = homology_ranks(cx, HomologyMode::Plain);
    if (h.at(4 * n - 1) == 0 && h.at(4 * n) == 0) out.push_back(conn);
  }
  return out;
}

void write_tsv(std::ostream& os, const Barcode& bc) {
  const auto oldPrecision = os.precision(17);
  os << "a\tdegree\trank\n";
  std::set<int> degrees;
  for (const auto& b : bc.bars) degrees.insert(b.degree);
  for (int d : degrees) {
    std::set<double> pts{0.0};
    for (const auto& b : bc.bars) {
      if (b.degree != d) continue;
      pts.insert(b.birth);
      if (std::isfinite(b.death)) pts.insert(b.death);
    }
    for (double a : pts) os << a << "\t" << d << "\t" << bc.rank_at(d, a) << "\n";
  }
  os.precision(oldPrecision);
}

}  // namespace gfs
