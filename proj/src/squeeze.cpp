#include "gfs/squeeze.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gfs/equivar.hpp"
#include "gfs/errors.hpp"

namespace gfs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Enlargement used when the certificate threshold sits on the boundary of
// the domain ball (a squeezing of the closed ball squeezes a neighborhood).
double enlarge(double A) { return A + 1e-9 * std::max(1.0, A); }

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

void SqueezeQuery::validate() const {
  if (!(A2 > 0.0) || !std::isfinite(A1) || !std::isfinite(A2))
    throw InvalidArgument("areas must be positive and finite");
  if (A1 < A2) throw InvalidArgument("A1 must be >= A2");
  if (A3 && !(*A3 > A1)) throw InvalidArgument("A3 must be > A1");
  if (maxPrime < 3) throw InvalidArgument("maxPrime must be >= 3");
}

std::string to_string(CertKind k) {
  switch (k) {
    case CertKind::IntegerK: return "integerK";
    case CertKind::PrimeFraction: return "primeFraction";
    case CertKind::EqualRadii: return "equalRadii";
    case CertKind::Conjugated: return "conjugated";
    case CertKind::None: return "none";
  }
  return "none";
}

int SqueezeCertificate::evidenceDegree() const {
  switch (kind) {
    case CertKind::IntegerK: return 2;
    case CertKind::PrimeFraction:
    case CertKind::EqualRadii: return 2 * l;
    case CertKind::Conjugated: return inner ? inner->evidenceDegree() : 0;
    case CertKind::None: return 0;
  }
  return 0;
}

double SqueezeCertificate::evidenceThreshold() const {
  switch (kind) {
    case CertKind::IntegerK: return K;
    case CertKind::PrimeFraction:
    case CertKind::EqualRadii: return k;
    case CertKind::Conjugated: return inner ? inner->evidenceThreshold() : 0.0;
    case CertKind::None: return 0.0;
  }
  return 0.0;
}

int suggested_prime_bound(double A1, double A2) {
  const double need = 2.0 * A1 * A2 / (A1 - A2) + 2.0;
  if (need > 1e9) throw SearchBoundExceeded("areas too close for any practical bound");
  long long k = static_cast<long long>(std::ceil(need));
  if (k % 2 == 0) ++k;
  while (!is_prime(k)) k += 2;
  return static_cast<int>(k);
}

SqueezeCertificate find_obstruction(const SqueezeQuery& q) {
  q.validate();
  SqueezeCertificate c;
  c.areas = q;

  const double K = std::ceil(q.A2);
  if (K <= q.A1) {
    c.kind = CertKind::IntegerK;
    c.K = static_cast<int>(K);
    return c;
  }
  if (q.A2 >= 1.0 && q.A1 > q.A2) {
    for (int k = 3; k <= q.maxPrime; k += 2) {
      if (!is_prime(k)) continue;
      // Smallest l with k / l < A1, i.e. l > k / A1.
      int l = static_cast<int>(std::floor(k / q.A1)) + 1;
      while (l > 1 && k < q.A1 * (l - 1)) --l;
      while (!(k < q.A1 * l)) ++l;
      if (l >= 1 && l < k && q.A2 * l <= k) {
        c.kind = CertKind::PrimeFraction;
        c.k = k;
        c.l = l;
        return c;
      }
    }
    throw SearchBoundExceeded("no prime fraction with k <= " + std::to_string(q.maxPrime) +
                              "; a certificate exists for max-prime >= " +
                              std::to_string(suggested_prime_bound(q.A1, q.A2)));
  }
  if (q.A1 == q.A2 && q.A2 >= 1.0) {
    // Smallest odd prime k with some l < k, k / l >= A (l maximal).
    for (int k = 3;; k += 2) {
      if (!is_prime(k)) continue;
      int l = std::min(k - 1, static_cast<int>(std::floor(k / q.A1)));
      while (l >= 1 && q.A1 * l > k) --l;
      if (l >= 1) {
        c.kind = CertKind::EqualRadii;
        c.k = k;
        c.l = l;
        return c;
      }
    }
  }
  if (q.A1 < 1.0 && q.A3) {
    try {
      return room_obstruction(q);
    } catch (const DomainError&) {
      return c;  // kind none
    }
  }
  return c;
}

double room_transform(int m, double A) {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (!(A >= 0.0)) throw InvalidArgument("area must be >= 0");
  if (std::isinf(A)) return 1.0 / m;
  return A / (1.0 + m * A);
}

double room_transform_inverse(int m, double A) {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (!(A >= 0.0)) throw InvalidArgument("area must be >= 0");
  const double d = 1.0 - m * A;
  if (d <= 1e-12) {
    if (d < -1e-12) throw DomainError("area " + num(A) + " exceeds 1/m");
    return kInf;
  }
  return A / d;
}

SqueezeCertificate room_obstruction(const SqueezeQuery& q) {
  if (!q.A3) throw DomainError("room obstruction needs A3");
  const double A3 = *q.A3;
  if (!(q.A2 > 0.0) || q.A1 < q.A2) throw DomainError("need 0 < A2 <= A1");
  if (!(A3 <= 1.0)) throw DomainError("need A3 <= 1");
  if (!(q.A1 < A3)) throw DomainError("need A1 < A3");
  const int m = static_cast<int>(std::floor((1.0 / A3) * (1.0 + 1e-12)));
  if (m < 1) throw DomainError("need A3 <= 1");
  if (q.A2 * (m + 1) < 1.0 - 1e-12)
    throw DomainError("need 1/(m+1) <= A2 with m = " + std::to_string(m));

  SqueezeQuery t;
  t.A1 = room_transform_inverse(m, q.A1);
  t.A2 = room_transform_inverse(m, q.A2);
  const double t3 = room_transform_inverse(m, A3);
  if (std::isfinite(t3)) t.A3 = t3;
  t.maxPrime = q.maxPrime;
  auto inner = std::make_shared<SqueezeCertificate>(find_obstruction(t));
  if (inner->kind == CertKind::None) return SqueezeCertificate{CertKind::None, 0, 0, 0, 0, q, nullptr};

  SqueezeCertificate c;
  c.kind = CertKind::Conjugated;
  c.m = m;
  c.areas = q;
  // k / l' in the transformed picture corresponds to k / (l' + m k).
  if (inner->kind == CertKind::IntegerK) {
    c.k = inner->K;
    c.l = 1 + m * inner->K;
  } else {
    c.k = inner->k;
    c.l = inner->l + m * inner->k;
  }
  c.inner = inner;
  return c;
}

std::string validate_certificate(const SqueezeCertificate& c) {
  const auto& q = c.areas;
  std::ostringstream err;
  switch (c.kind) {
    case CertKind::IntegerK:
      if (!(q.A2 <= c.K && c.K <= q.A1)) err << "K outside [A2, A1]; ";
      break;
    case CertKind::PrimeFraction:
      if (c.k % 2 == 0 || !is_prime(c.k)) err << "k not an odd prime; ";
      if (!(0 < c.l && c.l < c.k)) err << "l not in (0, k); ";
      if (!(q.A2 * c.l <= c.k && c.k < q.A1 * c.l)) err << "k/l outside [A2, A1); ";
      break;
    case CertKind::EqualRadii:
      if (q.A1 != q.A2) err << "radii differ; ";
      if (c.k % 2 == 0 || !is_prime(c.k)) err << "k not an odd prime; ";
      if (!(0 < c.l && c.l < c.k)) err << "l not in (0, k); ";
      if (!(q.A1 * c.l <= c.k)) err << "k/l below A; ";
      break;
    case CertKind::Conjugated: {
      if (!c.inner) {
        err << "missing inner certificate; ";
        break;
      }
      err << validate_certificate(*c.inner);
      // An integer inner threshold K maps to k / l = K / (1 + mK); K = 1
      // sits on the upper end of the window.
      const bool upperOk = c.inner->kind == CertKind::IntegerK ? c.l <= (c.m + 1) * c.k : c.l < (c.m + 1) * c.k;
      if (!(c.m * c.k < c.l && upperOk)) err << "l outside (mk, (m+1)k); ";
      const double frac = static_cast<double>(c.k) / c.l;
      const double tol = 1e-12;
      if (c.inner->kind == CertKind::IntegerK) {
        if (!(q.A2 <= frac + tol && frac <= q.A1 + tol)) err << "k/l outside [A2, A1]; ";
      } else if (!(q.A2 <= frac + tol && frac < q.A1)) {
        err << "k/l outside [A2, A1); ";
      }
      const auto& t = c.inner->areas;
      if (std::abs(t.A1 - room_transform_inverse(c.m, q.A1)) > 1e-12 * t.A1 ||
          std::abs(t.A2 - room_transform_inverse(c.m, q.A2)) > 1e-12 * t.A2)
        err << "inner areas are not the transformed areas; ";
      break;
    }
    case CertKind::None: err << "no certificate; "; break;
  }
  return err.str();
}

EvidenceReport evidence(const SqueezeCertificate& cert, int n, const std::string& family) {
  if (family != "limit") throw InvalidArgument("unsupported profile family '" + family + "'");
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (cert.kind == CertKind::None) throw InvalidArgument("no certificate");
  if (cert.kind == CertKind::Conjugated) {
    if (!cert.inner) throw InvalidArgument("missing inner certificate");
    auto rep = evidence(*cert.inner, n, family);
    rep.summary = "Phi_" + std::to_string(cert.m) + " conjugation to areas (" + num(cert.inner->areas.A1) +
                  ", " + num(cert.inner->areas.A2) + "); " + rep.summary;
    return rep;
  }

  const auto& q = cert.areas;
  EvidenceReport rep;
  rep.family = family;
  int k = 1;  // group order; 1 = plain F_2 complexes
  int l = 1;
  double a = 0.0;
  double A1 = q.A1, A2 = q.A2;
  if (cert.kind == CertKind::IntegerK) {
    a = cert.K;
    if (!(a < A1)) {
      A1 = enlarge(A1);
      rep.neighborhood = true;
    }
  } else {
    k = cert.k;
    l = cert.l;
    a = cert.k;
  }
  double A3 = q.A3 ? *q.A3 : 2.0 * A1;
  if (!(A3 > A1)) A3 = 2.0 * A1;
  rep.degree = 2 * n * l;
  rep.a = a;
  rep.A1used = A1;
  rep.A2used = A2;
  rep.A3used = A3;

  const auto mode = (k == 1) ? HomologyMode::Plain : HomologyMode::Equivariant;
  const double areas[3] = {A3, A1, A2};
  FilteredComplex cx[3];
  for (int i = 0; i < 3; ++i) {
    cx[i] = limit_complex_area(n, areas[i], k);
    const auto bc = barcode(cx[i], mode);
    rep.ranks[i] = bc.rank_at(rep.degree, a);
    rep.prequantizedRanks[i] = tensor_circle(bc.figure_view(n)).rank_at(rep.degree + 1, a);
  }
  rep.topMap = inclusion_rank(cx[0], cx[1], rep.degree, a, mode);
  rep.throughMap = inclusion_rank(cx[0], cx[2], rep.degree, a, mode);

  const std::string G = (k == 1) ? "G" : "G_Z" + std::to_string(k);
  std::ostringstream s;
  s << G << "_" << rep.degree << " at a = " << num(a) << ": ranks (R3, R1, R2) = (" << rep.ranks[0] << ", "
    << rep.ranks[1] << ", " << rep.ranks[2] << "), top map rank " << rep.topMap << ", map into B(R2) rank "
    << rep.throughMap;
  if (cert.kind == CertKind::EqualRadii) {
    // Single bar check: the bar of B(R) in this degree dies at l A <= k
    // while the room's bar is alive at k.
    rep.contradiction = rep.ranks[0] == 1 && rep.ranks[2] == 0;
    s << "; the degree-" << rep.degree << " bar of B(R) dies at " << num(l * q.A1) << " <= " << k;
  } else {
    rep.contradiction = rep.topMap == 1 && rep.ranks[1] == 1 && rep.ranks[2] == 0;
  }
  s << (rep.contradiction ? "; a squeezing would factor an isomorphism through the zero group"
                          : "; no contradiction");
  if (rep.neighborhood) s << " (domain enlarged to area " << num(A1) << ")";
  rep.summary = s.str();
  return rep;
}

nlohmann::ordered_json certificate_json(const SqueezeCertificate& c, int n, const EvidenceReport* report) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(c.kind);
  if (c.kind == CertKind::IntegerK) j["K"] = c.K;
  if (c.kind == CertKind::PrimeFraction || c.kind == CertKind::EqualRadii || c.kind == CertKind::Conjugated) {
    j["k"] = c.k;
    j["l"] = c.l;
  }
  if (c.kind == CertKind::Conjugated) j["m"] = c.m;
  nlohmann::ordered_json areas;
  areas["A1"] = c.areas.A1;
  areas["A2"] = c.areas.A2;
  if (c.areas.A3) areas["A3"] = *c.areas.A3;
  j["areas"] = areas;
  if (c.kind == CertKind::Conjugated && c.inner) j["inner"] = certificate_json(*c.inner, n, nullptr);
  if (c.kind != CertKind::None) {
    nlohmann::ordered_json ev;
    ev["degree"] = report ? report->degree : n * c.evidenceDegree();
    ev["a"] = report ? report->a : c.evidenceThreshold();
    if (report) {
      ev["ranks"] = {report->ranks[0], report->ranks[1], report->ranks[2]};
      ev["topMapRank"] = report->topMap;
      ev["mapIntoR2Rank"] = report->throughMap;
      ev["prequantizedRanks"] = {report->prequantizedRanks[0], report->prequantizedRanks[1],
                                 report->prequantizedRanks[2]};
      ev["neighborhood"] = report->neighborhood;
      ev["contradiction"] = report->contradiction;
      ev["summary"] = report->summary;
    }
    j["evidence"] = ev;
  }
  return j;
}

}  // namespace gfs
