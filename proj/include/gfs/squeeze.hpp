#pragma once

// Contact non-squeezing certificates: obstruction search over integer and
// prime-fraction thresholds, Phi_m conjugation for sub-unit areas, and the
// barcode evidence behind the diagram contradiction.
//
// Areas are A = pi R^2.

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

namespace gfs {

struct SqueezeQuery {
  double A1 = 0.0;  // domain ball
  double A2 = 0.0;  // target ball
  std::optional<double> A3;  // ambient room (optional)
  int maxPrime = 10000;

  void validate() const;  // throws InvalidArgument
};

enum class CertKind { IntegerK, PrimeFraction, EqualRadii, Conjugated, None };
std::string to_string(CertKind k);

struct SqueezeCertificate {
  CertKind kind = CertKind::None;
  int K = 0;             // integerK
  int k = 0, l = 0;      // primeFraction / equalRadii / conjugated (original coordinates)
  int m = 0;             // conjugated: Phi_m index
  SqueezeQuery areas;    // the areas the certificate speaks about
  std::shared_ptr<const SqueezeCertificate> inner;  // conjugated: certificate for transformed areas

  // Degree (for n = 1; multiply by n) and threshold of the evidence.
  int evidenceDegree() const;
  double evidenceThreshold() const;
};

// Bound on k that guarantees a prime fraction in [A2, A1) (A2 >= 1, A1 > A2):
// the next odd prime above 2 A1 A2 / (A1 - A2) + 2.
int suggested_prime_bound(double A1, double A2);

// Priority: integer K in [A2, A1]; prime fraction (A2 >= 1); equal radii
// (A1 = A2 >= 1); conjugated (A1 < 1 with room); else none.
// Throws SearchBoundExceeded when a prime fraction exists but k > maxPrime.
SqueezeCertificate find_obstruction(const SqueezeQuery& q);

// A / (1 + m A): area of the image of a ball of area A under Phi_m.
double room_transform(int m, double A);
// A / (1 - m A): inverse of room_transform (+inf at A = 1/m).
double room_transform_inverse(int m, double A);
// m = floor(1/A3); requires 1/(m+1) <= A2 <= A1 < A3 <= 1/m, else DomainError.
SqueezeCertificate room_obstruction(const SqueezeQuery& q);

// Empty string if the certificate satisfies its defining inequalities.
std::string validate_certificate(const SqueezeCertificate& c);

struct EvidenceReport {
  std::string family = "limit";
  int degree = 0;       // 2nl or 2n
  double a = 0.0;       // threshold k or K
  int ranks[3] = {0, 0, 0};  // G at a in `degree` for R3, R1, R2
  int topMap = 0;            // rank of G(R3) -> G(R1) (chain route)
  int throughMap = 0;        // rank of G(R3) -> G(R2) (chain route)
  int prequantizedRanks[3] = {0, 0, 0};  // degree + 1 of the circle tensor
  bool neighborhood = false;  // R1 enlarged to an open neighborhood
  double A1used = 0.0, A2used = 0.0, A3used = 0.0;
  bool contradiction = false;
  std::string summary;
};

// Barcode evidence from the j -> infinity limit barcodes ("limit" is the
// only supported family).  Requires cert.kind != None.
EvidenceReport evidence(const SqueezeCertificate& cert, int n = 1, const std::string& family = "limit");

// {kind, K?, k?, l?, m?, areas: {A1, A2, A3?}, evidence: {degree, a, ranks?}}
nlohmann::ordered_json certificate_json(const SqueezeCertificate& c, int n = 1,
                                        const EvidenceReport* report = nullptr);

}  // namespace gfs
