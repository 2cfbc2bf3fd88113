#pragma once

#include <stdexcept>
#include <string>

namespace gfs {

// Base of every error raised by the library; the CLI maps it to exit code 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define GFS_ERROR(Name)                                   \
  struct Name : Error {                                   \
    explicit Name(const std::string& what)                \
        : Error(std::string(#Name ": ") + what) {}        \
  }

GFS_ERROR(InvalidArgument);
GFS_ERROR(NonMonotoneProfile);
GFS_ERROR(AngleOutOfRange);
GFS_ERROR(MidpointSolveFailed);
GFS_ERROR(EvenFactorCount);
GFS_ERROR(EvenK);
GFS_ERROR(NotNormalized);
GFS_ERROR(NoConvergence);
GFS_ERROR(NotFibreCritical);
GFS_ERROR(OrbitRelationViolated);
GFS_ERROR(GaugeDegenerate);
GFS_ERROR(NonPrimeK);
GFS_ERROR(NonFree);
GFS_ERROR(ThresholdOnSpectrum);
GFS_ERROR(SearchBoundExceeded);
GFS_ERROR(DomainError);

#undef GFS_ERROR

}  // namespace gfs
