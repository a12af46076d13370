#pragma once

#include <stdexcept>
#include <string>

namespace eulertopo {

// Every recoverable failure maps to one of these; callers that want to keep
// going catch the base class.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define EULERTOPO_DEFINE_ERROR(NAME)                            \
  class NAME : public Error {                                   \
   public:                                                      \
    explicit NAME(const std::string& what) : Error(what) {}     \
  }

EULERTOPO_DEFINE_ERROR(DegenerateVector);
EULERTOPO_DEFINE_ERROR(InvalidParameter);
EULERTOPO_DEFINE_ERROR(GaugeObstruction);
EULERTOPO_DEFINE_ERROR(IllConditionedPlaquette);
EULERTOPO_DEFINE_ERROR(ZeroLink);
EULERTOPO_DEFINE_ERROR(PathTooCoarse);
EULERTOPO_DEFINE_ERROR(AmbiguousRank);
EULERTOPO_DEFINE_ERROR(UnwrapFailure);
EULERTOPO_DEFINE_ERROR(NotFlattened);
EULERTOPO_DEFINE_ERROR(BoundaryNotFixed);
EULERTOPO_DEFINE_ERROR(OpenCurve);
EULERTOPO_DEFINE_ERROR(CurvesTooClose);
EULERTOPO_DEFINE_ERROR(RamanInvalid);
EULERTOPO_DEFINE_ERROR(Infeasible);
EULERTOPO_DEFINE_ERROR(GapClosed);
EULERTOPO_DEFINE_ERROR(OptimizerStalled);
EULERTOPO_DEFINE_ERROR(DegenerateTop);

#undef EULERTOPO_DEFINE_ERROR

}  // namespace eulertopo
