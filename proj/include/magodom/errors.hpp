#pragma once

#include <stdexcept>
#include <string>

namespace magodom {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};

struct EvaluationInsideExclusionZone : Error {
  using Error::Error;
};
struct NotSymmetricTraceless : Error {
  using Error::Error;
};
struct DegenerateArray : Error {
  using Error::Error;
};
struct EmptyInterval : Error {
  using Error::Error;
};
struct SingularNormalEquations : Error {
  using Error::Error;
};
struct NonFiniteCost : Error {
  using Error::Error;
};
struct SingularInformation : Error {
  using Error::Error;
};
struct AllInvariantsConstant : Error {
  using Error::Error;
};
struct NoOverlappingTimestamps : Error {
  using Error::Error;
};

}  // namespace magodom
