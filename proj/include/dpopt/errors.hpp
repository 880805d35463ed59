#pragma once

#include <stdexcept>
#include <string>

namespace dpopt {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define DPOPT_DEFINE_ERROR(name)                                   \
  struct name : Error {                                            \
    explicit name(const std::string& msg) : Error(#name ": " + msg) {} \
  }

// model / scenario construction
DPOPT_DEFINE_ERROR(InfeasibleSpec);
DPOPT_DEFINE_ERROR(DimensionMismatch);
DPOPT_DEFINE_ERROR(NonPositiveCount);

// projection
DPOPT_DEFINE_ERROR(InfeasibleSet);
DPOPT_DEFINE_ERROR(NonFiniteInput);
DPOPT_DEFINE_ERROR(TooLarge);

// privacy
DPOPT_DEFINE_ERROR(BadK);
DPOPT_DEFINE_ERROR(NonPositiveParam);
DPOPT_DEFINE_ERROR(IndexOutOfRange);

// descent
DPOPT_DEFINE_ERROR(InconsistentSchedule);
DPOPT_DEFINE_ERROR(NoConvergence);
DPOPT_DEFINE_ERROR(NonPositiveReference);

// evcharging
DPOPT_DEFINE_ERROR(FeasibilityResampleExhausted);
DPOPT_DEFINE_ERROR(BadCSV);
DPOPT_DEFINE_ERROR(UnknownSource);

// sensitivity lab
DPOPT_DEFINE_ERROR(DegenerateInstance);

// harness
DPOPT_DEFINE_ERROR(ConfigError);

#undef DPOPT_DEFINE_ERROR

}  // namespace dpopt
