#pragma once

#include <stdexcept>
#include <string>

namespace ocsim {

/// Base class for all library failures so callers can catch one type.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "Error"; }
};

#define OCSIM_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                               \
        explicit Name(const std::string& what) : Error(what) {}         \
        const char* kind() const noexcept override { return #Name; }    \
    }

OCSIM_DEFINE_ERROR(QuadratureNonConvergence);
OCSIM_DEFINE_ERROR(SymbolStreamExhausted);
OCSIM_DEFINE_ERROR(DimensionMismatch);
OCSIM_DEFINE_ERROR(IllConditioned);
OCSIM_DEFINE_ERROR(StationarityViolation);
OCSIM_DEFINE_ERROR(RecursionBreakdown);
OCSIM_DEFINE_ERROR(BudgetExceeded);
OCSIM_DEFINE_ERROR(ZeroCorrelator);
OCSIM_DEFINE_ERROR(DegenerateAlpha);
OCSIM_DEFINE_ERROR(SingularInterpolation);
OCSIM_DEFINE_ERROR(NonConvergence);
OCSIM_DEFINE_ERROR(InsufficientSamples);
OCSIM_DEFINE_ERROR(ConfigError);
OCSIM_DEFINE_ERROR(IoFailure);

#undef OCSIM_DEFINE_ERROR

}  // namespace ocsim
