#pragma once

#include <stdexcept>
#include <string>

namespace asymptolab {

/// Base class of every error raised by the library. `module()` names the
/// subsystem that raised it so the CLI can report provenance.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

#define ASYMPTOLAB_DEFINE_ERROR(Name, Module)                              \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(Module, what) {}    \
    };

// core-field
ASYMPTOLAB_DEFINE_ERROR(GridMismatch, "core-field")
ASYMPTOLAB_DEFINE_ERROR(InvalidArgument, "core-field")
ASYMPTOLAB_DEFINE_ERROR(ScaleOutOfRange, "core-field")
ASYMPTOLAB_DEFINE_ERROR(BoundaryMassWarning, "core-field")
ASYMPTOLAB_DEFINE_ERROR(NonFiniteField, "core-field")

// heat-kernel
ASYMPTOLAB_DEFINE_ERROR(OrderTooHigh, "heat-kernel")

// pde-solver
ASYMPTOLAB_DEFINE_ERROR(StepFailure, "pde-solver")
ASYMPTOLAB_DEFINE_ERROR(BoxExhausted, "pde-solver")

// profiles
ASYMPTOLAB_DEFINE_ERROR(QuadratureBudgetExceeded, "profiles")
ASYMPTOLAB_DEFINE_ERROR(RangeViolation, "profiles")
ASYMPTOLAB_DEFINE_ERROR(TailBudgetExceeded, "profiles")

// analysis
ASYMPTOLAB_DEFINE_ERROR(PlateauNotReached, "analysis")
ASYMPTOLAB_DEFINE_ERROR(DegenerateFit, "analysis")

// cli
ASYMPTOLAB_DEFINE_ERROR(ConfigInvalid, "cli")
ASYMPTOLAB_DEFINE_ERROR(MissingData, "cli")

#undef ASYMPTOLAB_DEFINE_ERROR

}  // namespace asymptolab
