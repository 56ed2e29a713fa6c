#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace occ {

// Base for all failures raised by the library. `code()` is stable and
// machine-readable; the CLI maps it to exit codes and stderr lines.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define OCC_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                             \
        explicit Name(const std::string& what) : Error(#Name, what) {} \
    }

OCC_DEFINE_ERROR(DomainError);
OCC_DEFINE_ERROR(PoleEvaluation);
OCC_DEFINE_ERROR(MgfDivergence);
OCC_DEFINE_ERROR(DegenerateLeadingCoefficient);
OCC_DEFINE_ERROR(RootCountMismatch);
OCC_DEFINE_ERROR(ConvergenceFailure);
OCC_DEFINE_ERROR(SingularSystem);
OCC_DEFINE_ERROR(BarrierOrder);
OCC_DEFINE_ERROR(NonConvergence);
OCC_DEFINE_ERROR(RejectionStall);

#undef OCC_DEFINE_ERROR

}  // namespace occ
