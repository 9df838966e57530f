#pragma once

#include <stdexcept>
#include <string>

namespace fuseforge {

// Root of every error raised by the library. Subclasses only exist so callers
// (and tests) can tell the failure classes apart.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FUSEFORGE_ERROR(Name)                      \
    class Name : public Error {                    \
    public:                                        \
        using Error::Error;                        \
    }

FUSEFORGE_ERROR(StructuralError);
FUSEFORGE_ERROR(ReductionError);
FUSEFORGE_ERROR(ConfigurationError);
FUSEFORGE_ERROR(WrongCaseError);
FUSEFORGE_ERROR(ContractError);
FUSEFORGE_ERROR(PlacementError);
FUSEFORGE_ERROR(ParameterError);
FUSEFORGE_ERROR(DanglingReferenceError);
FUSEFORGE_ERROR(PipelineOrderError);
FUSEFORGE_ERROR(AlgebraicPreconditionError);
FUSEFORGE_ERROR(CoverageError);
FUSEFORGE_ERROR(UsageError);
FUSEFORGE_ERROR(IoError);
FUSEFORGE_ERROR(ParseError);

#undef FUSEFORGE_ERROR

} // namespace fuseforge
