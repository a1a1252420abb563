#pragma once

#include <stdexcept>
#include <string>

namespace cfkit {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CFKIT_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                               \
        explicit Name(const std::string& what) : Error(what) {}         \
    }

CFKIT_DEFINE_ERROR(ShapeMismatch);
CFKIT_DEFINE_ERROR(NonSymmetricSpectrum);
CFKIT_DEFINE_ERROR(InvalidSigma);
CFKIT_DEFINE_ERROR(NonPositiveLambda);
CFKIT_DEFINE_ERROR(MarginTooLarge);
CFKIT_DEFINE_ERROR(StaleCache);
CFKIT_DEFINE_ERROR(TooLarge);
CFKIT_DEFINE_ERROR(SingularSystem);
CFKIT_DEFINE_ERROR(NonFiniteEvaluation);
CFKIT_DEFINE_ERROR(DegenerateRect);
CFKIT_DEFINE_ERROR(UninitializedState);
CFKIT_DEFINE_ERROR(EmptyInput);
CFKIT_DEFINE_ERROR(InvalidRange);
CFKIT_DEFINE_ERROR(MissingGroundTruth);
CFKIT_DEFINE_ERROR(FrameCountMismatch);
CFKIT_DEFINE_ERROR(UnsupportedFormat);
CFKIT_DEFINE_ERROR(DivergedLoss);
CFKIT_DEFINE_ERROR(BadCheckpoint);

#undef CFKIT_DEFINE_ERROR

}  // namespace cfkit
