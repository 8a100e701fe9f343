#ifndef TAXDIFF_ERRORS_HPP
#define TAXDIFF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace taxdiff {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define TAXDIFF_DEFINE_ERROR(Name)              \
    struct Name : Error {                       \
        using Error::Error;                     \
    }

// sequence codec
TAXDIFF_DEFINE_ERROR(SequenceTooLong);
TAXDIFF_DEFINE_ERROR(EmptySequence);
TAXDIFF_DEFINE_ERROR(InvalidResidue);
TAXDIFF_DEFINE_ERROR(MalformedFasta);
TAXDIFF_DEFINE_ERROR(DecodesEmpty);

// taxonomy
TAXDIFF_DEFINE_ERROR(MalformedDump);
TAXDIFF_DEFINE_ERROR(DanglingParent);
TAXDIFF_DEFINE_ERROR(UnknownTaxId);
TAXDIFF_DEFINE_ERROR(CycleDetected);

// diffusion
TAXDIFF_DEFINE_ERROR(InvalidScheduleParams);
TAXDIFF_DEFINE_ERROR(TimestepOutOfRange);
TAXDIFF_DEFINE_ERROR(ShapeMismatch);
TAXDIFF_DEFINE_ERROR(NonPositiveVariance);

// denoiser
TAXDIFF_DEFINE_ERROR(LabelOutOfRange);
TAXDIFF_DEFINE_ERROR(PatchSizeMismatch);
TAXDIFF_DEFINE_ERROR(UnknownMethod);
TAXDIFF_DEFINE_ERROR(InvalidConfig);
TAXDIFF_DEFINE_ERROR(GraphNotRecorded);

// training / persistence
TAXDIFF_DEFINE_ERROR(EmptyBatch);
TAXDIFF_DEFINE_ERROR(NonFiniteLoss);
TAXDIFF_DEFINE_ERROR(CorruptCheckpoint);
TAXDIFF_DEFINE_ERROR(VersionMismatch);
TAXDIFF_DEFINE_ERROR(IoFailure);

// sampling / cli
TAXDIFF_DEFINE_ERROR(UntrainedModel);
TAXDIFF_DEFINE_ERROR(InvalidLabel);

#undef TAXDIFF_DEFINE_ERROR

}  // namespace taxdiff

#endif
