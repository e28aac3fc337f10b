#pragma once

#include <stdexcept>
#include <string>

namespace homoflow {

// Base for every error raised by the library. Subclasses mirror the failure
// kinds callers are expected to branch on.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HOMOFLOW_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
    explicit Name() : Error(#Name) {}        \
  }

HOMOFLOW_DEFINE_ERROR(DegenerateProjection);
HOMOFLOW_DEFINE_ERROR(DegenerateConfiguration);
HOMOFLOW_DEFINE_ERROR(Singular);
HOMOFLOW_DEFINE_ERROR(TooFewFeatures);
HOMOFLOW_DEFINE_ERROR(NoConsensus);
HOMOFLOW_DEFINE_ERROR(EmptyTrack);
HOMOFLOW_DEFINE_ERROR(EmptyDataset);
HOMOFLOW_DEFINE_ERROR(NoCandidates);
HOMOFLOW_DEFINE_ERROR(ParameterOutOfRange);
HOMOFLOW_DEFINE_ERROR(MissingHistory);
HOMOFLOW_DEFINE_ERROR(DimensionMismatch);
HOMOFLOW_DEFINE_ERROR(EmptySet);
HOMOFLOW_DEFINE_ERROR(LabelMismatch);
HOMOFLOW_DEFINE_ERROR(ViewportEscape);
HOMOFLOW_DEFINE_ERROR(InvalidInput);

#undef HOMOFLOW_DEFINE_ERROR

}  // namespace homoflow
