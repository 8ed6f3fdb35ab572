#pragma once

#include <stdexcept>
#include <string>

namespace pmh {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define PMH_DEFINE_ERROR(name)                  \
  struct name : Error {                         \
    using Error::Error;                         \
  }

PMH_DEFINE_ERROR(HermiticityViolation);
PMH_DEFINE_ERROR(DegenerateLambdas);
PMH_DEFINE_ERROR(NumericallyAmbiguous);
PMH_DEFINE_ERROR(NotPhysical);
PMH_DEFINE_ERROR(RootPairingFailure);
PMH_DEFINE_ERROR(ZeroAmplitude);
PMH_DEFINE_ERROR(UnstableDrift);
PMH_DEFINE_ERROR(SingularP);
PMH_DEFINE_ERROR(NotUnitary);
PMH_DEFINE_ERROR(ShapeMismatch);
PMH_DEFINE_ERROR(IndexOutOfRange);
PMH_DEFINE_ERROR(IntegratorFailure);
PMH_DEFINE_ERROR(NormCollapse);
PMH_DEFINE_ERROR(InsufficientTrajectories);
PMH_DEFINE_ERROR(CholeskyFailure);
PMH_DEFINE_ERROR(InvalidN);
PMH_DEFINE_ERROR(ConfigError);

#undef PMH_DEFINE_ERROR

}  // namespace pmh
