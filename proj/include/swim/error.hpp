#pragma once

#include <stdexcept>
#include <string>

namespace swim {

/// Base class for all failures raised by the library.  `what()` carries a
/// human-readable message prefixed with the error kind.
class Error : public std::runtime_error {
public:
  Error(const std::string& kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(kind) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

#define SWIM_DEFINE_ERROR(Name)                                \
  class Name : public Error {                                  \
  public:                                                      \
    explicit Name(const std::string& msg) : Error(#Name, msg) {} \
  }

SWIM_DEFINE_ERROR(InvalidGeometry);
SWIM_DEFINE_ERROR(TagError);
SWIM_DEFINE_ERROR(VolumeError);
SWIM_DEFINE_ERROR(SolverError);
SWIM_DEFINE_ERROR(CompatibilityError);
SWIM_DEFINE_ERROR(ProjectionError);
SWIM_DEFINE_ERROR(SmallDataError);
SWIM_DEFINE_ERROR(ExtensionDiverged);
SWIM_DEFINE_ERROR(GeometryError);
SWIM_DEFINE_ERROR(AssemblyError);
SWIM_DEFINE_ERROR(StabilizabilityError);
SWIM_DEFINE_ERROR(FixedPointDiverged);
SWIM_DEFINE_ERROR(IOError);
SWIM_DEFINE_ERROR(ConfigError);

#undef SWIM_DEFINE_ERROR

}  // namespace swim
