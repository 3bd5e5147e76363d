#pragma once

#include <stdexcept>
#include <string>

namespace orbsim {

// Base for all library errors so callers can catch orbsim::Error generically.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct NonFiniteInput : Error {
  using Error::Error;
};
struct NonPositiveMass : Error {
  using Error::Error;
};
struct AsymmetricInertia : Error {
  using Error::Error;
};
struct DegenerateGrasp : Error {
  using Error::Error;
};
struct NonPositiveEps : Error {
  using Error::Error;
};
struct EmptyDataset : Error {
  using Error::Error;
};
struct DivergedFit : Error {
  using Error::Error;
};
struct InvalidRadius : Error {
  using Error::Error;
};
struct InvalidGrid : Error {
  using Error::Error;
};
struct EmptyRobots : Error {
  using Error::Error;
};
struct InvalidDt : Error {
  using Error::Error;
};
struct InvalidHorizon : Error {
  using Error::Error;
};
struct UnknownDebris : Error {
  using Error::Error;
};
struct DoubleClaim : Error {
  using Error::Error;
};
struct InvalidN : Error {
  using Error::Error;
};
struct InvalidHyper : Error {
  using Error::Error;
};
struct InstanceTooLarge : Error {
  using Error::Error;
};
struct UnknownPolicy : Error {
  using Error::Error;
};
struct MissingPolicy : Error {
  using Error::Error;
};
struct FileNotFound : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& field, const std::string& what)
      : Error("invalid value for '" + field + "': " + what), field_name(field) {}
  std::string field_name;
};

}  // namespace orbsim
