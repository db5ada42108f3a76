#pragma once

#include <stdexcept>
#include <string>

namespace csm {

// All library failures derive from Error so callers can catch one type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct CycleError : Error {
    using Error::Error;
};
struct DuplicateElementError : Error {
    using Error::Error;
};
struct UnknownElementError : Error {
    using Error::Error;
};
struct SpaceMismatchError : Error {
    using Error::Error;
};
struct PartitionMismatchError : Error {
    using Error::Error;
};
struct DimensionMismatchError : Error {
    using Error::Error;
};
struct NonPositiveJointError : Error {
    using Error::Error;
};
struct RegionNotNestedError : Error {
    using Error::Error;
};
struct InvalidRegionError : Error {
    using Error::Error;
};
struct TooLargeError : Error {
    using Error::Error;
};
struct NonPositiveBeliefError : Error {
    using Error::Error;
};
struct InfeasibleInputError : Error {
    using Error::Error;
};
struct PositivityRequiredError : Error {
    using Error::Error;
};
struct DegenerateBeliefError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace csm
