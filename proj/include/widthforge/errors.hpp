#pragma once

#include <stdexcept>
#include <string>

namespace widthforge {

/// Malformed or out-of-contract input (bad sizes, bad files, bad config).
class ValidationError : public std::invalid_argument
{
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A field or coefficient set that should be antipodally odd is not.
class ParityViolation : public ValidationError
{
public:
    explicit ParityViolation(const std::string& what) : ValidationError(what) {}
};

} // namespace widthforge
