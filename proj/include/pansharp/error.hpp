#pragma once

#include <stdexcept>
#include <string>

namespace pansharp {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raster dimensions or band counts disagree, or a length-typed argument
/// (weight vector, ratio) does not fit the image it is applied to.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An argument is outside its documented domain.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// File or format problem; the message carries the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace pansharp
