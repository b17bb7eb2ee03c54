#pragma once

#include <stdexcept>
#include <string>

namespace pqa {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: empty corpus, invalid configuration, unknown names.
class InputError : public Error {
public:
    using Error::Error;
};

/// A file could not be parsed. The message names the offending JSON path.
class ParseError : public InputError {
public:
    using InputError::InputError;
};

/// Filesystem or durability failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace pqa
