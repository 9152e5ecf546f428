#ifndef HLCM_ERROR_HPP
#define HLCM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hlcm {

/// Bad input to an operation: violated precondition, malformed configuration.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed dataset or sidecar file. Messages carry the offending line where known.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hlcm

#endif
