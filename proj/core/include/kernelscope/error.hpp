#pragma once

#include <stdexcept>
#include <string>

namespace kscope {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or a violated precondition / invariant. The CLI maps this to exit status 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed or truncated file content.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Filter whose centered norm is at or below the degeneracy threshold.
class DegenerateFilter : public Error {
public:
    explicit DegenerateFilter(double centered_norm);
    double centered_norm() const noexcept { return norm_; }

private:
    double norm_;
};

class NotCentered : public ValidationError {
public:
    explicit NotCentered(double sum);
};

/// Min-max encoding of a kernel whose entries are all equal.
class ConstantFilter : public ValidationError {
public:
    ConstantFilter();
};

}  // namespace kscope
