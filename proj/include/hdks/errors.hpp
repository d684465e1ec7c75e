#pragma once

#include <stdexcept>
#include <string>

namespace hdks {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class SingularMetric : public Error {
public:
    using Error::Error;
};

// HD coordinates do not exist on the Kruskal horizon uv = 0.
class HorizonPoint : public Error {
public:
    using Error::Error;
};

class NotCausal : public Error {
public:
    using Error::Error;
};

class StepUnderflow : public Error {
public:
    using Error::Error;
};

class DomainExit : public Error {
public:
    using Error::Error;
};

class ToleranceNotMet : public Error {
public:
    using Error::Error;
};

class NoClosedForm : public Error {
public:
    using Error::Error;
};

}  // namespace hdks
