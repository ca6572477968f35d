#ifndef SUBKAM_ERRORS_HPP
#define SUBKAM_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace subkam {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid numeric parameter (negative weight, r <= 0, too few samples, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Operand outside the quadratic class or with incompatible cutoffs.
class ClassError : public Error {
public:
    using Error::Error;
};

// A block touched by the right-hand side failed its small-divisor threshold.
class ResonanceError : public Error {
public:
    ResonanceError(const std::string& what, std::vector<int> k, int n, int m, std::string family)
        : Error(what), k(std::move(k)), n(n), m(m), family(std::move(family)) {}
    std::vector<int> k;
    int n;
    int m;
    std::string family;
};

// Lie series terms stopped decreasing.
class StepSizeError : public Error {
public:
    using Error::Error;
};

// Measured perturbation size did not decrease.
class DivergenceError : public Error {
public:
    using Error::Error;
};

// Every parameter sample was excluded.
class EmptySetError : public Error {
public:
    using Error::Error;
};

// Step refused by the smallness gate.
class GateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace subkam

#endif
