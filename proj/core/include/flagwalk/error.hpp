#pragma once

#include <stdexcept>
#include <string>

namespace flagwalk {

// Bad input or violated precondition. Maps to exit code 1 in the CLI.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical routine could not deliver a trustworthy answer. Exit code 2.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecompositionFailed : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class EstimationFailed : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

// Inner product too close to zero to decide its sign reliably.
class AmbiguousSign : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class InsufficientMass : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class PreconditionViolated : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class NotOnCircle : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DomainError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class MustEstimateFirst : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class TreeTooLarge : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class SolveRefused : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class EmptySupport : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DegenerateFit : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

[[noreturn]] void throw_invalid(const std::string& what);

}  // namespace flagwalk
