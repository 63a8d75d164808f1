#pragma once

#include <stdexcept>
#include <string>

namespace nlads {

struct SingularPoint : std::domain_error {
    using std::domain_error::domain_error;
};

struct DivergentNorm : std::domain_error {
    using std::domain_error::domain_error;
};

struct DomainTooSmall : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct BadResolution : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct TooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotRegular : std::logic_error {
    using std::logic_error::logic_error;
};

struct DegenerateCycle : std::domain_error {
    using std::domain_error::domain_error;
};

struct HypothesisViolated : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct StepTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CflViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroMass : std::domain_error {
    using std::domain_error::domain_error;
};

struct Underdetermined : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedPattern : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace nlads
