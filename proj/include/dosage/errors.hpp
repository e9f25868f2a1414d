#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dosage {

// Invalid argument to a library operation (out-of-range dose, bad dimensions).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input file or record.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Subject-record ingestion failure; names the offending record.
class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical breakdown in the LP solver (pivot collapse, unbounded region).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Trial evidence admits no threshold distribution under the maintained
// monotonicity assumptions and restrictions.
class InconsistentEvidenceError : public std::runtime_error {
public:
    explicit InconsistentEvidenceError(const std::string& msg,
                                       std::vector<std::string> violations = {})
        : std::runtime_error(msg), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

// A maintained restriction is contradicted by the observed data itself
// (e.g. an arm's joint outcome distribution does not factorize under the
// independence restriction).
class RestrictionRefutedError : public std::runtime_error {
public:
    RestrictionRefutedError(const std::string& msg, int arm_dose, double deviation)
        : std::runtime_error(msg), arm_dose_(arm_dose), deviation_(deviation) {}

    int arm_dose() const { return arm_dose_; }
    double deviation() const { return deviation_; }

private:
    int arm_dose_;
    double deviation_;
};

// A restriction is valid but not handled by the requested code path.
class UnsupportedRestrictionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A requested enumeration exceeds the configured work budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dosage
