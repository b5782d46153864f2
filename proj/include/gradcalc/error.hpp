#pragma once

#include <stdexcept>
#include <string>

namespace gradcalc {

// Structural errors: malformed inputs (rank/variable-list/grading mismatches,
// singular matrices where invertible ones are required, bad parses).
class structural_error : public std::runtime_error {
public:
    explicit structural_error(const std::string& what) : std::runtime_error(what) {}
};

// Validation errors: an object fails the axioms it claims to satisfy
// (associativity defect, Leibniz defect, ...). Carries a witness string.
class validation_error : public std::runtime_error {
public:
    validation_error(const std::string& what, std::string witness)
        : std::runtime_error(what), witness_(std::move(witness)) {}
    const std::string& witness() const { return witness_; }

private:
    std::string witness_;
};

} // namespace gradcalc
