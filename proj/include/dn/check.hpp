#pragma once

#include <stdexcept>
#include <string>

namespace dn {

// Thrown when a caller breaks a documented precondition (dimension
// mismatches, out-of-range ratios, zero denominators).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

} // namespace dn
