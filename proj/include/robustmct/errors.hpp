#pragma once

#include <stdexcept>
#include <string>

namespace robustmct {

/// Design is structurally unusable (too few groups, dimension mismatch, ...).
class invalid_design_error : public std::runtime_error {
public:
    explicit invalid_design_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Data carry no usable variation (all ties, zero variance, MAD = 0).
class degenerate_data_error : public std::runtime_error {
public:
    explicit degenerate_data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numeric precondition failed (non-PSD correlation, singular covariance).
class numeric_domain_error : public std::runtime_error {
public:
    explicit numeric_domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace robustmct
