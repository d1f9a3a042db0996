#pragma once

#include <stdexcept>
#include <string>

namespace dasga {

// Numerical routine failed (eigensolver divergence, singular KKT system, ...).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file. Messages carry the offending line/row number.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent experiment configuration (empty method list, uncoverable class, ...).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dasga
