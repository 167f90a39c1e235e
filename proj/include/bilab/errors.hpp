#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bilab {

// A resolution or resource guard refused the request; `required` names the
// smallest admissible value of the offending parameter.
struct GuardError : std::runtime_error {
    double required;
    GuardError(const std::string& msg, double req) : std::runtime_error(msg), required(req) {}
};

}  // namespace bilab
