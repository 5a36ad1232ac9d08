#pragma once

#include <cmath>

namespace slammot {

// Wraps an angle to (-pi, pi]. All stored headings and all angular
// residuals in this library go through here.
inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * M_PI);
    if (a <= -M_PI) {
        a += 2.0 * M_PI;
    }
    return a;
}

}  // namespace slammot
