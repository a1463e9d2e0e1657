#pragma once

#include <cmath>

namespace resonette {

// C-infinity step built from psi(t) = exp(-c/t): 0 for t <= 0, 1 for t >= 1.
// Works for double and for boost autodiff variables.
template <class T>
T smooth_step(const T& t, double c = 1.0) {
    using std::exp;
    const double tv = static_cast<double>(t);
    if (tv <= 0.0) return T(0.0);
    if (tv >= 1.0) return T(1.0);
    if (tv <= 0.5) {
        if (-c / tv + c / (1.0 - tv) < -700.0) return T(0.0);
        T e = exp(-c / t + c / (1.0 - t));
        return e / (1.0 + e);
    }
    if (-c / (1.0 - tv) + c / tv < -700.0) return T(1.0);
    T e = exp(-c / (1.0 - t) + c / t);
    return 1.0 / (1.0 + e);
}

// Equal to 1 on (-inf, a], 0 on [b, inf), smooth monotone transition.
template <class T>
T smooth_cutoff(const T& x, double a, double b, double c = 1.0) {
    return 1.0 - smooth_step((x - a) / (b - a), c);
}

}  // namespace resonette
