#pragma once

#include <vector>

namespace resonette {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    int count = 0;
};

// Least-squares line y = slope * x + intercept. Needs at least two distinct x.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Fit of log(y) against log(x).
LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace resonette
