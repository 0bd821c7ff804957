#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace kscert {

/// Neumaier-compensated accumulator. Summation error stays below
/// ~1e-12 per 1e6 terms for values of order one, and results are
/// reproducible for a fixed addition order.
class NeumaierSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Fixed 15-significant-digit rendering used for every float the tool
/// emits; re-parsing and re-rendering the result is a fixed point.
inline std::string format_float15(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.15g", x);
    return std::string(buf);
}

}  // namespace kscert
