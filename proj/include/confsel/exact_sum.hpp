#pragma once

#include <span>
#include <vector>

namespace confsel {

/// Floating-point accumulator returning the correctly rounded value of the
/// exact sum of everything added so far (Shewchuk expansions with fsum-style
/// final rounding).
///
/// The result does not depend on the order of additions, which is what lets
/// the sorted prefix-sum kernels agree bit for bit with direct summation.
/// Inputs must be finite and the running sum must not overflow.
class ExactSum {
public:
    void add(double x);
    double value() const;
    void clear() { partials_.clear(); }

private:
    std::vector<double> partials_;
};

double exact_sum(std::span<const double> values);

} // namespace confsel
