#include "cgolab/quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <stdexcept>

namespace cgolab {

GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    // Positive zeros only (plus 0 for odd n); mirror them.
    const auto pos = boost::math::legendre_p_zeros<double>(n);
    GaussRule rule;
    for (double x : pos) {
        rule.nodes.push_back(x);
        if (x != 0.0) rule.nodes.push_back(-x);
    }
    std::sort(rule.nodes.begin(), rule.nodes.end());
    for (double x : rule.nodes) {
        const double dp = boost::math::legendre_p_prime(n, x);
        rule.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
    }
    return rule;
}

}  // namespace cgolab
