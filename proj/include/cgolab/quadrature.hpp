#pragma once

#include <vector>

namespace cgolab {

struct GaussRule {
    std::vector<double> nodes;  // on [-1, 1], ascending
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (nodes from boost::math::legendre_p_zeros).
GaussRule gauss_legendre(int n);

}  // namespace cgolab
