// SPDX-License-Identifier: Apache-2.0
//
// ribs-sim: simulation and optimization toolkit for reconfigurable intelligent base stations
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RIBS_QUADRATURE_HPP
#define RIBS_QUADRATURE_HPP

#include <cstddef>
#include <vector>

namespace ribs
{
    struct QuadratureRule
    {
        std::vector<double> nodes;
        std::vector<double> weights;
    };

    // n-point Gauss-Legendre rule on [-1, 1].
    QuadratureRule gauss_legendre(std::size_t n);

    // Rule for E[f(X)], X ~ N(mean, sigma^2) truncated to mean +- 4 sigma, weights summing to 1.
    // sigma == 0 yields the single node at the mean.
    QuadratureRule truncated_gaussian_rule(double mean, double sigma, std::size_t n);

} // namespace ribs

#endif
