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

#include "ribs/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace ribs
{
    QuadratureRule gauss_legendre(std::size_t n)
    {
        if (n == 0)
            return {};
        if (n == 1)
            return {{0.0}, {2.0}};

        QuadratureRule q;
        q.nodes.resize(n);
        q.weights.resize(n);
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i < half; ++i)
        {
            // Tricomi initial guess, then Newton on P_n.
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(n) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it)
            {
                double p0 = 1.0, p1 = x;
                for (std::size_t k = 2; k <= n; ++k)
                {
                    const double kk = static_cast<double>(k);
                    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                    p0 = p1;
                    p1 = p2;
                }
                dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15)
                    break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            q.nodes[i] = -x;
            q.nodes[n - 1 - i] = x;
            q.weights[i] = w;
            q.weights[n - 1 - i] = w;
        }
        return q;
    }

    QuadratureRule truncated_gaussian_rule(double mean, double sigma, std::size_t n)
    {
        if (sigma <= 0.0 || n == 0)
            return {{mean}, {1.0}};

        QuadratureRule q = gauss_legendre(n);
        constexpr double span = 4.0;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double t = span * q.nodes[i];
            q.weights[i] *= std::exp(-0.5 * t * t);
            q.nodes[i] = mean + sigma * t;
            total += q.weights[i];
        }
        for (double &w : q.weights)
            w /= total;
        return q;
    }

} // namespace ribs
