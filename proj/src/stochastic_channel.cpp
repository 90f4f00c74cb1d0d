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

#include "ribs/stochastic_channel.hpp"
#include "ribs/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace ribs
{
    cx complex_normal(rng_t &rng)
    {
        std::normal_distribution<double> n(0.0, std::sqrt(0.5));
        const double re = n(rng);
        const double im = n(rng);
        return {re, im};
    }

    double UrbanModel::pathloss_db(double distance_m) const
    {
        return pathloss_intercept_db + pathloss_slope_db * std::log10(distance_m / 1000.0);
    }

    double UrbanModel::los_probability(double distance_m) const
    {
        const double e = std::exp(-distance_m / los_decay_m);
        return std::min(los_breakpoint_m / distance_m, 1.0) * (1.0 - e) + e;
    }

    double UrbanModel::kappa_db(double distance_m) const
    {
        return kappa_intercept_db + kappa_slope_db_per_m * distance_m;
    }

    CorrelationMatrix make_correlation(CMat R)
    {
        const auto n = R.rows();
        if (n == 0 || R.cols() != n)
            throw invalid_input("correlation matrix must be square and non-empty");

        const double trace = R.trace().real();
        Eigen::SelfAdjointEigenSolver<CMat> es(R);
        if (es.info() != Eigen::Success)
            throw numeric_error("eigendecomposition of the correlation matrix failed");
        RVec ev = es.eigenvalues();
        if (ev.minCoeff() < -1e-8 * std::abs(trace) / static_cast<double>(n))
            throw numeric_error("correlation matrix is not positive semidefinite (min eigenvalue " +
                                std::to_string(ev.minCoeff()) + ")");
        ev = ev.cwiseMax(0.0).cwiseSqrt();

        CorrelationMatrix out;
        out.factor = es.eigenvectors() * ev.asDiagonal();
        out.R = std::move(R);
        return out;
    }

    namespace
    {
        // Correlation of every lattice offset (dr, dc) for one pair of quadrature rules.
        // Offsets are stored at [(dr + rows - 1) * (2 cols - 1) + dc + cols - 1].
        std::vector<cx> lattice_correlation(const ArrayGeometry &ris, const QuadratureRule &az,
                                            const QuadratureRule &el, double wavelength)
        {
            const auto R = static_cast<long>(ris.rows), C = static_cast<long>(ris.cols);
            const long nr = 2 * R - 1, nc = 2 * C - 1;
            std::vector<cx> acc(static_cast<std::size_t>(nr * nc), cx(0.0));
            const double ks = 2.0 * pi / wavelength * ris.spacing;

            // The row phase depends on elevation only, so the azimuth sum is done first:
            // acc[dr][dc] = sum_j row_j[dr] * sum_i w_i w_j col_ij[dc].
            std::vector<cx> col_sum(static_cast<std::size_t>(nc));
            for (std::size_t j = 0; j < el.nodes.size(); ++j)
            {
                std::fill(col_sum.begin(), col_sum.end(), cx(0.0));
                const double cos_el = std::cos(el.nodes[j]);
                for (std::size_t i = 0; i < az.nodes.size(); ++i)
                {
                    // Element offset r_m - r_n = dc s h - dr s v (rows grow downwards).
                    const double alpha = ks * cos_el * std::sin(az.nodes[i]);
                    const double w = az.weights[i] * el.weights[j];
                    for (long dc = -(C - 1); dc <= C - 1; ++dc)
                        col_sum[static_cast<std::size_t>(dc + C - 1)] += std::polar(w, alpha * static_cast<double>(dc));
                }
                const double b = ks * std::sin(el.nodes[j]);
                for (long dr = -(R - 1); dr <= R - 1; ++dr)
                {
                    const cx row = std::polar(1.0, -b * static_cast<double>(dr));
                    cx *out = &acc[static_cast<std::size_t>((dr + R - 1) * nc)];
                    for (long c = 0; c < nc; ++c)
                        out[c] += row * col_sum[static_cast<std::size_t>(c)];
                }
            }
            return acc;
        }

        CMat expand_lattice(const ArrayGeometry &ris, const std::vector<cx> &lat)
        {
            const auto n = static_cast<Eigen::Index>(ris.size());
            const auto R = static_cast<long>(ris.rows), C = static_cast<long>(ris.cols);
            const long nc = 2 * C - 1;
            CMat out(n, n);
            for (Eigen::Index m = 0; m < n; ++m)
                for (Eigen::Index k = 0; k < n; ++k)
                {
                    const long dr = m / C - k / C, dc = m % C - k % C;
                    out(m, k) = lat[static_cast<std::size_t>((dr + R - 1) * nc + dc + C - 1)];
                }
            return out;
        }
    } // namespace

    CorrelationMatrix local_scattering_correlation(const ArrayGeometry &ris, double mean_azimuth,
                                                   double mean_elevation, double sigma_azimuth,
                                                   double sigma_elevation, double wavelength)
    {
        if (sigma_azimuth < 0.0 || sigma_elevation < 0.0)
            throw invalid_input("angular spreads must be non-negative");

        constexpr std::size_t first = 16, last = 512;
        std::vector<cx> prev;
        bool converged = false;
        for (std::size_t n = first; n <= last; n *= 2)
        {
            const auto az = truncated_gaussian_rule(mean_azimuth, sigma_azimuth, n);
            const auto el = truncated_gaussian_rule(mean_elevation, sigma_elevation, n);
            std::vector<cx> cur = lattice_correlation(ris, az, el, wavelength);
            if (!prev.empty())
            {
                double diff = 0.0, norm = 0.0;
                for (std::size_t i = 0; i < cur.size(); ++i)
                {
                    diff += std::norm(cur[i] - prev[i]);
                    norm += std::norm(cur[i]);
                }
                if (std::sqrt(diff) <= 1e-6 * std::sqrt(norm))
                {
                    prev = std::move(cur);
                    converged = true;
                    break;
                }
            }
            prev = std::move(cur);
            if (sigma_azimuth == 0.0 && sigma_elevation == 0.0)
            {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw numeric_error("local scattering quadrature did not converge");

        CMat R = expand_lattice(ris, prev);
        R = 0.5 * (R + R.adjoint()).eval();
        R *= static_cast<double>(R.rows()) / R.trace().real();
        return make_correlation(std::move(R));
    }

    LargeScaleParams large_scale_model(const UrbanModel &model, const ArrayGeometry &ris,
                                       const Vec3 &ue_position, rng_t &rng)
    {
        const double d = (ue_position - ris.center).norm();
        if (d < model.min_distance_m)
            throw scenario_error("UE at " + std::to_string(d) + " m is closer than the minimum distance of " +
                                 std::to_string(model.min_distance_m) + " m");

        std::normal_distribution<double> shadow(0.0, model.shadowing_sigma_db);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);

        LargeScaleParams ls;
        ls.beta = std::pow(10.0, -(model.pathloss_db(d) + shadow(rng)) / 10.0);
        ls.los = uni(rng) < model.los_probability(d);

        const Angles geometric = angles_towards(ris, ue_position);
        ls.scattering_mean = geometric;

        if (ls.los || model.nlos_keeps_specular)
        {
            ls.kappa = std::pow(10.0, model.kappa_db(d) / 10.0);
            ls.components = model.specular_components;
        }
        if (ls.kappa == 0.0)
            ls.components = 0;

        std::normal_distribution<double> az_spread(0.0, model.azimuth_spread);
        std::normal_distribution<double> el_spread(0.0, model.elevation_spread);
        for (std::size_t s = 0; s < ls.components; ++s)
        {
            Angles a = geometric;
            if (s > 0)
            {
                a.azimuth = std::remainder(a.azimuth + az_spread(rng), 2.0 * pi);
                if (a.azimuth >= pi)
                    a.azimuth -= 2.0 * pi;
                a.elevation = std::clamp(a.elevation + el_spread(rng), -0.5 * pi, 0.5 * pi);
            }
            ls.angles.push_back(a);
            ls.phases.push_back(phase(rng));
        }
        return ls;
    }

    CVec draw_channel(const LargeScaleParams &ls, const CorrelationMatrix &corr,
                      const ArrayGeometry &ris, double wavelength, rng_t &rng)
    {
        const auto n = static_cast<Eigen::Index>(ris.size());
        if (corr.factor.rows() != n)
            throw invalid_input("correlation matrix does not match the RIS size");
        if (!(ls.beta > 0.0) || ls.kappa < 0.0 || ls.angles.size() != ls.components)
            throw invalid_input("invalid large-scale parameters");

        std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
        CVec h = CVec::Zero(n);
        const double det_amp = std::sqrt(ls.beta * ls.kappa / (ls.kappa + 1.0));
        for (std::size_t s = 0; s < ls.components; ++s)
        {
            const double theta = phase(rng);
            h += std::polar(det_amp, theta) *
                 array_response(ris, ls.angles[s].azimuth, ls.angles[s].elevation, wavelength);
        }

        CVec z(n);
        for (Eigen::Index i = 0; i < n; ++i)
            z[i] = complex_normal(rng);
        h += std::sqrt(ls.beta / (ls.kappa + 1.0)) * (corr.factor * z);
        return h;
    }

} // namespace ribs
