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

#ifndef RIBS_STOCHASTIC_CHANNEL_HPP
#define RIBS_STOCHASTIC_CHANNEL_HPP

#include "ribs/channel_geometry.hpp"

#include <random>
#include <vector>

namespace ribs
{
    using rng_t = std::mt19937_64;

    // Standard circularly-symmetric complex Gaussian, CN(0, 1).
    cx complex_normal(rng_t &rng);

    // Urban macro surrogate laws for the large-scale parameters. Distances in meters.
    // Defaults: PL(dB) = 128.1 + 37.6 log10(d_km), 8 dB log-normal shadowing,
    // P_LoS(d) = min(18/d, 1)(1 - exp(-d/36)) + exp(-d/36), kappa(dB) = 13 - 0.03 d.
    struct UrbanModel
    {
        double pathloss_intercept_db = 128.1;
        double pathloss_slope_db = 37.6; // per decade of distance in km
        double shadowing_sigma_db = 8.0;
        double los_breakpoint_m = 18.0;
        double los_decay_m = 36.0;
        double kappa_intercept_db = 13.0;
        double kappa_slope_db_per_m = -0.03;
        std::size_t specular_components = 1; // S_k for LoS UEs
        bool nlos_keeps_specular = false;     // NLoS UEs: kappa = 0, S_k = 0 unless set
        double min_distance_m = 70.0;
        double azimuth_spread = 15.0 * pi / 180.0;
        double elevation_spread = 15.0 * pi / 180.0;

        double pathloss_db(double distance_m) const;
        double los_probability(double distance_m) const;
        double kappa_db(double distance_m) const;
    };

    struct LargeScaleParams
    {
        double beta = 0.0;  // linear power gain
        double kappa = 0.0; // linear Rician factor
        bool los = false;
        std::size_t components = 0;    // S_k
        std::vector<Angles> angles;    // per deterministic component
        std::vector<double> phases;    // theta_{k,s} of the first coherence block, in [0, 2 pi)
        Angles scattering_mean;        // mean angles of the diffuse part
    };

    struct CorrelationMatrix
    {
        CMat R;      // Hermitian PSD, tr(R) = N_R
        CMat factor; // F with F F^H = R (clipped eigendecomposition)
    };

    // Builds the PSD square-root factor. Throws numeric_error if R is not PSD within
    // -1e-8 * tr(R) / N.
    CorrelationMatrix make_correlation(CMat R);

    // Local scattering model: R[m,n] = E[a_m a_n^*] with Gaussian azimuth/elevation spread,
    // evaluated with a truncated (+-4 sigma) Gauss-Legendre rule refined until the
    // Frobenius change is below 1e-6 relative.
    CorrelationMatrix local_scattering_correlation(const ArrayGeometry &ris, double mean_azimuth,
                                                   double mean_elevation, double sigma_azimuth,
                                                   double sigma_elevation, double wavelength);

    // Draws beta (pathloss + shadowing), the LoS state and kappa for a UE.
    // Throws scenario_error if the UE is closer than model.min_distance_m.
    LargeScaleParams large_scale_model(const UrbanModel &model, const ArrayGeometry &ris,
                                       const Vec3 &ue_position, rng_t &rng);

    // h = sum_s exp(j theta_s) sqrt(beta kappa / (kappa + 1)) a(phi_s, theta_s) + h_diffuse,
    // h_diffuse ~ CN(0, beta / (kappa + 1) R). The phases are redrawn on every call
    // (one call = one coherence block).
    CVec draw_channel(const LargeScaleParams &ls, const CorrelationMatrix &corr,
                      const ArrayGeometry &ris, double wavelength, rng_t &rng);

} // namespace ribs

#endif
