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

#ifndef RIBS_METRICS_HPP
#define RIBS_METRICS_HPP

#include "ribs/precoding.hpp"

namespace ribs
{
    // Active RIS configuration: reflection vector p (amplitude and phase) and the fraction
    // epsilon of the power budget given to the RIS.
    struct RisConfig
    {
        CVec p;
        double epsilon = 0.25;
    };

    // Channel state for one coherence block.
    struct LinkState
    {
        CMat H;            // BS <- RIS, [n_bs, n_ris]
        CMat h;            // RIS <- UE, column k is h_k, [n_ris, K]
        double sigma_ris2 = 0.0; // RIS dynamic noise variance (W)
        RVec sigma_ue2;    // thermal noise per UE (W)

        Eigen::Index n_bs() const { return H.rows(); }
        Eigen::Index n_ris() const { return H.cols(); }
        Eigen::Index n_ue() const { return h.cols(); }

        // G_k = H diag(h_k)
        CMat G(Eigen::Index k) const;
    };

    // Throws invalid_input when H, h and the noise vector disagree in size.
    void validate(const LinkState &link);

    // hbar_k = H diag(p) h_k = G_k p.
    CVec cascaded_channel(const LinkState &link, const CVec &p, Eigen::Index k);

    // All cascaded channels as columns, [n_bs, K].
    CMat cascaded_channels(const LinkState &link, const CVec &p);

    // S(k, j) = p^T G_k^T w_j, the amplitude of stream j at UE k.
    CMat stream_gains(const LinkState &link, const CVec &p, const CMat &W);

    // ||p^T H_k||^2 sigma_R^2: RIS noise amplified towards UE k.
    double ris_noise_at_ue(const LinkState &link, const CVec &p, Eigen::Index k);

    // Downlink SINR (perfect CSI). All streams reach UE k through its own channel.
    double sinr(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta, Eigen::Index k);
    RVec sinr_all(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta);

    // sum_k log2(1 + gamma_k), bit/s/Hz.
    double sum_se(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta);
    double sum_se(const RVec &gamma);

    // Reflect power P_RIS(p) = p^H Pi p with
    // Pi = sum_j eta_j diag(H^T w_j) diag(H^T w_j)^H + sigma_R^2 I (diagonal, Hermitian PSD).
    struct RisPower
    {
        CMat Pi;

        double operator()(const CVec &p) const { return (p.adjoint() * Pi * p)(0, 0).real(); }
    };

    RisPower ris_power_matrix(const LinkState &link, const CMat &W, const RVec &eta);

} // namespace ribs

#endif
