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

#include "ribs/metrics.hpp"

#include <cmath>
#include <string>

namespace ribs
{
    CMat LinkState::G(Eigen::Index k) const
    {
        return H * h.col(k).asDiagonal();
    }

    void validate(const LinkState &link)
    {
        if (link.H.cols() != link.h.rows())
            throw invalid_input("H has " + std::to_string(link.H.cols()) + " RIS columns but h_k has " +
                                std::to_string(link.h.rows()) + " entries");
        if (link.sigma_ue2.size() != link.h.cols())
            throw invalid_input("noise vector length does not match the UE count");
        if (link.sigma_ris2 < 0.0 || (link.sigma_ue2.array() < 0.0).any())
            throw invalid_input("noise variances must be non-negative");
    }

    CVec cascaded_channel(const LinkState &link, const CVec &p, Eigen::Index k)
    {
        if (p.size() != link.n_ris() || k < 0 || k >= link.n_ue())
            throw invalid_input("cascaded_channel: dimension mismatch");
        return link.H * p.cwiseProduct(link.h.col(k));
    }

    CMat cascaded_channels(const LinkState &link, const CVec &p)
    {
        if (p.size() != link.n_ris())
            throw invalid_input("cascaded_channels: dimension mismatch");
        return link.H * (p.asDiagonal() * link.h);
    }

    CMat stream_gains(const LinkState &link, const CVec &p, const CMat &W)
    {
        return cascaded_channels(link, p).transpose() * W;
    }

    double ris_noise_at_ue(const LinkState &link, const CVec &p, Eigen::Index k)
    {
        return p.cwiseProduct(link.h.col(k)).squaredNorm() * link.sigma_ris2;
    }

    namespace
    {
        double sinr_from_gains(const LinkState &link, const CVec &p, const CMat &S, const RVec &eta,
                               Eigen::Index k)
        {
            double interference = 0.0;
            for (Eigen::Index j = 0; j < S.cols(); ++j)
                if (j != k)
                    interference += eta[j] * std::norm(S(k, j));
            const double denom = interference + ris_noise_at_ue(link, p, k) + link.sigma_ue2[k];
            return eta[k] * std::norm(S(k, k)) / denom;
        }
    } // namespace

    double sinr(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta, Eigen::Index k)
    {
        const CVec hb = cascaded_channel(link, p, k);
        double interference = 0.0;
        cx useful;
        for (Eigen::Index j = 0; j < W.cols(); ++j)
        {
            const cx g = hb.transpose() * W.col(j);
            if (j == k)
                useful = g;
            else
                interference += eta[j] * std::norm(g);
        }
        return eta[k] * std::norm(useful) / (interference + ris_noise_at_ue(link, p, k) + link.sigma_ue2[k]);
    }

    RVec sinr_all(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta)
    {
        const CMat S = stream_gains(link, p, W);
        RVec g(link.n_ue());
        for (Eigen::Index k = 0; k < link.n_ue(); ++k)
            g[k] = sinr_from_gains(link, p, S, eta, k);
        return g;
    }

    double sum_se(const RVec &gamma)
    {
        double s = 0.0;
        for (Eigen::Index k = 0; k < gamma.size(); ++k)
            s += std::log2(1.0 + gamma[k]);
        return s;
    }

    double sum_se(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta)
    {
        return sum_se(sinr_all(link, p, W, eta));
    }

    RisPower ris_power_matrix(const LinkState &link, const CMat &W, const RVec &eta)
    {
        const CMat B = link.H.transpose() * W; // column j: H^T w_j
        RVec diag = RVec::Constant(link.n_ris(), link.sigma_ris2);
        for (Eigen::Index j = 0; j < W.cols(); ++j)
            diag += eta[j] * B.col(j).cwiseAbs2();
        RisPower out;
        out.Pi = diag.cast<cx>().asDiagonal();
        return out;
    }

} // namespace ribs
