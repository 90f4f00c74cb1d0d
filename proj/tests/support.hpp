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

#ifndef RIBS_TESTS_SUPPORT_HPP
#define RIBS_TESTS_SUPPORT_HPP

#include "ribs/metrics.hpp"
#include "ribs/stochastic_channel.hpp"

#include <random>

namespace testing
{
    using namespace ribs;

    inline CVec random_cvec(Eigen::Index n, rng_t &rng, double scale = 1.0)
    {
        CVec v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = scale * complex_normal(rng);
        return v;
    }

    inline CMat random_cmat(Eigen::Index r, Eigen::Index c, rng_t &rng, double scale = 1.0)
    {
        CMat m(r, c);
        for (Eigen::Index j = 0; j < c; ++j)
            m.col(j) = random_cvec(r, rng, scale);
        return m;
    }

    // Hermitian PSD with a small ridge.
    inline CMat random_psd(Eigen::Index n, rng_t &rng, double ridge = 1e-3)
    {
        const CMat a = random_cmat(n, n, rng);
        return a * a.adjoint() + ridge * CMat::Identity(n, n);
    }

    // Unit-scale link: CN(0,1) entries, equal noise at the RIS and the UEs.
    inline LinkState random_link(Eigen::Index n_bs, Eigen::Index n_ris, Eigen::Index k, rng_t &rng,
                                 double sigma_r2 = 1e-2, double sigma_k2 = 1e-2)
    {
        LinkState link;
        link.H = random_cmat(n_bs, n_ris, rng);
        link.h = random_cmat(n_ris, k, rng);
        link.sigma_ris2 = sigma_r2;
        link.sigma_ue2 = RVec::Constant(k, sigma_k2);
        return link;
    }

    inline CMat unit_columns(CMat W)
    {
        for (Eigen::Index j = 0; j < W.cols(); ++j)
            W.col(j).normalize();
        return W;
    }

    inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
} // namespace testing

#endif
