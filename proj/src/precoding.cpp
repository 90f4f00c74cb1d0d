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

#include "ribs/precoding.hpp"

#include <Eigen/Cholesky>

#include <string>

namespace ribs
{
    std::string to_string(PrecoderScheme s)
    {
        switch (s)
        {
        case PrecoderScheme::mr:
            return "MR";
        case PrecoderScheme::rzf:
            return "RZF";
        case PrecoderScheme::mmse:
            return "MMSE";
        }
        return "?";
    }

    PrecoderScheme precoder_from_string(const std::string &s)
    {
        if (s == "MR" || s == "mr")
            return PrecoderScheme::mr;
        if (s == "RZF" || s == "rzf")
            return PrecoderScheme::rzf;
        if (s == "MMSE" || s == "mmse")
            return PrecoderScheme::mmse;
        throw invalid_input("unknown precoder scheme '" + s + "'");
    }

    namespace
    {
        CMat regularized_solve(const CMat &A, const CMat &B)
        {
            Eigen::LLT<CMat> llt(A);
            if (llt.info() != Eigen::Success)
                throw numeric_error("regularized Gram matrix is not positive definite");
            if (llt.rcond() < 1e-14)
                throw numeric_error("regularized Gram matrix is singular (condition number > 1e14)");
            return llt.solve(B);
        }
    } // namespace

    PrecoderSet compute_precoders(PrecoderScheme scheme, const CMat &cascaded, double noise_power,
                                  double bs_power)
    {
        const auto n_bs = cascaded.rows();
        const auto K = cascaded.cols();
        if (n_bs < 1 || K < 1)
            throw invalid_input("precoding needs at least one antenna and one UE");
        for (Eigen::Index k = 0; k < K; ++k)
            if (cascaded.col(k).squaredNorm() == 0.0)
                throw invalid_input("cascaded channel of UE " + std::to_string(k) + " is all zero");
        if (!(bs_power > 0.0))
            throw invalid_input("BS power must be positive");

        const double delta = static_cast<double>(K) * noise_power / bs_power;
        const CMat Hc = cascaded.conjugate();

        PrecoderSet out;
        out.scheme = scheme;
        switch (scheme)
        {
        case PrecoderScheme::mr:
            out.W = Hc;
            break;
        case PrecoderScheme::rzf:
        {
            CMat gram = cascaded.transpose() * Hc;
            gram.diagonal().array() += delta;
            out.W = Hc * regularized_solve(gram, CMat::Identity(K, K));
            break;
        }
        case PrecoderScheme::mmse:
        {
            CMat cov = Hc * cascaded.transpose();
            cov.diagonal().array() += delta;
            out.W = regularized_solve(cov, Hc);
            break;
        }
        }

        for (Eigen::Index k = 0; k < K; ++k)
        {
            const double n = out.W.col(k).norm();
            if (!(n > 0.0) || !std::isfinite(n))
                throw numeric_error("precoder column " + std::to_string(k) + " cannot be normalized");
            out.W.col(k) /= n;
        }
        return out;
    }

} // namespace ribs
