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

#ifndef RIBS_PRECODING_HPP
#define RIBS_PRECODING_HPP

#include "ribs/types.hpp"

#include <string>

namespace ribs
{
    enum class PrecoderScheme
    {
        mr,
        rzf,
        mmse
    };

    std::string to_string(PrecoderScheme s);
    PrecoderScheme precoder_from_string(const std::string &s); // throws invalid_input

    struct PrecoderSet
    {
        PrecoderScheme scheme = PrecoderScheme::rzf;
        CMat W;   // [n_bs, K], unit-norm columns
        RVec eta; // per-UE powers (W); empty until a power allocation is applied
    };

    // Unit-norm downlink precoders for the cascaded channels (columns of `cascaded`, [n_bs, K]).
    // The SINR uses hbar^T w, so all schemes act on the conjugated channels:
    //   MR:   w_k ~ conj(hbar_k)
    //   RZF:  W ~ conj(Hbar) (Hbar^T conj(Hbar) + delta I_K)^-1
    //   MMSE: w_k ~ (conj(Hbar) Hbar^T + delta I_NA)^-1 conj(hbar_k)
    // with delta = K sigma^2 / P_bs.
    // Throws invalid_input for an all-zero channel, numeric_error when the regularized Gram
    // matrix has condition number above 1e14.
    PrecoderSet compute_precoders(PrecoderScheme scheme, const CMat &cascaded, double noise_power,
                                  double bs_power);

} // namespace ribs

#endif
