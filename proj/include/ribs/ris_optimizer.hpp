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

#ifndef RIBS_RIS_OPTIMIZER_HPP
#define RIBS_RIS_OPTIMIZER_HPP

#include "ribs/metrics.hpp"

#include <iosfwd>
#include <random>
#include <vector>

namespace ribs
{
    // ------------------------------------------------------------------------
    // Fractional-programming building blocks.
    //
    // The sum-SE objective is rewritten with auxiliaries rho (SINR surrogates) and varpi
    // (complex, quadratic transform) as
    //   f(p, rho, varpi) = sum_k ln(1 + rho_k) - rho_k + g_k,
    //   g_k = 2 sqrt(1 + rho_k) xi_k - |varpi_k|^2 I_k(p),
    //   xi_k = sqrt(eta_k) Re{conj(varpi_k) p^T G_k^T w_k}.
    // For fixed (rho, varpi) the p-dependent part is Re{2 p^H upsilon} - p^H Omega p.
    // ------------------------------------------------------------------------

    // I_k(p) = sum_j eta_j |p^T G_k^T w_j|^2 + ||p^T H_k||^2 sigma_R^2 + sigma_k^2 (j over all UEs).
    double interference_term(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta,
                             Eigen::Index k);
    RVec interference_terms(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta);

    // varpi_k = sqrt(eta_k (1 + rho_k)) p^T G_k^T w_k / I_k(p).
    CVec update_varpi(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta,
                      const RVec &rho);

    RVec compute_xi(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta,
                    const CVec &varpi);

    // rho_k = xi_k^2 / 2 + xi_k sqrt(xi_k^2 + 4) / 2, clipped at 0.
    RVec update_rho(const RVec &xi);

    // Full reformulated objective f(p, rho, varpi) in nats.
    double fp_objective(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta,
                        const RVec &rho, const CVec &varpi);

    struct Quadratic
    {
        CVec upsilon;
        CMat Omega; // Hermitian PSD
    };

    // upsilon = sum_k sqrt(eta_k (1 + rho_k)) varpi_k conj(G_k^T w_k)
    // Omega   = sum_k |varpi_k|^2 (sigma_R^2 H_k^H H_k + G_k^H conj(Wbar) G_k), Wbar = sum_j eta_j w_j w_j^H
    Quadratic assemble_quadratic(const LinkState &link, const CMat &W, const RVec &eta,
                                 const RVec &rho, const CVec &varpi);

    // Solves (Omega + mu Pi) p = upsilon by Cholesky. numeric_error if cond > 1e14.
    CVec solve_p(const CVec &upsilon, const CMat &Omega, const CMat &Pi, double mu);

    inline constexpr double default_mu_max = 1e4;

    struct MuSearch
    {
        CVec p;
        double mu = 0.0;
        double reflect_power = 0.0;
        bool boundary = false; // constraint still violated at mu_max
        std::size_t iterations = 0;
    };

    // Bisection on mu in [0, mu_max] until the bracket is below tol, then until the
    // complementary slackness residual mu (budget - P_RIS) drops below tol * budget.
    // Returns the solution on the feasible side of the bracket.
    MuSearch mu_bisection(const CVec &upsilon, const CMat &Omega, const CMat &Pi, double epsilon,
                          double p_max, double tol, double mu_max = default_mu_max);

    // varrho_k = ||hbar_k||^(2 nu) / sum_i ||hbar_i||^(2 nu); uniform when every channel is zero.
    RVec power_weights(const LinkState &link, const CVec &p, double nu);

    // eta_k = min{(1 - eps) P_max varrho_k, (eps P_max - ||p||^2 sigma_R^2) / ||(H P)^T w_k||^2 varrho_k}.
    // Throws power_budget_error when ||p||^2 sigma_R^2 > eps P_max.
    RVec heuristic_power_allocation(const LinkState &link, const CVec &p, const CMat &W,
                                    double epsilon, double p_max, double nu);

    // ------------------------------------------------------------------------
    // Configuration evaluation and the joint optimizer.
    // ------------------------------------------------------------------------

    struct OptimizerOptions
    {
        double p_max = 0.5;
        PrecoderScheme scheme = PrecoderScheme::rzf;
        double nu = 0.5;
        double tol = 1e-3;
        double mu_max = default_mu_max;
        std::size_t fp_sweeps = 5;
        double init_fill = 0.9; // initial p uses this fraction of the RIS budget
    };

    struct Evaluation
    {
        CVec p;       // possibly rescaled to satisfy ||p||^2 sigma_R^2 <= eps P_max
        double epsilon = 0.0;
        PrecoderSet precoders; // W and eta
        RVec gamma;
        double sum_se = 0.0;
        bool rescaled = false;
    };

    // Precoders (BS power (1 - eps) P_max), heuristic power allocation and SINRs for (p, eps).
    Evaluation evaluate_configuration(const LinkState &link, const CVec &p, double epsilon,
                                      const OptimizerOptions &opt);

    // Random unit-modulus phases scaled so that p^H Pi p = fill * eps P_max, where Pi is
    // built with the BS at full power (eta_k = (1 - eps) P_max varrho_k).
    CVec random_reflection(const LinkState &link, double epsilon, const OptimizerOptions &opt,
                           std::mt19937_64 &rng, double fill);
    CVec scale_reflection(const LinkState &link, CVec p, double epsilon, const OptimizerOptions &opt,
                          double fill);

    // One FP refinement at fixed epsilon starting from (p, rho).
    struct FpStep
    {
        CVec varpi;
        RVec rho;
        Quadratic quadratic;
        CMat Pi;
        MuSearch mu;
        Evaluation result;
    };

    FpStep fp_step(const LinkState &link, const Evaluation &current, const RVec &rho,
                   const OptimizerOptions &opt);

    struct TraceRow
    {
        std::size_t iteration = 0;
        double epsilon = 0.0;
        double mu = 0.0;
        double baseline_se = 0.0;  // incumbent p re-evaluated at this epsilon
        double candidate_se = 0.0; // after the FP update
        double incumbent_se = 0.0; // last accepted value
        bool accepted = false;
    };

    struct OptimizeResult
    {
        CVec p;
        double epsilon = 0.0;
        PrecoderSet precoders;
        RVec gamma;
        double sum_se = 0.0;
        std::vector<TraceRow> trace;
        std::size_t boundary_hits = 0;
        std::size_t rescales = 0;
    };

    // Joint RIS configuration / power-split optimization: bisection over epsilon with an FP
    // update of p (closed form + bisection over mu) per step. A step is accepted when its sum
    // SE is not below the incumbent (the last accepted value, initially the starting p at
    // epsilon = 1/2); accepted steps move epsilon_min up, rejected ones epsilon_max down.
    // Returns the incumbent.
    OptimizeResult optimize(const LinkState &link, const OptimizerOptions &opt, std::mt19937_64 &rng);
    OptimizeResult optimize_from(const LinkState &link, const OptimizerOptions &opt, const CVec &p0);

    // CSV rows: iteration,epsilon,mu,sum_se (incumbent).
    void write_trace_csv(std::ostream &os, const std::vector<TraceRow> &trace);

} // namespace ribs

#endif
