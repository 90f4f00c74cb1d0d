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

#include "ribs/ris_optimizer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace ribs
{
    double interference_term(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta,
                             Eigen::Index k)
    {
        const CVec hb = cascaded_channel(link, p, k);
        double total = 0.0;
        for (Eigen::Index j = 0; j < W.cols(); ++j)
            total += eta[j] * std::norm(cx(hb.transpose() * W.col(j)));
        return total + ris_noise_at_ue(link, p, k) + link.sigma_ue2[k];
    }

    RVec interference_terms(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta)
    {
        const CMat S = stream_gains(link, p, W);
        RVec I(link.n_ue());
        for (Eigen::Index k = 0; k < link.n_ue(); ++k)
        {
            double total = 0.0;
            for (Eigen::Index j = 0; j < S.cols(); ++j)
                total += eta[j] * std::norm(S(k, j));
            I[k] = total + ris_noise_at_ue(link, p, k) + link.sigma_ue2[k];
        }
        return I;
    }

    CVec update_varpi(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta,
                      const RVec &rho)
    {
        const CMat S = stream_gains(link, p, W);
        const RVec I = interference_terms(link, p, W, eta);
        CVec varpi(link.n_ue());
        for (Eigen::Index k = 0; k < link.n_ue(); ++k)
            varpi[k] = std::sqrt(eta[k] * (1.0 + rho[k])) * S(k, k) / I[k];
        return varpi;
    }

    RVec compute_xi(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta,
                    const CVec &varpi)
    {
        const CMat S = stream_gains(link, p, W);
        RVec xi(link.n_ue());
        for (Eigen::Index k = 0; k < link.n_ue(); ++k)
            xi[k] = std::sqrt(eta[k]) * (std::conj(varpi[k]) * S(k, k)).real();
        return xi;
    }

    RVec update_rho(const RVec &xi)
    {
        RVec rho(xi.size());
        for (Eigen::Index k = 0; k < xi.size(); ++k)
        {
            const double x = xi[k];
            rho[k] = std::max(0.0, 0.5 * x * x + 0.5 * x * std::sqrt(x * x + 4.0));
        }
        return rho;
    }

    double fp_objective(const LinkState &link, const CVec &p, const CMat &W, const RVec &eta,
                        const RVec &rho, const CVec &varpi)
    {
        const RVec xi = compute_xi(link, p, W, eta, varpi);
        const RVec I = interference_terms(link, p, W, eta);
        double f = 0.0;
        for (Eigen::Index k = 0; k < link.n_ue(); ++k)
            f += std::log1p(rho[k]) - rho[k] + 2.0 * std::sqrt(1.0 + rho[k]) * xi[k] - std::norm(varpi[k]) * I[k];
        return f;
    }

    Quadratic assemble_quadratic(const LinkState &link, const CMat &W, const RVec &eta,
                                 const RVec &rho, const CVec &varpi)
    {
        const Eigen::Index n = link.n_ris(), K = link.n_ue();
        const CMat B = link.H.transpose() * W; // column j: H^T w_j

        Quadratic q;
        q.upsilon = CVec::Zero(n);
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const double c = std::sqrt(eta[k] * (1.0 + rho[k]));
            // G_k^T w_k = h_k .* (H^T w_k)
            q.upsilon += (c * varpi[k]) * link.h.col(k).cwiseProduct(B.col(k)).conjugate();
        }

        // sum_k |varpi_k|^2 G_k^H conj(Wbar) G_k = conj(M) .* sum_k |varpi_k|^2 conj(h_k) h_k^T,
        // M = H^T Wbar conj(H) = B diag(eta) B^H.
        const CMat M = B * eta.cast<cx>().asDiagonal() * B.adjoint();
        const RVec weights = varpi.cwiseAbs2();
        const CMat weighted_h = link.h * weights.cast<cx>().asDiagonal();
        const CMat outer = weighted_h.conjugate() * link.h.transpose();
        q.Omega = M.conjugate().cwiseProduct(outer);

        RVec noise = RVec::Zero(n);
        for (Eigen::Index k = 0; k < K; ++k)
            noise += weights[k] * link.h.col(k).cwiseAbs2();
        q.Omega.diagonal() += (link.sigma_ris2 * noise).cast<cx>();
        q.Omega = (0.5 * (q.Omega + q.Omega.adjoint())).eval();
        return q;
    }

    CVec solve_p(const CVec &upsilon, const CMat &Omega, const CMat &Pi, double mu)
    {
        if (upsilon.size() != Omega.rows() || Omega.rows() != Pi.rows())
            throw invalid_input("solve_p: dimension mismatch");
        const CMat A = Omega + mu * Pi;
        Eigen::LLT<CMat> llt(A);
        if (llt.info() != Eigen::Success)
            throw numeric_error("Omega + mu Pi is not positive definite (mu = " + std::to_string(mu) + ")");
        if (llt.rcond() < 1e-14)
            throw numeric_error("Omega + mu Pi is ill-conditioned (mu = " + std::to_string(mu) + ")");
        return llt.solve(upsilon);
    }

    MuSearch mu_bisection(const CVec &upsilon, const CMat &Omega, const CMat &Pi, double epsilon,
                          double p_max, double tol, double mu_max)
    {
        const double budget = epsilon * p_max;
        if (!(budget > 0.0))
            throw invalid_input("RIS power budget must be positive");

        auto power = [&Pi](const CVec &p) { return (p.adjoint() * Pi * p)(0, 0).real(); };

        MuSearch out;
        if (upsilon.squaredNorm() == 0.0)
        {
            out.p = CVec::Zero(upsilon.size());
            return out;
        }

        // With Pi diagonal and positive, A = Pi^-1/2 Omega Pi^-1/2 = U diag(lambda) U^H gives
        // P_RIS(mu) = sum |c_i|^2 / (lambda_i + mu)^2 with c = U^H Pi^-1/2 upsilon, so each
        // bisection step is O(N). The returned p always comes from the Cholesky solve.
        const RVec d = Pi.diagonal().real();
        const bool spectral = Pi.isDiagonal(0.0) && (d.array() > 0.0).all();
        RVec lambda, c2;
        if (spectral)
        {
            const RVec s = d.cwiseSqrt().cwiseInverse();
            const CMat A = s.asDiagonal() * Omega * s.asDiagonal();
            Eigen::SelfAdjointEigenSolver<CMat> es(A);
            if (es.info() == Eigen::Success)
            {
                lambda = es.eigenvalues();
                c2 = (es.eigenvectors().adjoint() * s.cast<cx>().asDiagonal() * upsilon).cwiseAbs2();
            }
        }
        const bool fast = lambda.size() > 0;

        double lo = 0.0, hi = mu_max;
        CVec p_hi;
        bool have_hi = false;
        double hi_fast = -1.0; // mu of the best feasible spectral evaluation
        auto step = [&]()
        {
            const double mu = 0.5 * (lo + hi);
            ++out.iterations;
            if (fast)
            {
                const RVec shifted = lambda.array() + mu;
                if (shifted.minCoeff() <= 1e-14 * shifted.maxCoeff())
                {
                    lo = mu;
                    return;
                }
                if ((c2.array() / shifted.array().square()).sum() > budget)
                    lo = mu;
                else
                {
                    hi = mu;
                    hi_fast = mu;
                }
                return;
            }
            try
            {
                CVec p = solve_p(upsilon, Omega, Pi, mu);
                if (power(p) > budget)
                    lo = mu;
                else
                {
                    hi = mu;
                    p_hi = std::move(p);
                    have_hi = true;
                }
            }
            catch (const numeric_error &)
            {
                lo = mu;
            }
        };

        while (hi - lo > tol)
            step();
        if (fast)
        {
            // Tighten until complementary slackness holds to tol * budget.
            for (int extra = 0; extra < 200 && hi_fast >= 0.0; ++extra)
            {
                const RVec shifted = lambda.array() + hi;
                const double gap = budget - (c2.array() / shifted.array().square()).sum();
                if (gap < 0.0 || hi * gap <= tol * budget)
                    break;
                step();
            }
            p_hi = solve_p(upsilon, Omega, Pi, hi);
            have_hi = true;
        }

        if (!have_hi)
        {
            p_hi = solve_p(upsilon, Omega, Pi, hi);
            have_hi = true;
        }
        for (int extra = 0; extra < 200 && !fast; ++extra)
        {
            const double gap = budget - power(p_hi);
            if (gap < 0.0 || hi * gap <= tol * budget)
                break;
            step();
        }

        out.p = p_hi;
        out.mu = hi;
        out.reflect_power = power(p_hi);
        out.boundary = out.reflect_power > budget * (1.0 + 1e-9);
        return out;
    }

    RVec power_weights(const LinkState &link, const CVec &p, double nu)
    {
        const CMat hb = cascaded_channels(link, p);
        const Eigen::Index K = link.n_ue();
        RVec w(K);
        for (Eigen::Index k = 0; k < K; ++k)
            w[k] = std::pow(hb.col(k).squaredNorm(), nu);
        const double total = w.sum();
        if (!(total > 0.0) || !std::isfinite(total))
            return RVec::Constant(K, 1.0 / static_cast<double>(K));
        return w / total;
    }

    RVec heuristic_power_allocation(const LinkState &link, const CVec &p, const CMat &W,
                                    double epsilon, double p_max, double nu)
    {
        const double ris_budget = epsilon * p_max - p.squaredNorm() * link.sigma_ris2;
        if (ris_budget < 0.0)
            throw power_budget_error("||p||^2 sigma_R^2 exceeds the RIS budget; shrink ||p||");

        const RVec varrho = power_weights(link, p, nu);
        const CMat B = link.H.transpose() * W;
        RVec eta(link.n_ue());
        for (Eigen::Index k = 0; k < link.n_ue(); ++k)
        {
            const double bs_share = (1.0 - epsilon) * p_max * varrho[k];
            const double reflected = p.cwiseProduct(B.col(k)).squaredNorm(); // ||(H P)^T w_k||^2
            const double ris_share = reflected > 0.0 ? ris_budget / reflected * varrho[k]
                                                     : std::numeric_limits<double>::infinity();
            eta[k] = std::min(bs_share, ris_share);
        }
        return eta;
    }

    namespace
    {
        double noise_for_precoder(const LinkState &link)
        {
            return link.sigma_ue2.size() ? link.sigma_ue2.mean() : 0.0;
        }

        CVec fit_to_budget(const LinkState &link, CVec p, double epsilon, double p_max, bool &rescaled)
        {
            const double budget = epsilon * p_max;
            const double noise = p.squaredNorm() * link.sigma_ris2;
            rescaled = false;
            if (noise > budget)
            {
                p *= 0.99 * std::sqrt(budget / link.sigma_ris2) / p.norm();
                rescaled = true;
            }
            return p;
        }
    } // namespace

    Evaluation evaluate_configuration(const LinkState &link, const CVec &p, double epsilon,
                                      const OptimizerOptions &opt)
    {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw invalid_input("power split must lie in (0, 1)");
        Evaluation ev;
        ev.epsilon = epsilon;
        ev.p = fit_to_budget(link, p, epsilon, opt.p_max, ev.rescaled);
        ev.precoders = compute_precoders(opt.scheme, cascaded_channels(link, ev.p), noise_for_precoder(link),
                                         (1.0 - epsilon) * opt.p_max);
        ev.precoders.eta = heuristic_power_allocation(link, ev.p, ev.precoders.W, epsilon, opt.p_max, opt.nu);
        ev.gamma = sinr_all(link, ev.p, ev.precoders.W, ev.precoders.eta);
        ev.sum_se = sum_se(ev.gamma);
        return ev;
    }

    CVec scale_reflection(const LinkState &link, CVec p, double epsilon, const OptimizerOptions &opt,
                          double fill)
    {
        const PrecoderSet pre = compute_precoders(opt.scheme, cascaded_channels(link, p),
                                                  noise_for_precoder(link), (1.0 - epsilon) * opt.p_max);
        const RVec eta = (1.0 - epsilon) * opt.p_max * power_weights(link, p, opt.nu);
        const RisPower rp = ris_power_matrix(link, pre.W, eta);
        const double current = rp(p);
        if (current > 0.0)
            p *= std::sqrt(fill * epsilon * opt.p_max / current);
        return p;
    }

    CVec random_reflection(const LinkState &link, double epsilon, const OptimizerOptions &opt,
                           std::mt19937_64 &rng, double fill)
    {
        std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
        CVec p(link.n_ris());
        for (Eigen::Index i = 0; i < p.size(); ++i)
            p[i] = std::polar(1.0, phase(rng));
        return scale_reflection(link, std::move(p), epsilon, opt, fill);
    }

    FpStep fp_step(const LinkState &link, const Evaluation &current, const RVec &rho,
                   const OptimizerOptions &opt)
    {
        const CMat &W = current.precoders.W;
        const RVec &eta = current.precoders.eta;

        FpStep s;
        s.varpi = update_varpi(link, current.p, W, eta, rho);
        s.rho = update_rho(compute_xi(link, current.p, W, eta, s.varpi));
        s.quadratic = assemble_quadratic(link, W, eta, s.rho, s.varpi);
        s.Pi = ris_power_matrix(link, W, eta).Pi;
        s.mu = mu_bisection(s.quadratic.upsilon, s.quadratic.Omega, s.Pi, current.epsilon, opt.p_max, opt.tol,
                            opt.mu_max);
        s.result = evaluate_configuration(link, s.mu.p, current.epsilon, opt);
        return s;
    }

    OptimizeResult optimize_from(const LinkState &link, const OptimizerOptions &opt, const CVec &p0)
    {
        validate(link);
        if (!(opt.p_max > 0.0))
            throw invalid_input("P_max must be positive");
        if (p0.size() != link.n_ris())
            throw invalid_input("initial reflection vector has the wrong length");

        OptimizeResult best;
        auto adopt = [&best](const Evaluation &ev)
        {
            best.p = ev.p;
            best.epsilon = ev.epsilon;
            best.precoders = ev.precoders;
            best.gamma = ev.gamma;
            best.sum_se = ev.sum_se;
        };

        double eps_lo = 0.0, eps_hi = 1.0;
        CVec p = scale_reflection(link, p0, 0.5, opt, opt.init_fill);
        std::size_t iteration = 0;
        do
        {
            const double eps = 0.5 * (eps_lo + eps_hi);
            const Evaluation baseline = evaluate_configuration(link, p, eps, opt);
            best.rescales += baseline.rescaled;
            // The incumbent starts as the random draw at the first midpoint.
            if (iteration == 0)
                adopt(baseline);

            // Extra sweeps iterate the FP updates; the candidate is the best iterate.
            Evaluation current = baseline, cand;
            cand.sum_se = -std::numeric_limits<double>::infinity();
            double mu = 0.0;
            for (std::size_t sweep = 0; sweep < std::max<std::size_t>(opt.fp_sweeps, 1); ++sweep)
            {
                FpStep step = fp_step(link, current, current.gamma, opt);
                best.boundary_hits += step.mu.boundary;
                best.rescales += step.result.rescaled;
                current = std::move(step.result);
                if (current.sum_se > cand.sum_se)
                {
                    cand = current;
                    mu = step.mu.mu;
                }
            }

            TraceRow row;
            row.iteration = iteration++;
            row.epsilon = eps;
            row.mu = mu;
            row.baseline_se = baseline.sum_se;
            row.candidate_se = cand.sum_se;
            if (cand.sum_se < best.sum_se)
                eps_hi = eps;
            else
            {
                eps_lo = eps;
                p = cand.p;
                row.accepted = true;
                adopt(cand);
            }
            row.incumbent_se = best.sum_se;
            best.trace.push_back(row);
        } while (eps_hi - eps_lo > opt.tol);

        return best;
    }

    OptimizeResult optimize(const LinkState &link, const OptimizerOptions &opt, std::mt19937_64 &rng)
    {
        std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
        CVec p0(link.n_ris());
        for (Eigen::Index i = 0; i < p0.size(); ++i)
            p0[i] = std::polar(1.0, phase(rng));
        return optimize_from(link, opt, p0);
    }

    void write_trace_csv(std::ostream &os, const std::vector<TraceRow> &trace)
    {
        os << "iteration,epsilon,mu,sum_se\n";
        for (const auto &r : trace)
            os << r.iteration << ',' << r.epsilon << ',' << r.mu << ',' << r.incumbent_se << '\n';
    }

} // namespace ribs
