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

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace ribs;
using namespace testing;
using Catch::Approx;

namespace
{
    RVec random_eta(Eigen::Index K, rng_t &rng)
    {
        std::uniform_real_distribution<double> u(0.05, 1.0);
        RVec eta(K);
        for (Eigen::Index k = 0; k < K; ++k)
            eta[k] = u(rng);
        return eta;
    }

    struct Instance
    {
        LinkState link;
        CMat W;
        RVec eta, rho;
        CVec p;
    };

    Instance random_instance(rng_t &rng, Eigen::Index n_bs = 4, Eigen::Index n_ris = 8, Eigen::Index K = 3)
    {
        Instance in;
        in.link = random_link(n_bs, n_ris, K, rng, 0.05, 0.1);
        in.W = unit_columns(random_cmat(n_bs, K, rng));
        in.eta = random_eta(K, rng);
        in.p = random_cvec(n_ris, rng);
        in.rho = sinr_all(in.link, in.p, in.W, in.eta);
        return in;
    }

    double penalized(const Quadratic &q, const CMat &Pi, double mu, const CVec &p)
    {
        return 2.0 * p.dot(q.upsilon).real() - (p.adjoint() * (q.Omega + mu * Pi) * p)(0, 0).real();
    }

    OptimizerOptions small_options()
    {
        OptimizerOptions o;
        o.p_max = 1.0;
        o.scheme = PrecoderScheme::rzf;
        return o;
    }
} // namespace

TEST_CASE("rho update closed form")
{
    RVec xi(4);
    xi << 0.0, 1.0, 2.0, -3.0;
    const RVec rho = update_rho(xi);
    CHECK(rho[0] == 0.0);
    CHECK(rho[1] == Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
    CHECK(rho[2] == Approx(2.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(rho[3] == 0.0);
}

TEST_CASE("interference term accounting")
{
    rng_t rng(1);
    Instance in = random_instance(rng);
    CHECK(interference_term(in.link, CVec::Zero(8), in.W, in.eta, 1) == in.link.sigma_ue2[1]);

    LinkState one = random_link(4, 8, 1, rng, 0.0, 0.2);
    const CMat w = unit_columns(random_cmat(4, 1, rng));
    const RVec e = RVec::Constant(1, 0.7);
    const cx a = (cascaded_channel(one, in.p, 0).transpose() * w.col(0))(0);
    CHECK(interference_term(one, in.p, w, e, 0) == Approx(0.7 * std::norm(a) + 0.2).epsilon(1e-13));

    for (int t = 0; t < 50; ++t)
    {
        const Instance r = random_instance(rng);
        const RVec I = interference_terms(r.link, r.p, r.W, r.eta);
        for (Eigen::Index k = 0; k < 3; ++k)
        {
            const cx ak = (cascaded_channel(r.link, r.p, k).transpose() * r.W.col(k))(0);
            const double useful = r.eta[k] * std::norm(ak);
            const double gamma = sinr(r.link, r.p, r.W, r.eta, k);
            const double denom = useful / gamma;
            CHECK(rel_err(I[k] - denom, useful) < 1e-10);
            CHECK(rel_err(interference_term(r.link, r.p, r.W, r.eta, k), I[k]) < 1e-12);
        }
    }
}

TEST_CASE("varpi update base cases")
{
    rng_t rng(2);
    Instance in = random_instance(rng);
    in.eta[0] = 0.0;
    CHECK(update_varpi(in.link, in.p, in.W, in.eta, in.rho)[0] == cx(0.0));

    LinkState unit;
    unit.H = CMat::Ones(1, 1);
    unit.h = CMat::Ones(1, 1);
    unit.sigma_ris2 = 0.0;
    unit.sigma_ue2 = RVec::Zero(1);
    const CVec varpi = update_varpi(unit, CVec::Ones(1), CMat::Ones(1, 1), RVec::Ones(1), RVec::Zero(1));
    CHECK(varpi[0] == cx(1.0));
}

TEST_CASE("auxiliary updates are stationary points of the reformulated objective", "[fp]")
{
    rng_t rng(3);
    for (int t = 0; t < 30; ++t)
    {
        const Instance in = random_instance(rng);
        const CVec varpi = update_varpi(in.link, in.p, in.W, in.eta, in.rho);
        const double h = 1e-4;
        for (Eigen::Index k = 0; k < 3; ++k)
        {
            for (const cx dir : {cx(1.0, 0.0), cx(0.0, 1.0)})
            {
                CVec up = varpi, dn = varpi;
                up[k] += h * dir;
                dn[k] -= h * dir;
                const double g = (fp_objective(in.link, in.p, in.W, in.eta, in.rho, up) -
                                  fp_objective(in.link, in.p, in.W, in.eta, in.rho, dn)) / (2.0 * h);
                CHECK(std::abs(g) < 1e-6);
            }
        }

        const RVec rho = update_rho(compute_xi(in.link, in.p, in.W, in.eta, varpi));
        for (Eigen::Index k = 0; k < 3; ++k)
        {
            const double hr = 1e-5 * std::max(1.0, rho[k]);
            RVec up = rho, dn = rho;
            up[k] += hr;
            dn[k] -= hr;
            const double g = (fp_objective(in.link, in.p, in.W, in.eta, up, varpi) -
                              fp_objective(in.link, in.p, in.W, in.eta, dn, varpi)) / (2.0 * hr);
            CHECK(std::abs(g) < 1e-6);
        }
    }
}

TEST_CASE("auxiliaries started at the SINR reproduce the SINR")
{
    rng_t rng(4);
    for (int t = 0; t < 30; ++t)
    {
        const Instance in = random_instance(rng);
        const CVec varpi = update_varpi(in.link, in.p, in.W, in.eta, in.rho);
        const RVec rho = update_rho(compute_xi(in.link, in.p, in.W, in.eta, varpi));
        for (Eigen::Index k = 0; k < 3; ++k)
            CHECK(rel_err(rho[k], in.rho[k]) < 1e-9);
        // the bound is tight: f equals the sum rate in nats
        const double f = fp_objective(in.link, in.p, in.W, in.eta, rho, varpi);
        CHECK(rel_err(f, std::log(2.0) * sum_se(in.rho)) < 1e-9);
    }
}

TEST_CASE("quadratic form base cases")
{
    rng_t rng(5);
    const Instance in = random_instance(rng);
    const auto zero = assemble_quadratic(in.link, in.W, in.eta, in.rho, CVec::Zero(3));
    CHECK(zero.upsilon.norm() == 0.0);
    CHECK(zero.Omega.norm() == 0.0);

    LinkState quiet = random_link(4, 8, 1, rng, 0.0, 0.1);
    const auto q = assemble_quadratic(quiet, unit_columns(random_cmat(4, 1, rng)), RVec::Zero(1), RVec::Ones(1),
                                      CVec::Ones(1));
    CHECK(q.Omega.norm() == 0.0);
}

TEST_CASE("quadratic form reproduces objective differences in p")
{
    rng_t rng(6);
    for (int t = 0; t < 50; ++t)
    {
        const Instance in = random_instance(rng);
        const CVec varpi = update_varpi(in.link, in.p, in.W, in.eta, in.rho);
        const auto q = assemble_quadratic(in.link, in.W, in.eta, in.rho, varpi);
        const CVec p1 = random_cvec(8, rng), p2 = random_cvec(8, rng);
        auto quad = [&q](const CVec &p) { return 2.0 * p.dot(q.upsilon).real() - (p.adjoint() * q.Omega * p)(0, 0).real(); };
        const double d_fp = fp_objective(in.link, p1, in.W, in.eta, in.rho, varpi) -
                            fp_objective(in.link, p2, in.W, in.eta, in.rho, varpi);
        const double d_q = quad(p1) - quad(p2);
        CHECK(std::abs(d_fp - d_q) < 1e-9 * std::max(1.0, std::abs(d_fp)));
        CHECK((q.Omega - q.Omega.adjoint()).norm() < 1e-12 * q.Omega.norm());
    }
}

TEST_CASE("closed-form solve", "[fp]")
{
    rng_t rng(7);
    const CVec v = random_cvec(6, rng);
    const CMat I = CMat::Identity(6, 6);
    CHECK((solve_p(v, I, I, 3.0) - v / 4.0).norm() < 1e-15);
    CHECK(solve_p(CVec::Zero(6), I, I, 3.0).norm() == 0.0);

    for (int t = 0; t < 50; ++t)
    {
        const CMat Omega = random_psd(16, rng);
        const CMat Pi = RVec::NullaryExpr(16, [&rng]() { return 0.01 + std::abs(complex_normal(rng)); }).cast<cx>().asDiagonal();
        const CVec u = random_cvec(16, rng);
        const double mu = std::abs(complex_normal(rng));
        const CVec p = solve_p(u, Omega, Pi, mu);
        CHECK(((Omega + mu * Pi) * p - u).norm() / u.norm() < 1e-10);
    }
    CHECK_THROWS_AS(solve_p(v, CMat::Zero(6, 6), I, 0.0), numeric_error);
}

TEST_CASE("closed-form solve maximizes the penalized objective")
{
    rng_t rng(8);
    for (int t = 0; t < 30; ++t)
    {
        const Instance in = random_instance(rng);
        const CVec varpi = update_varpi(in.link, in.p, in.W, in.eta, in.rho);
        const RVec rho = update_rho(compute_xi(in.link, in.p, in.W, in.eta, varpi));
        const auto q = assemble_quadratic(in.link, in.W, in.eta, rho, varpi);
        const CMat Pi = ris_power_matrix(in.link, in.W, in.eta).Pi;
        const double mu = 0.5;
        const CVec p = solve_p(q.upsilon, q.Omega, Pi, mu);
        const double best = penalized(q, Pi, mu, p);
        for (int s = 0; s < 20; ++s)
        {
            const CVec d = 1e-4 * random_cvec(8, rng).normalized();
            CHECK(penalized(q, Pi, mu, (p + d).eval()) <= best + 1e-14 * std::abs(best));
        }
    }
}

TEST_CASE("mu bisection: identity instance, zero upsilon, feasibility and slackness", "[fp]")
{
    const CMat I = CMat::Identity(4, 4);
    CVec v(4);
    v << cx(6, 0), cx(0, 8), cx(0, 0), cx(0, 0); // |v| = 10
    const double eps = 0.25, pmax = 1.0, tol = 1e-3;
    const MuSearch m = mu_bisection(v, I, I, eps, pmax, tol);
    const double mu_star = v.norm() / std::sqrt(eps * pmax) - 1.0;
    CHECK(std::abs(m.mu - mu_star) <= tol);
    CHECK(m.reflect_power <= eps * pmax * (1.0 + 1e-6));
    CHECK_FALSE(m.boundary);

    const MuSearch z = mu_bisection(CVec::Zero(4), I, I, eps, pmax, tol);
    CHECK(z.p.norm() == 0.0);
    CHECK(z.mu == 0.0);

    // slack constraint: tiny upsilon is feasible at mu = 0
    const MuSearch s = mu_bisection((1e-3 * v).eval(), I, I, eps, pmax, tol);
    CHECK(s.mu <= tol);
    CHECK(s.reflect_power <= eps * pmax);

    rng_t rng(9);
    for (int t = 0; t < 100; ++t)
    {
        const Instance in = random_instance(rng);
        const CVec varpi = update_varpi(in.link, in.p, in.W, in.eta, in.rho);
        const RVec rho = update_rho(compute_xi(in.link, in.p, in.W, in.eta, varpi));
        const auto q = assemble_quadratic(in.link, in.W, in.eta, rho, varpi);
        const CMat Pi = ris_power_matrix(in.link, in.W, in.eta).Pi;
        std::uniform_real_distribution<double> ue(0.05, 0.95);
        const double e = ue(rng);
        const MuSearch r = mu_bisection(q.upsilon, q.Omega, Pi, e, pmax, tol);
        const double budget = e * pmax;
        const double used = (r.p.adjoint() * Pi * r.p)(0, 0).real();
        CHECK(used <= budget * (1.0 + 1e-6));
        CHECK(std::abs(r.mu * (used - budget)) < tol * budget);
        CHECK(r.mu >= 0.0);
        CHECK(r.mu <= default_mu_max);
        CHECK((r.p - solve_p(q.upsilon, q.Omega, Pi, r.mu)).norm() <= 1e-12 * r.p.norm());

        // reflect power never increases with mu
        double prev = INFINITY;
        for (double mu = 1e-3; mu < 1e4; mu *= 3.0)
        {
            const CVec p = solve_p(q.upsilon, q.Omega, Pi, mu);
            const double pw = (p.adjoint() * Pi * p)(0, 0).real();
            CHECK(pw <= prev * (1.0 + 1e-12));
            prev = pw;
        }
    }
}

TEST_CASE("heuristic power allocation")
{
    rng_t rng(10);
    const Instance in = random_instance(rng);
    CHECK((power_weights(in.link, in.p, 0.0) - RVec::Constant(3, 1.0 / 3.0)).norm() < 1e-15);
    CHECK(power_weights(in.link, in.p, 0.5).sum() == Approx(1.0).epsilon(1e-15));

    // single UE, tiny p: the BS branch is the binding one
    LinkState one = random_link(4, 8, 1, rng, 1e-6, 0.1);
    const CVec small = 1e-3 * random_cvec(8, rng);
    const CMat w = unit_columns(random_cmat(4, 1, rng));
    CHECK(heuristic_power_allocation(one, small, w, 0.3, 2.0, 0.5)[0] == Approx(0.7 * 2.0).epsilon(1e-15));

    // precondition
    CHECK_THROWS_AS(heuristic_power_allocation(in.link, (1e3 * in.p).eval(), in.W, 0.5, 1.0, 0.5), power_budget_error);

    for (int t = 0; t < 100; ++t)
    {
        const Instance r = random_instance(rng, 4, 8, 1 + t % 5);
        std::uniform_real_distribution<double> ue(0.05, 0.95), sc(0.01, 2.0);
        const double e = ue(rng), pmax = 1.0;
        CVec p = r.p;
        // keep ||p||^2 sigma_R^2 within the RIS budget
        p *= sc(rng) * std::sqrt(e * pmax / r.link.sigma_ris2) / p.norm();
        if (p.squaredNorm() * r.link.sigma_ris2 > e * pmax)
            continue;
        const RVec eta = heuristic_power_allocation(r.link, p, r.W, e, pmax, 0.5);
        CHECK(eta.minCoeff() >= 0.0);
        CHECK(eta.sum() <= (1.0 - e) * pmax * (1.0 + 1e-12) + 1e-9);
        CHECK(ris_power_matrix(r.link, r.W, eta)(p) <= e * pmax * (1.0 + 1e-12) + 1e-9);
    }
}

TEST_CASE("optimizer output satisfies every constraint and the incumbent never drops", "[fp]")
{
    rng_t rng(11);
    for (int t = 0; t < 100; ++t)
    {
        const Eigen::Index K = 1 + t % 4;
        const LinkState link = random_link(4, 8, K, rng, 0.01 * (1 + t % 3), 0.05);
        OptimizerOptions opt = small_options();
        opt.scheme = static_cast<PrecoderScheme>(t % 3);
        const OptimizeResult r = optimize(link, opt, rng);

        REQUIRE_FALSE(r.trace.empty());
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            CHECK(r.trace[i].incumbent_se >= r.trace[i - 1].incumbent_se);
        CHECK(r.sum_se == r.trace.back().incumbent_se);
        for (const auto &row : r.trace)
            if (row.accepted)
                CHECK(row.incumbent_se == row.candidate_se);

        CHECK(r.epsilon > 0.0);
        CHECK(r.epsilon < 1.0);
        const RVec &eta = r.precoders.eta;
        CHECK(eta.minCoeff() >= 0.0);
        CHECK(eta.sum() <= (1.0 - r.epsilon) * opt.p_max * (1.0 + 1e-6));
        CHECK(ris_power_matrix(link, r.precoders.W, eta)(r.p) <= r.epsilon * opt.p_max * (1.0 + 1e-6));
        CHECK(rel_err(sum_se(link, r.p, r.precoders.W, eta), r.sum_se) < 1e-12);

        // the auxiliaries are tight at the returned configuration
        Evaluation ev = evaluate_configuration(link, r.p, r.epsilon, opt);
        const FpStep step = fp_step(link, ev, ev.gamma, opt);
        for (Eigen::Index k = 0; k < K; ++k)
            CHECK(step.rho[k] == Approx(ev.gamma[k]).epsilon(0.05));
    }
}

TEST_CASE("bisection on epsilon stops at the tolerance")
{
    rng_t rng(12);
    const LinkState link = random_link(4, 8, 3, rng);
    OptimizerOptions opt = small_options();
    for (double tol : {1e-1, 1e-2, 1e-3})
    {
        opt.tol = tol;
        const OptimizeResult r = optimize(link, opt, rng);
        CHECK(r.trace.size() == static_cast<std::size_t>(std::ceil(std::log2(1.0 / tol))));
    }
}

TEST_CASE("a global phase on the starting point does not change the result")
{
    rng_t rng(13);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
    for (int t = 0; t < 20; ++t)
    {
        const LinkState link = random_link(4, 8, 3, rng, 0.02, 0.05);
        const OptimizerOptions opt = small_options();
        const CVec p0 = random_cvec(8, rng);
        const OptimizeResult a = optimize_from(link, opt, p0);
        const OptimizeResult b = optimize_from(link, opt, (std::polar(1.0, ang(rng)) * p0).eval());
        CHECK(std::abs(a.sum_se - b.sum_se) < 1e-6 * std::max(1.0, a.sum_se));
    }
}

TEST_CASE("single user without RIS noise: no random configuration beats the optimizer")
{
    rng_t rng(14);
    for (int t = 0; t < 5; ++t)
    {
        const LinkState link = random_link(4, 8, 1, rng, 0.0, 0.1);
        OptimizerOptions opt = small_options();
        opt.scheme = PrecoderScheme::mr;
        const OptimizeResult r = optimize(link, opt, rng);

        std::uniform_real_distribution<double> ue(0.01, 0.99), fill(0.01, 1.0);
        double best_random = 0.0;
        for (int s = 0; s < 10000; ++s)
        {
            const double e = ue(rng);
            const CVec p = random_reflection(link, e, opt, rng, fill(rng));
            best_random = std::max(best_random, evaluate_configuration(link, p, e, opt).sum_se);
        }
        INFO("optimized " << r.sum_se << ", best random " << best_random);
        CHECK(r.sum_se >= best_random);
    }
}

TEST_CASE("trace CSV")
{
    std::vector<TraceRow> rows(2);
    rows[0].iteration = 0;
    rows[0].epsilon = 0.5;
    rows[0].incumbent_se = 3.0;
    rows[1].iteration = 1;
    rows[1].epsilon = 0.75;
    rows[1].mu = 2.0;
    rows[1].incumbent_se = 3.5;
    std::ostringstream os;
    write_trace_csv(os, rows);
    CHECK(os.str() == "iteration,epsilon,mu,sum_se\n0,0.5,0,3\n1,0.75,2,3.5\n");
}

TEST_CASE("invalid optimizer inputs")
{
    rng_t rng(15);
    const LinkState link = random_link(4, 8, 2, rng);
    OptimizerOptions opt = small_options();
    CHECK_THROWS_AS(optimize_from(link, opt, CVec::Ones(5)), invalid_input);
    CHECK_THROWS_AS(evaluate_configuration(link, CVec::Ones(8), 1.0, opt), invalid_input);
    opt.p_max = 0.0;
    CHECK_THROWS_AS(optimize_from(link, opt, CVec::Ones(8)), invalid_input);
    CHECK_THROWS_AS(mu_bisection(CVec::Ones(8), CMat::Identity(8, 8), CMat::Identity(8, 8), 0.0, 1.0, 1e-3), invalid_input);
}
