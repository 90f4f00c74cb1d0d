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

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

using namespace ribs;
using namespace testing;
using Catch::Approx;

namespace
{
    // SINR of UE k written out term by term from its definition.
    double sinr_oracle(const LinkState &L, const CVec &p, const CMat &W, const RVec &eta, Eigen::Index k)
    {
        const Eigen::Index n_ris = L.H.cols(), n_bs = L.H.rows(), K = L.h.cols();
        // G_k = H diag(h_k), elementwise
        CMat G(n_bs, n_ris);
        for (Eigen::Index a = 0; a < n_bs; ++a)
            for (Eigen::Index r = 0; r < n_ris; ++r)
                G(a, r) = L.H(a, r) * L.h(r, k);
        auto amp = [&](Eigen::Index j)
        {
            cx s = 0.0;
            for (Eigen::Index r = 0; r < n_ris; ++r)
                for (Eigen::Index a = 0; a < n_bs; ++a)
                    s += p[r] * G(a, r) * W(a, j);
            return s;
        };
        double interf = 0.0;
        for (Eigen::Index j = 0; j < K; ++j)
            if (j != k)
                interf += eta[j] * std::norm(amp(j));
        double ris_noise = 0.0;
        for (Eigen::Index r = 0; r < n_ris; ++r)
            ris_noise += std::norm(p[r] * L.h(r, k));
        return eta[k] * std::norm(amp(k)) / (interf + ris_noise * L.sigma_ris2 + L.sigma_ue2[k]);
    }

    RVec random_eta(Eigen::Index K, rng_t &rng)
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        RVec eta(K);
        for (Eigen::Index k = 0; k < K; ++k)
            eta[k] = u(rng);
        return eta;
    }
} // namespace

TEST_CASE("cascaded channel: zero p, scalar RIS, two evaluation routes")
{
    rng_t rng(1);
    const LinkState L = random_link(4, 6, 3, rng);
    CHECK(cascaded_channel(L, CVec::Zero(6), 1).norm() == 0.0);

    const LinkState S = random_link(4, 1, 2, rng);
    const CVec p1 = random_cvec(1, rng);
    CHECK((cascaded_channel(S, p1, 1) - S.H.col(0) * p1[0] * S.h(0, 1)).norm() < 1e-15);

    for (int t = 0; t < 20; ++t)
    {
        const LinkState R = random_link(16, 64, 5, rng);
        const CVec p = random_cvec(64, rng);
        for (Eigen::Index k = 0; k < 5; ++k)
        {
            const CVec a = R.H * p.asDiagonal() * R.h.col(k);
            const CVec b = R.H * R.h.col(k).asDiagonal() * p;
            CHECK((cascaded_channel(R, p, k) - a).norm() < 1e-12 * a.norm());
            CHECK((R.G(k) * p - b).norm() < 1e-12 * b.norm());
            CHECK((a - b).norm() < 1e-12 * a.norm());
        }
        CHECK((cascaded_channels(R, p).col(2) - cascaded_channel(R, p, 2)).norm() < 1e-12 * cascaded_channel(R, p, 2).norm());
    }

    LinkState bad = L;
    bad.sigma_ue2 = RVec::Constant(2, 1.0);
    CHECK_THROWS_AS(validate(bad), invalid_input);
    CHECK_THROWS_AS(cascaded_channel(L, CVec::Zero(5), 0), invalid_input);
}

TEST_CASE("SINR base cases")
{
    rng_t rng(2);
    LinkState L = random_link(8, 10, 1, rng, 0.0, 0.3);
    const CVec p = random_cvec(10, rng);
    const CVec hb = cascaded_channel(L, p, 0);
    const CMat W = hb.conjugate().normalized();
    CHECK(sinr(L, p, W, RVec::Constant(1, 2.0), 0) == Approx(2.0 * hb.squaredNorm() / 0.3).epsilon(1e-12));

    const LinkState M = random_link(8, 10, 3, rng);
    const CMat W3 = unit_columns(random_cmat(8, 3, rng));
    RVec eta = random_eta(3, rng);
    eta[1] = 0.0;
    CHECK(sinr(M, p, W3, eta, 1) == 0.0);
    CHECK(sum_se(M, p, W3, RVec::Zero(3)) == 0.0);
    CHECK(sum_se(RVec::Constant(1, 1.0)) == 1.0);
}

TEST_CASE("SINR and sum SE against a term-by-term transcription")
{
    rng_t rng(3);
    for (int t = 0; t < 50; ++t)
    {
        const Eigen::Index K = 2 + t % 4;
        const LinkState L = random_link(4, 6, K, rng, 0.05, 0.02);
        const CVec p = random_cvec(6, rng);
        const CMat W = unit_columns(random_cmat(4, K, rng));
        const RVec eta = random_eta(K, rng);
        double se = 0.0;
        const RVec all = sinr_all(L, p, W, eta);
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const double oracle = sinr_oracle(L, p, W, eta, k);
            CHECK(rel_err(sinr(L, p, W, eta, k), oracle) < 1e-12);
            CHECK(all[k] == sinr(L, p, W, eta, k));
            se += std::log2(1.0 + oracle);
        }
        CHECK(rel_err(sum_se(L, p, W, eta), se) < 1e-12);
    }
}

TEST_CASE("reflect power base cases and lower bound")
{
    rng_t rng(4);
    for (int t = 0; t < 30; ++t)
    {
        const LinkState L = random_link(16, 64, 6, rng, 1e-3 * (1 + t));
        const CMat W = unit_columns(random_cmat(16, 6, rng));
        const RVec eta = random_eta(6, rng);
        const RisPower P = ris_power_matrix(L, W, eta);
        CHECK(P(CVec::Zero(64)) == 0.0);
        const CVec p = random_cvec(64, rng);
        CHECK(ris_power_matrix(L, W, RVec::Zero(6))(p) == Approx(L.sigma_ris2 * p.squaredNorm()).epsilon(1e-12));
        CHECK((P.Pi - P.Pi.adjoint()).norm() == 0.0);
        Eigen::SelfAdjointEigenSolver<CMat> es(P.Pi);
        CHECK(es.eigenvalues().minCoeff() >= L.sigma_ris2 - 1e-10);
    }
}

TEST_CASE("reflect power equals the Monte Carlo mean of the re-radiated signal power", "[physics]")
{
    rng_t rng(5);
    for (int t = 0; t < 5; ++t)
    {
        const Eigen::Index n_bs = 4, n_ris = 8, K = 3;
        const LinkState L = random_link(n_bs, n_ris, K, rng, 0.2);
        const CMat W = unit_columns(random_cmat(n_bs, K, rng));
        const RVec eta = random_eta(K, rng);
        const CVec p = random_cvec(n_ris, rng);
        const double analytic = ris_power_matrix(L, W, eta)(p);

        // r = P (H^T sum_j sqrt(eta_j) w_j x_j + z_R), x_j ~ CN(0,1), z_R ~ CN(0, sigma_R^2 I)
        const CMat HtW = L.H.transpose() * W;
        const int n = 100000;
        double acc = 0.0;
        for (int s = 0; s < n; ++s)
        {
            CVec incident = CVec::Zero(n_ris);
            for (Eigen::Index j = 0; j < K; ++j)
                incident += std::sqrt(eta[j]) * complex_normal(rng) * HtW.col(j);
            for (Eigen::Index r = 0; r < n_ris; ++r)
                incident[r] += std::sqrt(L.sigma_ris2) * complex_normal(rng);
            acc += p.cwiseProduct(incident).squaredNorm();
        }
        CHECK(acc / n == Approx(analytic).epsilon(0.01));
    }
}

TEST_CASE("SINR is invariant to a common phase rotation of p")
{
    rng_t rng(6);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
    for (int t = 0; t < 50; ++t)
    {
        const LinkState L = random_link(16, 32, 5, rng);
        const CMat W = unit_columns(random_cmat(16, 5, rng));
        const RVec eta = random_eta(5, rng);
        const CVec p = random_cvec(32, rng);
        const CVec q = std::polar(1.0, ang(rng)) * p;
        for (Eigen::Index k = 0; k < 5; ++k)
            CHECK(rel_err(sinr(L, q, W, eta, k), sinr(L, p, W, eta, k)) < 1e-10);
    }
}

TEST_CASE("without RIS noise, amplifying p never lowers the SINR")
{
    rng_t rng(7);
    for (int t = 0; t < 50; ++t)
    {
        const LinkState L = random_link(8, 16, 4, rng, 0.0, 0.1);
        const CMat W = unit_columns(random_cmat(8, 4, rng));
        const RVec eta = random_eta(4, rng);
        const CVec p = random_cvec(16, rng);
        for (Eigen::Index k = 0; k < 4; ++k)
        {
            double prev = sinr(L, p, W, eta, k);
            for (double c : {1.5, 2.0, 4.0, 10.0})
            {
                const double g = sinr(L, (c * p).eval(), W, eta, k);
                CHECK(g >= prev * (1.0 - 1e-12));
                prev = g;
            }
        }
    }
}
