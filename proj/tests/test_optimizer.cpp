/*
 Copyright 2026 The slidoc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/LU>

#include "slidoc/error.hpp"
#include "slidoc/optimizer.hpp"
#include "slidoc/problems.hpp"
#include "slidoc/verify.hpp"
#include "support.hpp"

using namespace slidoc;
using slidoc::testing::vec;

namespace
{
    template <class F>
    ErrorCode code_of(F &&f)
    {
        try
        {
            f();
        }
        catch (const Error &e)
        {
            return e.code();
        }
        FAIL("expected an error");
        return ErrorCode::IoError;
    }

    /// Scalar objective f0(u) = a u + b u^2 on [-10, 10], no constraints.
    class Quadratic1d : public Nlp
    {
    public:
        Quadratic1d(double a, double b) : a_(a), b_(b) {}
        int dimension() const override { return 1; }
        Vector lower() const override { return vec({-10.0}); }
        Vector upper() const override { return vec({10.0}); }
        NlpEvaluation evaluate(const Vector &u, bool gradients) const override
        {
            NlpEvaluation ev;
            ev.f0 = a_ * u(0) + b_ * u(0) * u(0);
            ev.has_gradients = gradients;
            if (gradients)
            {
                ev.grad_f0 = vec({a_ + 2 * b_ * u(0)});
                ev.jac_g1.resize(0, 1);
                ev.jac_g2.resize(0, 1);
            }
            return ev;
        }

    private:
        double a_, b_;
    };

    NlpEvaluation plain(const Vector &grad)
    {
        NlpEvaluation ev;
        ev.has_gradients = true;
        ev.grad_f0 = grad;
        ev.jac_g1.resize(0, grad.size());
        ev.jac_g2.resize(0, grad.size());
        return ev;
    }

    /// Minimizes 1/2 y'Py + q'y over A y <= b by trying every active set of up to three rows.
    Vector enumerate_qp(const Matrix &P, const Vector &q, const Matrix &A, const Vector &b)
    {
        const int nv = static_cast<int>(q.size());
        const int nr = static_cast<int>(A.rows());
        Vector best;
        double best_obj = std::numeric_limits<double>::infinity();
        for (int mask = 0; mask < (1 << nr); ++mask)
        {
            std::vector<int> set;
            for (int r = 0; r < nr; ++r)
                if (mask & (1 << r))
                    set.push_back(r);
            if (set.size() > static_cast<std::size_t>(nv))
                continue;
            const int na = static_cast<int>(set.size());
            Matrix kkt = Matrix::Zero(nv + na, nv + na);
            Vector rhs(nv + na);
            kkt.topLeftCorner(nv, nv) = P;
            rhs.head(nv) = -q;
            for (int i = 0; i < na; ++i)
            {
                kkt.block(nv + i, 0, 1, nv) = A.row(set[i]);
                kkt.block(0, nv + i, nv, 1) = A.row(set[i]).transpose();
                rhs(nv + i) = b(set[i]);
            }
            Eigen::FullPivLU<Matrix> lu(kkt);
            if (lu.rank() < nv + na)
                continue;
            const Vector sol = lu.solve(rhs);
            const Vector y = sol.head(nv);
            if (((A * y - b).array() > 1e-12).any() || (sol.tail(na).array() < -1e-12).any())
                continue;
            const double obj = 0.5 * y.dot(P * y) + q.dot(y);
            if (obj < best_obj)
            {
                best_obj = obj;
                best = y;
            }
        }
        return best;
    }
} // namespace

TEST_CASE("constraint violation")
{
    NlpEvaluation ev;
    ev.g1 = vec({-0.01});
    ev.g2 = vec({-0.2, -1.0});
    CHECK(constraint_violation(ev) == 0.01);
    ev.g1 = Vector();
    CHECK(constraint_violation(ev) == 0.0);
    ev.g1 = vec({-0.3});
    CHECK(constraint_violation(ev) == 0.3);
    ev.g1 = vec({0.1});
    ev.g2 = vec({0.4});
    CHECK(constraint_violation(ev) == 0.4);
}

TEST_CASE("penalty value")
{
    CHECK(penalty_value(1.0, 0.0, 10.0) == 1.0);
    CHECK(penalty_value(1.0, 0.5, 10.0) == 6.0);
    CHECK(penalty_value(1.0, 0.5, 20.0) > penalty_value(1.0, 0.5, 10.0));
}

TEST_CASE("penalty config validation")
{
    PenaltyConfig cfg;
    CHECK_NOTHROW(cfg.validate(3));
    CHECK(cfg.nu1_bound == 1.0);
    cfg.eta = 1.5;
    CHECK(code_of([&] { cfg.validate(3); }) == ErrorCode::ValidationError);
    cfg = {};
    cfg.H = Matrix::Identity(2, 2);
    cfg.H(0, 1) = 0.5;
    CHECK(code_of([&] { cfg.validate(2); }) == ErrorCode::ValidationError);
    cfg.H(1, 0) = 0.5;
    CHECK_NOTHROW(cfg.validate(2));
    CHECK(std::abs(cfg.nu1_bound - 0.5) <= 1e-14);
    CHECK(std::abs(cfg.nu2_bound - 1.5) <= 1e-14);
    cfg.H = -Matrix::Identity(2, 2);
    CHECK(code_of([&] { cfg.validate(2); }) == ErrorCode::ValidationError);
}

TEST_CASE("unconstrained subproblem is a gradient step")
{
    const auto ev = plain(vec({0.3, -1.2, 2.0}));
    const Vector big = Vector::Constant(3, 100.0);
    const auto dir = direction_subproblem(ev, Vector::Zero(3), -big, big, 1.0, Matrix::Identity(3, 3));
    CHECK((dir.d + ev.grad_f0).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(dir.beta == 0.0);
    CHECK(dir.kkt_residual <= 1e-8);

    const auto zero = direction_subproblem(plain(Vector::Zero(3)), Vector::Zero(3), -big, big, 1.0,
                                           Matrix::Identity(3, 3));
    CHECK(zero.d.norm() == 0.0);
    CHECK(zero.beta == 0.0);
}

TEST_CASE("two-variable subproblem matches active-set enumeration")
{
    for (double g2 : {0.5, -0.2, 3.0})
    {
        for (double c : {0.3, 1.0, 10.0})
        {
            NlpEvaluation ev = plain(vec({1.0, -2.0}));
            ev.g2 = vec({g2});
            ev.jac_g2 = Matrix(1, 2);
            ev.jac_g2 << 1.0, 1.0;
            const Vector u = vec({0.2, -0.4});
            const Vector lo = vec({-1.0, -1.0});
            const Vector hi = vec({1.0, 1.0});
            const auto dir = direction_subproblem(ev, u, lo, hi, c, Matrix::Identity(2, 2));

            Matrix P = Matrix::Zero(3, 3);
            P(0, 0) = P(1, 1) = 1.0;
            const Vector q = vec({1.0, -2.0, c});
            Matrix A(6, 3);
            A << 1, 1, -1, 0, 0, -1, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0;
            const Vector b = vec({-g2, 0.0, hi(0) - u(0), u(0) - lo(0), hi(1) - u(1), u(1) - lo(1)});
            const Vector y = enumerate_qp(P, q, A, b);
            REQUIRE(y.size() == 3);
            CHECK((dir.d - y.head(2)).cwiseAbs().maxCoeff() <= 1e-6);
            CHECK(std::abs(dir.beta - y(2)) <= 1e-6);
        }
    }
}

TEST_CASE("subproblem solution does not depend on constraint order")
{
    NlpEvaluation ev = plain(vec({0.5, -1.0, 0.25}));
    ev.g1 = vec({0.2});
    ev.jac_g1 = Matrix(1, 3);
    ev.jac_g1 << 1.0, -0.5, 0.3;
    ev.g2 = vec({0.1, -0.3, 0.05});
    ev.jac_g2 = Matrix(3, 3);
    ev.jac_g2 << 0.2, 1.0, 0.0, -1.0, 0.3, 0.7, 0.5, 0.5, 0.5;
    const Vector u = Vector::Zero(3);
    const Vector lo = Vector::Constant(3, -0.6);
    const Vector hi = Vector::Constant(3, 0.6);
    const auto base = direction_subproblem(ev, u, lo, hi, 2.0, Matrix::Identity(3, 3));

    NlpEvaluation perm = ev;
    perm.g2 = vec({ev.g2(2), ev.g2(0), ev.g2(1)});
    perm.jac_g2.row(0) = ev.jac_g2.row(2);
    perm.jac_g2.row(1) = ev.jac_g2.row(0);
    perm.jac_g2.row(2) = ev.jac_g2.row(1);
    const auto other = direction_subproblem(perm, u, lo, hi, 2.0, Matrix::Identity(3, 3));
    CHECK((base.d - other.d).norm() <= 1e-8);
}

TEST_CASE("descent and test function")
{
    NlpEvaluation ev = plain(vec({1.0}));
    ev.g1 = vec({0.5});
    ev.jac_g1 = Matrix::Zero(1, 1);
    const auto t0 = descent_and_test(ev, vec({0.0}), 0.5, 10.0);
    CHECK(t0.sigma == 0.0);
    const auto t1 = descent_and_test(ev, vec({-1.0}), 0.5, 10.0);
    CHECK(t1.sigma == -1.0);
    CHECK(std::abs(t1.t_c + 0.95) <= 1e-15);
    const auto t2 = descent_and_test(plain(vec({2.0})), vec({-0.25}), 0.0, 3.0);
    CHECK(t2.t_c == t2.sigma);
}

TEST_CASE("penalty adjustment")
{
    PenaltyConfig cfg;
    cfg.validate(1);
    const Vector big = vec({100.0});
    const auto a = adjust_penalty(plain(vec({1.0})), vec({0.0}), -big, big, 4.0, cfg);
    CHECK(a.c == 4.0);
    CHECK(a.increases == 0);
    CHECK(a.test.t_c <= 0.0);

    // infeasible equality with a vanishing gradient and a stationary objective
    NlpEvaluation ev = plain(vec({0.0}));
    ev.g1 = vec({1.0});
    ev.jac_g1 = Matrix::Zero(1, 1);
    CHECK(code_of([&] { adjust_penalty(ev, vec({0.0}), -big, big, 1.0, cfg); }) == ErrorCode::CFailure);
}

TEST_CASE("armijo line search")
{
    PenaltyConfig cfg;
    cfg.validate(1);
    // F(alpha) = F(0) - alpha + alpha^2
    const Quadratic1d quad(-1.0, 1.0);
    const auto ls = line_search(quad, vec({0.0}), vec({1.0}), 0.0, -1.0, 1.0, cfg);
    CHECK(ls.alpha == 0.5);
    CHECK(ls.trials == 2);

    const Quadratic1d lin(-1.0, 0.0);
    CHECK(line_search(lin, vec({0.0}), vec({1.0}), 0.0, -1.0, 1.0, cfg).alpha == 1.0);

    // wrong sign of the slope cannot be satisfied
    const Quadratic1d up(1.0, 0.0);
    cfg.max_line_search = 10;
    CHECK(code_of([&] { line_search(up, vec({0.0}), vec({1.0}), 0.0, -1.0, 1.0, cfg); }) ==
          ErrorCode::LineSearchFailure);
}

TEST_CASE("stationary feasible start stops at once")
{
    const Quadratic1d quad(0.0, 1.0);
    const auto res = optimize(quad, vec({0.0}), {});
    CHECK(res.converged);
    REQUIRE(res.history.size() == 1);
    CHECK(std::abs(res.history[0].sigma) <= 1e-15);
}

TEST_CASE("unconstrained smooth problem reaches stationarity")
{
    const auto inst = make_problem("smooth-linear");
    IntegratorOptions iopts;
    const HybridNlp nlp(inst.ocp, radau_iia_3(), iopts);
    PenaltyConfig cfg;
    cfg.H = 0.03 * Matrix::Identity(10, 10);
    const auto res = optimize(nlp, Vector::Constant(10, 0.5), cfg);
    CHECK(res.converged);
    CHECK(res.history.size() <= 201);
    const auto fd = fd_gradient(inst.ocp, radau_iia_3(), ControlGrid::from_flat(res.u, 1), {FunctionalId{}});
    CHECK(fd.gradients[0].cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("constrained toy satisfies the iteration contract")
{
    const auto inst = make_problem("constrained-toy");
    const HybridNlp nlp(inst.ocp, radau_iia_3(), {});
    PenaltyConfig cfg;
    const auto res = optimize(nlp, Vector::Zero(10), cfg);
    REQUIRE(res.converged);
    double c_prev = 0.0;
    for (const auto &it : res.history)
    {
        CHECK(it.sigma <= 1e-10);
        CHECK(it.t_c <= 1e-10);
        CHECK(it.c >= c_prev);
        c_prev = it.c;
        if (it.alpha > 0.0)
            CHECK(it.penalty_next - it.penalty <= cfg.gamma * it.alpha * it.sigma + 1e-14 * std::abs(it.penalty));
    }
    CHECK(res.history.back().violation <= 1e-6);
    CHECK(std::abs(res.history.back().sigma) <= 1e-6);
}
