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

#include "slidoc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "slidoc/gradient.hpp"
#include "slidoc/parallel.hpp"

namespace slidoc
{

    namespace
    {
        constexpr double kInf = std::numeric_limits<double>::infinity();
        constexpr double kKktTolerance = 1e-8;
        constexpr double kPenaltyTestSlack = 1e-13;

        Vector clamp(const Vector &u, const Vector &lo, const Vector &hi) { return u.cwiseMax(lo).cwiseMin(hi); }

        /// Linear inequality rows A y <= b over y = (d, beta).
        struct Rows
        {
            Matrix A;
            Vector b;
        };

        Rows subproblem_rows(const NlpEvaluation &ev, const Vector &u, const Vector &lo, const Vector &hi)
        {
            const auto p = u.size();
            const auto ne = ev.g1.size();
            const auto ni = ev.g2.size();
            std::vector<std::pair<Vector, double>> rows;
            auto add = [&](Vector a, double beta_coeff, double rhs) {
                Vector row(p + 1);
                row.head(p) = a;
                row(p) = beta_coeff;
                rows.emplace_back(std::move(row), rhs);
            };
            for (Eigen::Index i = 0; i < ne; ++i)
            {
                add(ev.jac_g1.row(i).transpose(), -1.0, -ev.g1(i));
                add(-ev.jac_g1.row(i).transpose(), -1.0, ev.g1(i));
            }
            for (Eigen::Index j = 0; j < ni; ++j)
            {
                add(ev.jac_g2.row(j).transpose(), -1.0, -ev.g2(j));
            }
            add(Vector::Zero(p), -1.0, 0.0);
            for (Eigen::Index l = 0; l < p; ++l)
            {
                Vector e = Vector::Zero(p);
                e(l) = 1.0;
                if (std::isfinite(hi(l)))
                {
                    add(e, 0.0, hi(l) - u(l));
                }
                if (std::isfinite(lo(l)))
                {
                    add(-e, 0.0, u(l) - lo(l));
                }
            }
            Rows out;
            out.A.resize(static_cast<Eigen::Index>(rows.size()), p + 1);
            out.b.resize(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t r = 0; r < rows.size(); ++r)
            {
                out.A.row(static_cast<Eigen::Index>(r)) = rows[r].first.transpose();
                out.b(static_cast<Eigen::Index>(r)) = rows[r].second;
            }
            return out;
        }

        struct EqpSolution
        {
            Vector p;
            Vector mu; ///< multipliers of the working rows
        };

        /// Equality-constrained step: P p + A_W^T mu = -grad, A_W p = 0.
        EqpSolution solve_eqp(const Matrix &P, const Vector &grad, const Matrix &AW)
        {
            const auto nv = P.rows();
            const auto nw = AW.rows();
            Matrix kkt = Matrix::Zero(nv + nw, nv + nw);
            kkt.topLeftCorner(nv, nv) = P;
            kkt.topRightCorner(nv, nw) = AW.transpose();
            kkt.bottomLeftCorner(nw, nv) = AW;
            Vector rhs = Vector::Zero(nv + nw);
            rhs.head(nv) = -grad;
            const Vector sol = CheckedLU(kkt, ErrorCode::QPFailure, "direction_subproblem").solve(rhs);
            return {sol.head(nv), sol.tail(nw)};
        }

        Matrix gather(const Matrix &A, const std::vector<int> &idx, Eigen::Index cols)
        {
            Matrix out(static_cast<Eigen::Index>(idx.size()), cols);
            for (std::size_t r = 0; r < idx.size(); ++r)
            {
                out.row(static_cast<Eigen::Index>(r)) = A.row(idx[r]).head(cols);
            }
            return out;
        }
    } // namespace

    HybridNlp::HybridNlp(const HybridOCP &ocp, ButcherTableau tab, IntegratorOptions opts)
        : ocp_(ocp), tab_(std::move(tab)), opts_(std::move(opts))
    {
    }

    Vector HybridNlp::lower() const { return ocp_.u_lo.replicate(ocp_.N, 1); }

    Vector HybridNlp::upper() const { return ocp_.u_hi.replicate(ocp_.N, 1); }

    NlpEvaluation HybridNlp::evaluate(const Vector &u, bool gradients) const
    {
        if (u.size() != dimension())
        {
            fail(ErrorCode::DimensionMismatch, "HybridNlp: control vector has the wrong length");
        }
        const auto traj = integrate(ocp_, ControlGrid::from_flat(u, ocp_.m), tab_, opts_);
        const Vector &xK = traj.x.back();
        const auto ne = static_cast<Eigen::Index>(ocp_.equality.size());
        const auto ni = static_cast<Eigen::Index>(ocp_.inequality.size());

        NlpEvaluation ev;
        ev.f0 = ocp_.cost.value(xK);
        ev.g1.resize(ne);
        ev.g2.resize(ni);
        for (Eigen::Index i = 0; i < ne; ++i)
        {
            ev.g1(i) = ocp_.equality[i].value(xK);
        }
        for (Eigen::Index j = 0; j < ni; ++j)
        {
            ev.g2(j) = ocp_.inequality[j].value(xK);
        }
        if (!gradients)
        {
            return ev;
        }

        const auto ids = ocp_.functionals();
        std::vector<Vector> grads(ids.size());
        parallel_for(ids.size(), [&](std::size_t i) {
            grads[i] = reduced_gradient(ocp_, tab_, traj, run_adjoint(ocp_, tab_, traj, ids[i]));
        });
        ev.has_gradients = true;
        ev.grad_f0 = grads[0];
        ev.jac_g1.resize(ne, dimension());
        ev.jac_g2.resize(ni, dimension());
        for (Eigen::Index i = 0; i < ne; ++i)
        {
            ev.jac_g1.row(i) = grads[1 + i].transpose();
        }
        for (Eigen::Index j = 0; j < ni; ++j)
        {
            ev.jac_g2.row(j) = grads[1 + ne + j].transpose();
        }
        return ev;
    }

    void PenaltyConfig::validate(int dim)
    {
        auto bad = [](const std::string &what) { fail(ErrorCode::ValidationError, "penalty config: " + what); };
        if (!(c0 > 0.0))
            bad("c0 must be positive");
        if (!(kappa > 1.0))
            bad("kappa must exceed 1");
        if (!(gamma > 0.0 && gamma < 1.0))
            bad("gamma must lie in (0, 1)");
        if (!(eta > 0.0 && eta < 1.0))
            bad("eta must lie in (0, 1)");
        if (!(epsilon > 0.0))
            bad("epsilon must be positive");
        if (max_iters < 0 || max_penalty_increases < 0 || max_line_search < 1)
            bad("iteration caps must be nonnegative");
        if (H.size() == 0)
        {
            H = Matrix::Identity(dim, dim);
        }
        if (H.rows() != dim || H.cols() != dim)
            bad("H must be " + std::to_string(dim) + " x " + std::to_string(dim));
        if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, H.cwiseAbs().maxCoeff()))
            bad("H must be symmetric");
        Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
        nu1_bound = eig.eigenvalues().minCoeff();
        nu2_bound = eig.eigenvalues().maxCoeff();
        if (!(nu1_bound > 0.0) || !std::isfinite(nu2_bound))
            bad("H must be positive definite");
    }

    double constraint_violation(const NlpEvaluation &ev)
    {
        double m = 0.0;
        if (ev.g1.size() > 0)
        {
            m = std::max(m, ev.g1.cwiseAbs().maxCoeff());
        }
        if (ev.g2.size() > 0)
        {
            m = std::max(m, ev.g2.maxCoeff());
        }
        return m;
    }

    double penalty_value(const NlpEvaluation &ev, double c) { return penalty_value(ev.f0, constraint_violation(ev), c); }

    Direction direction_subproblem(const NlpEvaluation &ev, const Vector &u, const Vector &lo, const Vector &hi,
                                   double c, const Matrix &H)
    {
        if (!ev.has_gradients)
        {
            fail(ErrorCode::QPFailure, "direction_subproblem: gradients are required");
        }
        const auto p = u.size();
        const auto nv = p + 1;
        const Rows rows = subproblem_rows(ev, u, lo, hi);
        const auto nr = rows.A.rows();

        Matrix P = Matrix::Zero(nv, nv);
        P.topLeftCorner(p, p) = H;
        Vector q(nv);
        q.head(p) = ev.grad_f0;
        q(p) = c;

        // d = 0, beta = M is feasible; start from the tightest beta row
        Vector y = Vector::Zero(nv);
        y(p) = constraint_violation(ev);
        std::vector<int> work;
        {
            int best = -1;
            double best_slack = kInf;
            for (Eigen::Index r = 0; r < nr; ++r)
            {
                if (rows.A(r, p) != 0.0)
                {
                    const double slack = rows.b(r) - rows.A.row(r).dot(y);
                    if (slack < best_slack)
                    {
                        best_slack = slack;
                        best = static_cast<int>(r);
                    }
                }
            }
            work.push_back(best);
        }

        const double scale = std::max({1.0, q.cwiseAbs().maxCoeff()});
        const int max_iters = 10 * static_cast<int>(nr + nv) + 50;
        Direction out;
        Vector mu_full = Vector::Zero(nr);
        bool done = false;
        for (int it = 0; it < max_iters && !done; ++it)
        {
            out.iterations = it + 1;
            const bool has_beta =
                std::any_of(work.begin(), work.end(), [&](int r) { return rows.A(r, p) != 0.0; });
            const Vector grad = P * y + q;
            Vector step;
            double cap = 1.0;
            if (has_beta)
            {
                const auto sol = solve_eqp(P, grad, gather(rows.A, work, nv));
                step = sol.p;
                if (step.cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, y.cwiseAbs().maxCoeff()))
                {
                    Eigen::Index worst = 0;
                    const double min_mu = sol.mu.size() ? sol.mu.minCoeff(&worst) : 0.0;
                    if (min_mu >= -1e-12 * scale)
                    {
                        mu_full.setZero();
                        for (std::size_t w = 0; w < work.size(); ++w)
                        {
                            mu_full(work[w]) = std::max(0.0, sol.mu(static_cast<Eigen::Index>(w)));
                        }
                        done = true;
                        break;
                    }
                    work.erase(work.begin() + worst);
                    continue;
                }
            }
            else
            {
                // beta is free: minimize over d first, then lower beta until a row blocks
                step = Vector::Zero(nv);
                const auto sol = solve_eqp(H, grad.head(p), gather(rows.A, work, p));
                step.head(p) = sol.p;
                if (step.cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, y.cwiseAbs().maxCoeff()))
                {
                    step.setZero();
                    step(p) = -1.0;
                    cap = kInf;
                }
            }

            double alpha = cap;
            int blocking = -1;
            for (Eigen::Index r = 0; r < nr; ++r)
            {
                if (std::find(work.begin(), work.end(), static_cast<int>(r)) != work.end())
                {
                    continue;
                }
                const double ap = rows.A.row(r).dot(step);
                if (ap <= 1e-14 * rows.A.row(r).cwiseAbs().maxCoeff() * step.cwiseAbs().maxCoeff())
                {
                    continue;
                }
                const double ratio = std::max(0.0, rows.b(r) - rows.A.row(r).dot(y)) / ap;
                if (ratio < alpha)
                {
                    alpha = ratio;
                    blocking = static_cast<int>(r);
                }
            }
            if (!std::isfinite(alpha))
            {
                fail(ErrorCode::QPFailure, "direction_subproblem: unbounded descent direction");
            }
            y += alpha * step;
            if (blocking >= 0)
            {
                work.push_back(blocking);
            }
        }
        if (!done)
        {
            fail(ErrorCode::QPFailure, "direction_subproblem: active-set iteration limit reached");
        }

        const Vector slack = rows.b - rows.A * y;
        double res = (P * y + q + rows.A.transpose() * mu_full).cwiseAbs().maxCoeff();
        res = std::max(res, std::max(0.0, -slack.minCoeff()));
        res = std::max(res, (mu_full.array() * slack.array()).abs().maxCoeff());
        out.d = y.head(p);
        out.beta = y(p);
        out.kkt_residual = res;
        if (!(res <= kKktTolerance))
        {
            std::ostringstream os;
            os << "direction_subproblem: KKT residual " << res << " exceeds " << kKktTolerance;
            fail(ErrorCode::QPFailure, os.str());
        }
        return out;
    }

    DescentTest descent_and_test(const NlpEvaluation &ev, const Vector &d, double beta, double c)
    {
        const double m = constraint_violation(ev);
        DescentTest out;
        out.sigma = ev.grad_f0.dot(d) + c * (beta - m);
        out.t_c = out.sigma + m / c;
        return out;
    }

    PenaltyAdjustment adjust_penalty(const NlpEvaluation &ev, const Vector &u, const Vector &lo, const Vector &hi,
                                     double c_prev, const PenaltyConfig &cfg)
    {
        if (!(c_prev > 0.0))
        {
            fail(ErrorCode::ValidationError, "adjust_penalty: c must be positive");
        }
        PenaltyAdjustment out;
        double c = c_prev;
        for (int tries = 0; tries <= cfg.max_penalty_increases; ++tries)
        {
            out.c = c;
            out.increases = tries;
            out.direction = direction_subproblem(ev, u, lo, hi, c, cfg.H);
            out.test = descent_and_test(ev, out.direction.d, out.direction.beta, c);
            // the slack only absorbs roundoff in sigma at (nearly) feasible points;
            // M / c shrinking towards it must not count as success
            const double m = constraint_violation(ev);
            if (out.test.t_c <= 0.0 || (out.test.t_c <= kPenaltyTestSlack && m <= kPenaltyTestSlack))
            {
                return out;
            }
            c *= cfg.kappa;
        }
        std::ostringstream os;
        os << "adjust_penalty: t_c = " << out.test.t_c << " still positive at c = " << out.c << " after "
           << cfg.max_penalty_increases << " increases";
        fail(ErrorCode::CFailure, os.str());
    }

    LineSearchResult line_search(const Nlp &nlp, const Vector &u, const Vector &d, double penalty_u, double sigma,
                                 double c, const PenaltyConfig &cfg)
    {
        const Vector lo = nlp.lower();
        const Vector hi = nlp.upper();
        LineSearchResult out;
        double alpha = 1.0;
        for (int trial = 1; trial <= cfg.max_line_search; ++trial)
        {
            out.trials = trial;
            out.alpha = alpha;
            out.u = clamp(u + alpha * d, lo, hi);
            out.evaluation = nlp.evaluate(out.u, false);
            out.penalty = penalty_value(out.evaluation, c);
            if (out.penalty - penalty_u <= cfg.gamma * alpha * sigma)
            {
                return out;
            }
            alpha *= cfg.eta;
        }
        std::ostringstream os;
        os << "line_search: no sufficient decrease after " << cfg.max_line_search << " trials (sigma = " << sigma
           << ", last change " << out.penalty - penalty_u << ")";
        fail(ErrorCode::LineSearchFailure, os.str());
    }

    OptimizeResult optimize(const Nlp &nlp, const Vector &u0, PenaltyConfig cfg)
    {
        cfg.validate(nlp.dimension());
        const Vector lo = nlp.lower();
        const Vector hi = nlp.upper();
        if (u0.size() != nlp.dimension())
        {
            fail(ErrorCode::DimensionMismatch, "optimize: initial control has the wrong length");
        }
        if ((u0.array() < lo.array()).any() || (u0.array() > hi.array()).any())
        {
            fail(ErrorCode::ValidationError, "optimize: initial control lies outside the control box");
        }

        OptimizeResult out;
        Vector u = u0;
        double c = cfg.c0;
        NlpEvaluation ev = nlp.evaluate(u, true);
        for (int k = 0;; ++k)
        {
            const auto adj = adjust_penalty(ev, u, lo, hi, c, cfg);
            c = adj.c;

            IterateRecord rec;
            rec.k = k;
            rec.u = u;
            rec.c = c;
            rec.d = adj.direction.d;
            rec.beta = adj.direction.beta;
            rec.sigma = adj.test.sigma;
            rec.t_c = adj.test.t_c;
            rec.f0 = ev.f0;
            rec.violation = constraint_violation(ev);
            rec.penalty = penalty_value(ev, c);
            rec.kkt_residual = adj.direction.kkt_residual;

            if (std::abs(rec.sigma) <= cfg.epsilon)
            {
                rec.penalty_next = rec.penalty;
                out.history.push_back(std::move(rec));
                out.converged = true;
                break;
            }
            if (k >= cfg.max_iters)
            {
                rec.penalty_next = rec.penalty;
                out.history.push_back(std::move(rec));
                break;
            }
            const auto ls = line_search(nlp, u, rec.d, rec.penalty, rec.sigma, c, cfg);
            rec.alpha = ls.alpha;
            rec.penalty_next = ls.penalty;
            out.history.push_back(std::move(rec));
            u = ls.u;
            ev = nlp.evaluate(u, true);
        }
        out.u = u;
        return out;
    }

} // namespace slidoc
