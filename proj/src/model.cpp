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

#include "slidoc/model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace slidoc
{

    std::string FunctionalId::label() const
    {
        switch (kind)
        {
        case FunctionalKind::Cost: return "phi";
        case FunctionalKind::Equality: return "g1:" + std::to_string(index);
        case FunctionalKind::Inequality: return "g2:" + std::to_string(index);
        }
        return "phi";
    }

    FunctionalId FunctionalId::parse(std::string_view text)
    {
        if (text == "phi")
        {
            return {};
        }
        auto parse_index = [&](std::string_view rest, FunctionalKind kind) {
            int idx = -1;
            auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), idx);
            if (ec != std::errc() || ptr != rest.data() + rest.size() || idx < 0)
            {
                fail(ErrorCode::UsageError, "bad functional index in '" + std::string(text) + "'");
            }
            return FunctionalId{kind, idx};
        };
        if (text.starts_with("g1:"))
        {
            return parse_index(text.substr(3), FunctionalKind::Equality);
        }
        if (text.starts_with("g2:"))
        {
            return parse_index(text.substr(3), FunctionalKind::Inequality);
        }
        fail(ErrorCode::UsageError, "unknown functional '" + std::string(text) + "' (expected phi, g1:i or g2:j)");
    }

    std::string_view to_string(Mode mode)
    {
        switch (mode)
        {
        case Mode::Below: return "below";
        case Mode::Above: return "above";
        case Mode::Sliding: return "sliding";
        }
        return "?";
    }

    std::string_view to_string(TransitionKind kind)
    {
        switch (kind)
        {
        case TransitionKind::Cross12: return "Cross12";
        case TransitionKind::Cross21: return "Cross21";
        case TransitionKind::EnterSliding: return "EnterSliding";
        case TransitionKind::ExitToF1: return "ExitToF1";
        case TransitionKind::ExitToF2: return "ExitToF2";
        }
        return "?";
    }

    void HybridOCP::validate() const
    {
        std::ostringstream os;
        if (n < 1 || m < 1)
        {
            os << "dimensions n=" << n << ", m=" << m << " must be positive";
        }
        else if (!(tf > t0))
        {
            os << "horizon requires tf > t0 (t0=" << t0 << ", tf=" << tf << ")";
        }
        else if (N < 1)
        {
            os << "N=" << N << " must be >= 1";
        }
        else if (x0.size() != n)
        {
            os << "x0 has size " << x0.size() << ", expected " << n;
        }
        else if (u_lo.size() != m || u_hi.size() != m)
        {
            os << "control bounds must have size " << m;
        }
        else if ((u_lo.array() > u_hi.array()).any())
        {
            os << "u_lo must be <= u_hi componentwise";
        }
        else if (!field1.value || !field1.dx || !field1.du || !field2.value || !field2.dx || !field2.du)
        {
            os << "both region fields need value, dx and du callbacks";
        }
        else if (!surface.value || !surface.gradient || !surface.hessian)
        {
            os << "switching surface needs value, gradient and hessian callbacks";
        }
        else if (!cost.value || !cost.gradient)
        {
            os << "cost needs value and gradient callbacks";
        }
        const auto msg = os.str();
        if (!msg.empty())
        {
            fail(ErrorCode::InvalidProblem, "problem '" + name + "': " + msg);
        }
    }

    std::vector<double> HybridOCP::breakpoints() const
    {
        std::vector<double> t(N + 1);
        for (int k = 0; k <= N; ++k)
        {
            t[k] = t0 + k * (tf - t0) / N;
        }
        t[N] = tf;
        return t;
    }

    const EndpointFunction &HybridOCP::functional(const FunctionalId &id) const
    {
        switch (id.kind)
        {
        case FunctionalKind::Cost:
            return cost;
        case FunctionalKind::Equality:
            if (id.index >= 0 && id.index < static_cast<int>(equality.size()))
            {
                return equality[id.index];
            }
            break;
        case FunctionalKind::Inequality:
            if (id.index >= 0 && id.index < static_cast<int>(inequality.size()))
            {
                return inequality[id.index];
            }
            break;
        }
        fail(ErrorCode::UsageError, "problem '" + name + "' has no functional " + id.label());
    }

    std::vector<FunctionalId> HybridOCP::functionals() const
    {
        std::vector<FunctionalId> ids{FunctionalId{}};
        for (int i = 0; i < static_cast<int>(equality.size()); ++i)
        {
            ids.push_back({FunctionalKind::Equality, i});
        }
        for (int j = 0; j < static_cast<int>(inequality.size()); ++j)
        {
            ids.push_back({FunctionalKind::Inequality, j});
        }
        return ids;
    }

    const VectorField &HybridOCP::field(Mode mode) const
    {
        if (mode == Mode::Above)
        {
            return field2;
        }
        if (mode == Mode::Below)
        {
            return field1;
        }
        fail(ErrorCode::InvalidProblem, "sliding mode has no single region field");
    }

    ControlGrid::ControlGrid(int m, int intervals, double fill)
        : values_(Matrix::Constant(m, intervals, fill))
    {
    }

    ControlGrid ControlGrid::from_flat(const Vector &flat, int m)
    {
        if (m < 1 || flat.size() % m != 0)
        {
            fail(ErrorCode::DimensionMismatch, "flat control vector length is not a multiple of m");
        }
        const auto n_int = flat.size() / m;
        Matrix v(m, n_int);
        for (Eigen::Index k = 0; k < n_int; ++k)
        {
            v.col(k) = flat.segment(k * m, m);
        }
        return ControlGrid(std::move(v));
    }

    Vector ControlGrid::flat() const
    {
        Vector out(values_.size());
        for (Eigen::Index k = 0; k < values_.cols(); ++k)
        {
            out.segment(k * values_.rows(), values_.rows()) = values_.col(k);
        }
        return out;
    }

    ControlGrid ControlGrid::projected(const Vector &lo, const Vector &hi) const
    {
        Matrix v = values_;
        for (Eigen::Index k = 0; k < v.cols(); ++k)
        {
            v.col(k) = v.col(k).cwiseMax(lo).cwiseMin(hi);
        }
        return ControlGrid(std::move(v));
    }

    SurfaceGeometry surface_geometry(const HybridOCP &ocp, const Vector &x, const Vector &u)
    {
        SurfaceGeometry geo;
        geo.normal = ocp.surface.gradient(x);
        geo.f1 = ocp.field1.value(x, u);
        geo.f2 = ocp.field2.value(x, u);
        geo.gf1 = geo.normal.dot(geo.f1);
        geo.gf2 = geo.normal.dot(geo.f2);
        return geo;
    }

    namespace
    {
        double checked_denominator(const HybridOCP &ocp, const SurfaceGeometry &geo)
        {
            const double den = geo.gf1 - geo.gf2;
            const double scale = geo.normal.norm() * (geo.f1.norm() + geo.f2.norm());
            if (!(std::abs(den) > ocp.tolerances.denominator * std::max(scale, 1e-300)))
            {
                std::ostringstream os;
                os << "alpha: |g_x (f1 - f2)| = " << std::abs(den) << " is degenerate (g_x f1 = " << geo.gf1
                   << ", g_x f2 = " << geo.gf2 << ")";
                fail(ErrorCode::DegenerateDenominator, os.str());
            }
            return den;
        }
    } // namespace

    double alpha(const HybridOCP &ocp, const Vector &x, const Vector &u)
    {
        const auto geo = surface_geometry(ocp, x, u);
        return geo.gf1 / checked_denominator(ocp, geo);
    }

    FilippovField filippov_field(const HybridOCP &ocp, const Vector &x, const Vector &u)
    {
        const auto geo = surface_geometry(ocp, x, u);
        const double a = geo.gf1 / checked_denominator(ocp, geo);
        return {(1.0 - a) * geo.f1 + a * geo.f2, a};
    }

    Vector alpha_dx(const HybridOCP &ocp, const Vector &x, const Vector &u)
    {
        const auto geo = surface_geometry(ocp, x, u);
        const double den = checked_denominator(ocp, geo);
        const double num = geo.gf1;
        const Matrix gxx = ocp.surface.hessian(x);
        const Matrix f1x = ocp.field1.dx(x, u);
        const Matrix f2x = ocp.field2.dx(x, u);
        // d(g_x f)/dx = f^T g_xx + g_x f_x, kept as columns
        const Vector num_x = gxx * geo.f1 + f1x.transpose() * geo.normal;
        const Vector den_x = gxx * (geo.f1 - geo.f2) + (f1x - f2x).transpose() * geo.normal;
        return (num_x * den - num * den_x) / (den * den);
    }

    Vector alpha_du(const HybridOCP &ocp, const Vector &x, const Vector &u)
    {
        const auto geo = surface_geometry(ocp, x, u);
        const double den = checked_denominator(ocp, geo);
        const double num = geo.gf1;
        const Matrix f1u = ocp.field1.du(x, u);
        const Matrix f2u = ocp.field2.du(x, u);
        const Vector num_u = f1u.transpose() * geo.normal;
        const Vector den_u = (f1u - f2u).transpose() * geo.normal;
        return (num_u * den - num * den_u) / (den * den);
    }

    Matrix filippov_dx(const HybridOCP &ocp, const Vector &x, const Vector &u)
    {
        const auto geo = surface_geometry(ocp, x, u);
        const double a = geo.gf1 / checked_denominator(ocp, geo);
        return (1.0 - a) * ocp.field1.dx(x, u) + a * ocp.field2.dx(x, u) +
               (geo.f2 - geo.f1) * alpha_dx(ocp, x, u).transpose();
    }

    Matrix filippov_du(const HybridOCP &ocp, const Vector &x, const Vector &u)
    {
        const auto geo = surface_geometry(ocp, x, u);
        const double a = geo.gf1 / checked_denominator(ocp, geo);
        return (1.0 - a) * ocp.field1.du(x, u) + a * ocp.field2.du(x, u) +
               (geo.f2 - geo.f1) * alpha_du(ocp, x, u).transpose();
    }

    namespace
    {
        [[noreturn]] void ambiguous(const char *where, const SurfaceGeometry &geo)
        {
            std::ostringstream os;
            os << where << ": tangential or inconsistent field configuration (g_x f1 = " << geo.gf1
               << ", g_x f2 = " << geo.gf2 << ")";
            fail(ErrorCode::TangentialAmbiguity, os.str());
        }
    } // namespace

    TransitionKind entry_test(const HybridOCP &ocp, const Vector &x, const Vector &u, Mode from)
    {
        const auto geo = surface_geometry(ocp, x, u);
        const double tan = ocp.tolerances.tangential;
        if (std::abs(geo.gf1) <= tan || std::abs(geo.gf2) <= tan)
        {
            ambiguous("entry_test", geo);
        }
        if (from == Mode::Below)
        {
            if (geo.gf1 < 0.0)
            {
                ambiguous("entry_test (f1 points away from the surface)", geo);
            }
            return geo.gf2 > 0.0 ? TransitionKind::Cross12 : TransitionKind::EnterSliding;
        }
        if (from == Mode::Above)
        {
            if (geo.gf2 > 0.0)
            {
                ambiguous("entry_test (f2 points away from the surface)", geo);
            }
            return geo.gf1 < 0.0 ? TransitionKind::Cross21 : TransitionKind::EnterSliding;
        }
        fail(ErrorCode::InvalidProblem, "entry_test called while already sliding");
    }

    std::optional<TransitionKind> exit_test(const HybridOCP &ocp, const Vector &x, const Vector &u, double alpha_tol)
    {
        const auto geo = surface_geometry(ocp, x, u);
        const double tan = ocp.tolerances.tangential;
        if (std::abs(geo.gf1) <= tan && std::abs(geo.gf2) <= tan)
        {
            ambiguous("exit_test", geo);
        }
        // both fields strictly on one side (e.g. after a control jump)
        if (geo.gf1 < -tan && geo.gf2 < -tan)
        {
            return TransitionKind::ExitToF1;
        }
        if (geo.gf1 > tan && geo.gf2 > tan)
        {
            return TransitionKind::ExitToF2;
        }
        const double den = checked_denominator(ocp, geo);
        if (den < 0.0)
        {
            // f1 and f2 both point away from the surface: not a sliding configuration
            ambiguous("exit_test (repelling surface)", geo);
        }
        const double a = geo.gf1 / den;
        if (a > alpha_tol && a < 1.0 - alpha_tol)
        {
            return std::nullopt;
        }
        if (a <= alpha_tol)
        {
            if (geo.gf2 < -tan)
            {
                return TransitionKind::ExitToF1;
            }
            ambiguous("exit_test at alpha = 0", geo);
        }
        if (geo.gf1 > tan)
        {
            return TransitionKind::ExitToF2;
        }
        ambiguous("exit_test at alpha = 1", geo);
    }

    Mode classify_on_surface(const HybridOCP &ocp, const Vector &x, const Vector &u)
    {
        const auto geo = surface_geometry(ocp, x, u);
        const double tan = ocp.tolerances.tangential;
        if (geo.gf1 > tan && geo.gf2 < -tan)
        {
            return Mode::Sliding;
        }
        if (geo.gf1 < -tan && geo.gf2 < -tan)
        {
            return Mode::Below;
        }
        if (geo.gf1 > tan && geo.gf2 > tan)
        {
            return Mode::Above;
        }
        ambiguous("classify_on_surface", geo);
    }

} // namespace slidoc
