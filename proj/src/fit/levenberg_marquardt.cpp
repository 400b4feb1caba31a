#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "qfcsim/error.hpp"
#include "qfcsim/fit.hpp"

namespace qfcsim::fit {
namespace {

double sum_squares(const std::vector<double>& r)
{
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& columns, std::size_t rows)
{
    Eigen::MatrixXd j(rows, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c)
        for (std::size_t i = 0; i < rows; ++i) j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = columns[c][i];
    return j;
}

void clamp_to(std::vector<double>& x, const LmProblem& p)
{
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], p.lower[k], p.upper[k]);
}

}  // namespace

// Returns one column per parameter.
std::vector<std::vector<double>> numeric_jacobian(const LmProblem& problem, const std::vector<double>& x)
{
    std::vector<std::vector<double>> columns(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double span = problem.upper[k] - problem.lower[k];
        double h = 1e-6 * std::max(std::abs(x[k]), 1e-3 * span);
        if (!(h > 0.0)) h = 1e-8;
        double hi = std::min(x[k] + h, problem.upper[k]);
        double lo = std::max(x[k] - h, problem.lower[k]);
        auto xp = x, xm = x;
        xp[k] = hi;
        xm[k] = lo;
        const auto rp = problem.residuals(xp);
        const auto rm = problem.residuals(xm);
        columns[k].resize(rp.size());
        for (std::size_t i = 0; i < rp.size(); ++i) columns[k][i] = (rp[i] - rm[i]) / (hi - lo);
    }
    return columns;
}

std::vector<double> objective_gradient(const LmProblem& problem, const std::vector<double>& x)
{
    const auto r = problem.residuals(x);
    const auto j = numeric_jacobian(problem, x);
    std::vector<double> g(x.size(), 0.0);
    for (std::size_t k = 0; k < x.size(); ++k)
        for (std::size_t i = 0; i < r.size(); ++i) g[k] += 2.0 * j[k][i] * r[i];
    return g;
}

LmResult levenberg_marquardt(const LmProblem& problem, std::vector<double> x0, int max_iterations, double tolerance)
{
    const std::size_t n = x0.size();
    require(problem.lower.size() == n && problem.upper.size() == n, "bounds do not match the parameter count");
    for (std::size_t k = 0; k < n; ++k)
        require(problem.lower[k] < problem.upper[k], "free parameters need lower < upper");
    clamp_to(x0, problem);

    LmResult result;
    result.x = std::move(x0);
    auto r = problem.residuals(result.x);
    double f = sum_squares(r);
    double lambda = 1e-3;
    const auto m = r.size();

    for (int it = 1; it <= max_iterations; ++it) {
        result.iterations = it;
        const Eigen::MatrixXd j = to_matrix(numeric_jacobian(problem, result.x), m);
        const Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(m));
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd jtr = j.transpose() * rv;
        // The residual is data - model, so the Gauss-Newton step solves J^T J d = -J^T r
        // with J the Jacobian of r; r decreases along d.
        bool accepted = false;
        double f_new = f;
        while (lambda < 1e16) {
            Eigen::MatrixXd a = jtj;
            for (Eigen::Index k = 0; k < a.rows(); ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-300);
            const Eigen::VectorXd step = a.ldlt().solve(-jtr);
            std::vector<double> trial(n);
            for (std::size_t k = 0; k < n; ++k) trial[k] = result.x[k] + step(static_cast<Eigen::Index>(k));
            clamp_to(trial, problem);
            auto r_trial = problem.residuals(trial);
            f_new = sum_squares(r_trial);
            if (std::isfinite(f_new) && f_new <= f) {
                accepted = true;
                result.x = std::move(trial);
                r = std::move(r_trial);
                lambda = std::max(lambda / 10.0, 1e-12);
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No descent direction left at machine precision: a minimum.
            result.converged = true;
            break;
        }
        const double change = f - f_new;
        f = f_new;
        if (change <= tolerance * f || f < std::numeric_limits<double>::min()) {
            result.converged = true;
            break;
        }
    }
    result.objective = f;

    const Eigen::MatrixXd j = to_matrix(numeric_jacobian(problem, result.x), m);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    // Parameters differ by many orders of magnitude (alpha ~ 1, tau ~ 1e-9):
    // invert the unit-diagonal form D J^T J D and undo the scaling.
    const Eigen::VectorXd diag = jtj.diagonal();
    if ((diag.array() > 0.0).all()) {
        const Eigen::VectorXd d = diag.cwiseSqrt().cwiseInverse();
        const Eigen::MatrixXd scaled = d.asDiagonal() * jtj * d.asDiagonal();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
        if (lu.isInvertible()) cov = d.asDiagonal() * lu.inverse() * d.asDiagonal();
    }
    result.covariance.assign(n, std::vector<double>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            result.covariance[a][b] = cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    return result;
}

}  // namespace qfcsim::fit
