#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qfcsim/histogram.hpp"
#include "qfcsim/models.hpp"

namespace qfcsim::fit {

enum class ModelId { g2_cw, g2_hom_parallel, g2_hom_orthogonal };

std::string to_string(ModelId id);
ModelId model_id_from_string(const std::string& text);

using ParamValues = std::map<std::string, double>;
using ParamBounds = std::map<std::string, std::pair<double, double>>;

/// Parameter names a model depends on, in fit order.
std::vector<std::string> model_parameters(ModelId id);

struct FitResult {
    ModelId model_id = ModelId::g2_cw;
    ParamValues params;
    ParamValues sigmas;      // free parameters only
    double residual_norm = 0.0;  // weighted sum of squared residuals
    double reduced_chi2 = 0.0;
    std::size_t points = 0;
    int iterations = 0;
    bool converged = false;
    double g2_zero = 0.0;    // fitted, convolved and binned model at zero delay
    double g2_zero_sigma = 0.0;
    std::string weighting = "poisson";
};

struct FitOptions {
    double window = 50e-9;         // bins with |delay| <= window enter the fit
    int max_iterations = 200;
    double tolerance = 1e-10;      // relative objective change
    models::HomInterferometer interferometer;  // geometry for the HOM models (config is set from the model id)
};

/// Model for a parameter set, as a function of delay.
models::DelayFunction make_model(ModelId id, const ParamValues& params, const models::HomInterferometer& h);

// Generic damped least squares ----------------------------------------------

/// Weighted residual vector r(x) = (data - model(x)) / sigma.
using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

struct LmProblem {
    ResidualFn residuals;
    std::vector<double> lower, upper;
};

struct LmResult {
    std::vector<double> x;
    double objective = 0.0;  // sum of squared residuals
    int iterations = 0;
    bool converged = false;
    std::vector<std::vector<double>> covariance;  // (J^T J)^-1 at the solution
};

/// Central-difference Jacobian with steps kept inside the bounds.
std::vector<std::vector<double>> numeric_jacobian(const LmProblem& problem, const std::vector<double>& x);

/// Gradient of sum r^2 assembled from the Jacobian: 2 J^T r.
std::vector<double> objective_gradient(const LmProblem& problem, const std::vector<double>& x);

/// Levenberg-Marquardt with Marquardt diagonal scaling; every trial point is
/// clamped to the box. Stops when the relative objective change of an
/// accepted step drops below `tolerance` or after `max_iterations`.
LmResult levenberg_marquardt(const LmProblem& problem, std::vector<double> x0, int max_iterations = 200,
                             double tolerance = 1e-10);

// g2 fitting -------------------------------------------------------------------

/// Weighted least-squares fit of the convolved, binned model to a normalized
/// histogram. Parameters with lower == upper bound (or without bounds, for v)
/// are held fixed. Missing initial values come from the dip depth and width.
FitResult fit_g2(const CorrelationHistogram& h, const models::InstrumentResponse& irf, ModelId model,
                 const ParamValues& init = {}, const ParamBounds& bounds = {}, const FitOptions& options = {});

/// Convolved, binned g2_hom at zero delay.
double predict_g2_zero(const models::EmitterCorrelationParams& p, const models::HomInterferometer& h,
                       const models::InstrumentResponse& irf);

struct Measured {
    double value = 0.0;
    double sigma = 0.0;
};

struct Visibility {
    double value = 0.0;
    double sigma = 0.0;
};

/// Visibility with first-order error propagation of both g2(0) values.
Visibility report_visibility(const Measured& g2_par_0, const Measured& g2_perp_0);
Visibility report_visibility(const FitResult& fit_par, const FitResult& fit_perp);

/// Flat key=value text: model_id, params, sigma_<param>, residual_norm, ...
std::string to_text(const FitResult& r);
FitResult fit_result_from_text(std::istream& in);

}  // namespace qfcsim::fit
