#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "qfcsim/error.hpp"
#include "qfcsim/fit.hpp"

namespace qfcsim::fit {
namespace {

const ParamBounds& default_bounds()
{
    static const ParamBounds b{
        {"alpha", {0.0, 1.0}},
        {"tau_r", {1e-12, 1e-6}},
        {"tau_c", {1e-13, 1e-8}},
    };
    return b;
}

models::EmitterCorrelationParams emitter_params(const ParamValues& p)
{
    models::EmitterCorrelationParams e;
    e.alpha = p.at("alpha");
    e.tau_r = p.at("tau_r");
    if (auto it = p.find("tau_c"); it != p.end()) e.tau_c = it->second;
    return e;
}

// Dip depth and 1/e width of the zero-delay dip.
ParamValues heuristic_init(const CorrelationHistogram& h, ModelId id)
{
    ParamValues init{{"alpha", 0.8}, {"tau_r", 1.5e-9}, {"tau_c", 100e-12}, {"v", 1.0}};
    const auto zero = h.zero_bin();
    if (!zero || id != ModelId::g2_cw) return init;
    const double y0 = h.normalized(*zero);
    const double depth = std::clamp(1.0 - y0, 0.05, 0.99);
    init["alpha"] = depth;
    const double threshold = 1.0 - depth / std::exp(1.0);
    for (std::size_t i = *zero; i < h.size(); ++i) {
        if (h.normalized(i) >= threshold) {
            init["tau_r"] = std::max(h.delay(i), h.bin_width);
            break;
        }
    }
    return init;
}

}  // namespace

std::string to_string(ModelId id)
{
    switch (id) {
    case ModelId::g2_cw: return "g2_cw";
    case ModelId::g2_hom_parallel: return "g2_hom_parallel";
    case ModelId::g2_hom_orthogonal: return "g2_hom_orthogonal";
    }
    return "unknown";
}

ModelId model_id_from_string(const std::string& text)
{
    for (ModelId id : {ModelId::g2_cw, ModelId::g2_hom_parallel, ModelId::g2_hom_orthogonal})
        if (to_string(id) == text) return id;
    throw InvalidArgument("unknown model \"" + text + "\" (expected g2_cw, g2_hom_parallel or g2_hom_orthogonal)");
}

std::vector<std::string> model_parameters(ModelId id)
{
    switch (id) {
    case ModelId::g2_cw: return {"alpha", "tau_r"};
    case ModelId::g2_hom_parallel: return {"alpha", "tau_r", "tau_c", "v"};
    case ModelId::g2_hom_orthogonal: return {"alpha", "tau_r"};
    }
    return {};
}

models::DelayFunction make_model(ModelId id, const ParamValues& params, const models::HomInterferometer& h)
{
    const auto e = emitter_params(params);
    if (id == ModelId::g2_cw) return [e](double tau) { return models::g2_cw(tau, e); };
    auto hom = h;
    hom.config = id == ModelId::g2_hom_parallel ? models::Polarization::parallel : models::Polarization::orthogonal;
    if (auto it = params.find("v"); it != params.end()) hom.v = it->second;
    return [e, hom](double tau) { return models::g2_hom(tau, e, hom); };
}

FitResult fit_g2(const CorrelationHistogram& h, const models::InstrumentResponse& irf, ModelId model,
                 const ParamValues& init, const ParamBounds& bounds, const FitOptions& options)
{
    require(h.size() > 0, "cannot fit an empty histogram");
    require(h.normalization.has_value() || h.sigma.has_value(),
            "fit_g2 needs a normalized histogram (normalize_cw first)");
    if (model != ModelId::g2_cw) options.interferometer.validate();

    // Bins inside the fit window form one contiguous block.
    std::size_t first = h.size(), last = 0;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (std::abs(h.delay(i)) <= options.window) first = std::min(first, i), last = i;
    require(first <= last && first < h.size(), "no histogram bins inside the fit window");
    const std::size_t count = last - first + 1;

    std::vector<double> data(count), sigma(count);
    std::string weighting = "poisson";
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t b = first + i;
        data[i] = h.normalized(b);
        if (h.normalization) {
            sigma[i] = std::sqrt(std::max(h.counts[b], 1.0)) / *h.normalization;
        } else {
            sigma[i] = (*h.sigma)[b];
            weighting = "sigma_column";
        }
        require(sigma[i] > 0.0, "non-positive data uncertainty in bin " + std::to_string(b));
    }

    // Parameter table: value, bounds and whether it is free.
    ParamValues values = heuristic_init(h, model);
    for (const auto& [k, v] : init) values[k] = v;
    const auto names = model_parameters(model);
    std::vector<std::string> free;
    std::vector<double> x0, lo, hi;
    for (const auto& name : names) {
        std::pair<double, double> b;
        if (auto it = bounds.find(name); it != bounds.end()) b = it->second;
        else if (auto d = default_bounds().find(name); d != default_bounds().end()) b = d->second;
        else b = {values[name], values[name]};  // v without bounds: fixed
        require(b.first <= b.second, "bounds for " + name + " are inverted");
        if (init.count(name))
            require(values[name] >= b.first && values[name] <= b.second, "initial " + name + " lies outside its bounds");
        values[name] = std::clamp(values[name], b.first, b.second);
        if (b.first < b.second) {
            free.push_back(name);
            x0.push_back(values[name]);
            lo.push_back(b.first);
            hi.push_back(b.second);
        }
    }

    auto irf_binned = irf;
    irf_binned.bin_width = h.bin_width;
    const auto first_index = h.first_index + static_cast<std::int64_t>(first);
    models::ConvolvedModel convolved(make_model(model, values, options.interferometer), irf_binned);
    auto with = [&](const std::vector<double>& x) {
        ParamValues p = values;
        for (std::size_t k = 0; k < free.size(); ++k) p[free[k]] = x[k];
        return p;
    };

    LmProblem problem;
    problem.lower = lo;
    problem.upper = hi;
    problem.residuals = [&](const std::vector<double>& x) {
        auto local = convolved;
        local.set_model(make_model(model, with(x), options.interferometer));
        auto m = local.on_bins(first_index, count);
        for (std::size_t i = 0; i < count; ++i) m[i] = (data[i] - m[i]) / sigma[i];
        return m;
    };

    FitResult result;
    result.model_id = model;
    result.points = count;
    result.weighting = weighting;
    std::vector<std::vector<double>> cov;
    if (free.empty()) {
        const auto r = problem.residuals({});
        for (double v : r) result.residual_norm += v * v;
        result.converged = true;
    } else {
        const auto lm = levenberg_marquardt(problem, x0, options.max_iterations, options.tolerance);
        result.residual_norm = lm.objective;
        result.iterations = lm.iterations;
        result.converged = lm.converged;
        x0 = lm.x;
        cov = lm.covariance;
    }
    for (const auto& name : names) result.params[name] = with(x0)[name];
    for (std::size_t k = 0; k < free.size(); ++k) result.sigmas[free[k]] = std::sqrt(std::max(cov[k][k], 0.0));
    const double dof = static_cast<double>(count) - static_cast<double>(free.size());
    result.reduced_chi2 = dof > 0 ? result.residual_norm / dof : 0.0;

    // Zero-delay value of the fitted curve, with its propagated uncertainty.
    auto g0 = [&](const std::vector<double>& x) {
        auto local = convolved;
        local.set_model(make_model(model, with(x), options.interferometer));
        return local(0.0);
    };
    result.g2_zero = g0(x0);
    double var = 0.0;
    std::vector<double> grad(free.size());
    for (std::size_t k = 0; k < free.size(); ++k) {
        const double step = 1e-6 * std::max(std::abs(x0[k]), 1e-3 * (hi[k] - lo[k]));
        auto xp = x0, xm = x0;
        xp[k] = std::min(x0[k] + step, hi[k]);
        xm[k] = std::max(x0[k] - step, lo[k]);
        grad[k] = (g0(xp) - g0(xm)) / (xp[k] - xm[k]);
    }
    for (std::size_t a = 0; a < free.size(); ++a)
        for (std::size_t b = 0; b < free.size(); ++b) var += grad[a] * cov[a][b] * grad[b];
    result.g2_zero_sigma = std::sqrt(std::max(var, 0.0));
    return result;
}

double predict_g2_zero(const models::EmitterCorrelationParams& p, const models::HomInterferometer& h,
                       const models::InstrumentResponse& irf)
{
    p.validate();
    h.validate();
    const models::ConvolvedModel convolved([p, h](double tau) { return models::g2_hom(tau, p, h); }, irf);
    return convolved(0.0);
}

std::string to_text(const FitResult& r)
{
    std::ostringstream out;
    out.precision(10);
    out << "model_id=" << to_string(r.model_id) << '\n';
    for (const auto& [k, v] : r.params) out << k << '=' << v << '\n';
    for (const auto& [k, v] : r.sigmas) out << "sigma_" << k << '=' << v << '\n';
    out << "g2_zero=" << r.g2_zero << '\n';
    out << "sigma_g2_zero=" << r.g2_zero_sigma << '\n';
    out << "residual_norm=" << r.residual_norm << '\n';
    out << "reduced_chi2=" << r.reduced_chi2 << '\n';
    out << "points=" << r.points << '\n';
    out << "iterations=" << r.iterations << '\n';
    out << "converged=" << (r.converged ? "true" : "false") << '\n';
    out << "weighting=" << r.weighting << '\n';
    return out.str();
}

FitResult fit_result_from_text(std::istream& in)
{
    FitResult r;
    std::string line;
    bool saw_model = false;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("fit result line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        auto number = [&] {
            try {
                return std::stod(value);
            } catch (const std::exception&) {
                throw DataError("fit result line " + std::to_string(lineno) + ": bad number \"" + value + "\"");
            }
        };
        if (key == "model_id") r.model_id = model_id_from_string(value), saw_model = true;
        else if (key == "g2_zero") r.g2_zero = number();
        else if (key == "sigma_g2_zero") r.g2_zero_sigma = number();
        else if (key == "residual_norm") r.residual_norm = number();
        else if (key == "reduced_chi2") r.reduced_chi2 = number();
        else if (key == "points") r.points = static_cast<std::size_t>(number());
        else if (key == "iterations") r.iterations = static_cast<int>(number());
        else if (key == "converged") r.converged = value == "true";
        else if (key == "weighting") r.weighting = value;
        else if (key.rfind("sigma_", 0) == 0) r.sigmas[key.substr(6)] = number();
        else r.params[key] = number();
    }
    if (!saw_model) throw DataError("fit result has no model_id");
    return r;
}

}  // namespace qfcsim::fit
