#include <cmath>

#include "qfcsim/fit.hpp"

namespace qfcsim::fit {

Visibility report_visibility(const Measured& g2_par_0, const Measured& g2_perp_0)
{
    Visibility v;
    v.value = models::visibility(g2_perp_0.value, g2_par_0.value);
    // V = 1 - par / perp
    const double d_par = -1.0 / g2_perp_0.value;
    const double d_perp = g2_par_0.value / (g2_perp_0.value * g2_perp_0.value);
    v.sigma = std::hypot(d_par * g2_par_0.sigma, d_perp * g2_perp_0.sigma);
    return v;
}

Visibility report_visibility(const FitResult& fit_par, const FitResult& fit_perp)
{
    return report_visibility(Measured{fit_par.g2_zero, fit_par.g2_zero_sigma},
                             Measured{fit_perp.g2_zero, fit_perp.g2_zero_sigma});
}

}  // namespace qfcsim::fit
