#include <cmath>

#include "qfcsim/error.hpp"
#include "qfcsim/models.hpp"

namespace qfcsim::models {

void EmitterCorrelationParams::validate() const
{
    require(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
    require(std::isfinite(tau_r) && tau_r > 0.0, "tau_r must be finite and positive");
    require(std::isfinite(tau_c) && tau_c > 0.0, "tau_c must be finite and positive");
}

void HomInterferometer::validate() const
{
    auto unit = [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; };
    require(unit(r1) && unit(t1) && unit(r2) && unit(t2), "beamsplitter coefficients must lie in [0, 1]");
    require(std::abs(r1 + t1 - 1.0) < 1e-9 && std::abs(r2 + t2 - 1.0) < 1e-9,
            "beamsplitters must be lossless (r + t = 1)");
    require(std::isfinite(delta_tau) && delta_tau >= 0.0, "interferometer delay must be non-negative");
    require(unit(v), "wavepacket overlap v must lie in [0, 1]");
}

double g2_cw(double tau, const EmitterCorrelationParams& p)
{
    p.validate();
    return 1.0 - p.alpha * std::exp(-std::abs(tau) / p.tau_r);
}

double g2_hom(double tau, const EmitterCorrelationParams& p, const HomInterferometer& h)
{
    const double same_arm = 4.0 * (h.t1 * h.t1 + h.r1 * h.r1) * h.r2 * h.t2 * g2_cw(tau, p);
    double cross_arm =
        4.0 * h.r1 * h.t1 *
        (h.t2 * h.t2 * g2_cw(tau - h.delta_tau, p) + h.r2 * h.r2 * g2_cw(tau + h.delta_tau, p));
    if (h.config == Polarization::parallel) cross_arm *= 1.0 - h.v * std::exp(-2.0 * std::abs(tau) / p.tau_c);
    return same_arm + cross_arm;
}

double visibility(double g2_perp_0, double g2_par_0)
{
    require(std::isfinite(g2_perp_0) && g2_perp_0 > 0.0, "visibility is undefined for g2_perp(0) <= 0");
    return (g2_perp_0 - g2_par_0) / g2_perp_0;
}

}  // namespace qfcsim::models
