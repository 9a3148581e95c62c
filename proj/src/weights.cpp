#include "qcurv/weights.hpp"

#include "qcurv/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qcurv {

double SingularWeightConfig::gradient_weight(double rho) const
{
    const double a = a_profile(rho);
    return a == 0.0 ? 0.0 : a * std::pow(std::max(rho, rho_min), -gamma);
}

double SingularWeightConfig::potential_weight(double rho) const
{
    const double b = b_profile(rho);
    return b == 0.0 ? 0.0 : b * std::pow(std::max(rho, rho_min), -alpha);
}

void SingularWeightConfig::validate() const
{
    if (!(gamma >= 0.0 && gamma <= 2.0))
        throw ConfigError("gamma must lie in [0, 2]");
    if (!(alpha >= 0.0 && alpha <= 4.0))
        throw ConfigError("alpha must lie in [0, 4]");
    if (!(rho_min > 0.0))
        throw ConfigError("rho_min must be positive");
    if (!a_profile || !b_profile)
        throw ConfigError("weight profiles must be set");
}

SingularWeightConfig SingularWeightConfig::flat()
{
    return {};
}

SingularWeightConfig SingularWeightConfig::constant(double gamma, double alpha, double a, double b,
                                                    double rho_min)
{
    SingularWeightConfig w;
    w.gamma = gamma;
    w.alpha = alpha;
    w.a_profile = [a](double) { return a; };
    w.b_profile = [b](double) { return b; };
    w.rho_min = rho_min;
    return w;
}

} // namespace qcurv
