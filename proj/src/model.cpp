#include "appgame/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace appgame {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& requirement, double got) {
    std::ostringstream msg;
    msg << field << " must " << requirement << ", got " << got;
    throw std::invalid_argument(msg.str());
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0)) {
        std::ostringstream msg;
        msg << what << " must be positive, got " << v;
        throw std::domain_error(msg.str());
    }
}

} // namespace

void ModelParams::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) fail("delta", "lie in (0,1)", delta);
    if (!(theta > 1.0)) fail("theta", "exceed 1", theta);
    if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma", "lie in (0,1)", gamma);
    if (!(horizon_T > 0.0)) fail("horizon_T", "be positive", horizon_T);
    if (!(eta > 0.0)) fail("eta", "be positive", eta);
    if (allow_nonconcave_tech) {
        if (!(tech_A >= 0.0)) fail("tech_A", "be nonnegative", tech_A);
        if (!(tech_alpha > 0.0 && tech_alpha <= 1.0)) fail("tech_alpha", "lie in (0,1]", tech_alpha);
    } else {
        if (!(tech_A > 0.0)) fail("tech_A", "be positive", tech_A);
        if (!(tech_alpha > 0.0 && tech_alpha < 1.0))
            fail("tech_alpha", "lie in (0,1) unless allow_nonconcave_tech is set", tech_alpha);
    }
    if (!(tech_mu >= 0.0)) fail("tech_mu", "be nonnegative", tech_mu);
    if (!(pi_weight > 0.0 && pi_weight < 1.0)) fail("pi_weight", "lie in (0,1)", pi_weight);
}

double felicity(double c, const ModelParams& p) {
    require_positive(c, "felicity: consumption");
    if (p.eta == 1.0) return std::log(c);
    // expm1 keeps the power form accurate for eta near 1
    return std::expm1((1.0 - p.eta) * std::log(c)) / (1.0 - p.eta);
}

double marginal_utility(double c, const ModelParams& p) {
    require_positive(c, "marginal_utility: consumption");
    return std::pow(c, -p.eta);
}

double inverse_marginal_utility(double lam, const ModelParams& p) {
    require_positive(lam, "inverse_marginal_utility: shadow price");
    return std::pow(lam, -1.0 / p.eta);
}

double elasticity_of_substitution(double c, const ModelParams& p) {
    require_positive(c, "elasticity_of_substitution: consumption");
    // -u'/(c u'') reduces to the constant 1/eta under CRRA
    return 1.0 / p.eta;
}

double production(double x, const ModelParams& p) {
    if (x < 0.0) throw std::domain_error("production: wealth stock must be nonnegative");
    if (x == 0.0) return 0.0;
    return p.tech_A * std::pow(x, p.tech_alpha) - p.tech_mu * x;
}

double marginal_product(double x, const ModelParams& p) {
    if (p.tech_alpha == 1.0) {
        if (x < 0.0) throw std::domain_error("marginal_product: wealth stock must be nonnegative");
        return p.tech_A - p.tech_mu;
    }
    // singular at the origin for alpha < 1: reject rather than return infinity
    require_positive(x, "marginal_product: wealth stock");
    return p.tech_A * p.tech_alpha * std::pow(x, p.tech_alpha - 1.0) - p.tech_mu;
}

std::optional<double> golden_rule_stock(const ModelParams& p) {
    if (p.tech_mu <= 0.0 || p.tech_alpha >= 1.0) return std::nullopt;
    return std::pow(p.tech_A * p.tech_alpha / p.tech_mu, 1.0 / (1.0 - p.tech_alpha));
}

double retention_rate(double a, double theta) {
    if (a < 0.0) throw std::domain_error("retention_rate: outlay must be nonnegative");
    return 1.0 / (1.0 + theta * a);
}

double retention_rate_derivative(double a, double theta) {
    if (a < 0.0) throw std::domain_error("retention_rate_derivative: outlay must be nonnegative");
    const double d = 1.0 + theta * a;
    return -theta / (d * d);
}

double loss_fraction(double a, double theta) {
    if (a < 0.0) throw std::domain_error("loss_fraction: outlay must be nonnegative");
    return theta * a / (1.0 + theta * a);
}

} // namespace appgame
