#include "copsched/ratio.hpp"

#include <cmath>
#include <stdexcept>

namespace copsched {

namespace {

void check_phi_args(double x, double y) {
    if (std::isnan(x) || std::isnan(y) || x <= 0.0 || y < 0.0)
        throw std::domain_error("eval_phi: need x > 0 and y >= 0");
}

} // namespace

PhiParts eval_phi_parts(const Copula& c, double x, double y) {
    check_phi_args(x, y);
    const Marginal& m = c.marginal;
    PhiParts p;
    if (std::isinf(x) && std::isinf(y)) {
        p.value = 1.0;
        p.h = 1.0;
        p.coef1_unit = true;
        p.coef2_recip = true;
        return p;
    }
    if (std::isinf(y)) {
        // y - y F(y) -> 0 and min{1+1/x, 1+y} -> 1+1/x, leaving 1 + F(x)/x.
        const double fx = eval_F(m, x);
        p.value = 1.0 + fx / x;
        p.h = fx;
        p.coef1_unit = true;
        p.coef2_recip = true;
        return p;
    }
    if (std::isinf(x)) {
        const double fy = eval_F(m, y);
        p.value = y + (1.0 - y) * fy;
        p.h = fy;
        p.coef1_unit = true;
        p.coef2_recip = true;
        return p;
    }
    const double fx = eval_F(m, x);
    const double fy = eval_F(m, y);
    const double rx = 1.0 / x;
    p.h = eval_H(c, x, y);
    p.coef1_unit = (1.0 - rx + y >= 1.0);
    p.coef2_recip = (1.0 + rx <= 1.0 + y);
    const double coef1 = p.coef1_unit ? 1.0 : 1.0 - rx + y;
    const double coef2 = p.coef2_recip ? 1.0 + rx : 1.0 + y;
    p.value = 1.0 + y - coef1 * fx - y * fy + coef2 * p.h;
    return p;
}

double eval_phi(const Copula& c, double x, double y) {
    return eval_phi_parts(c, x, y).value;
}

double eval_rho(const Copula& c, double r_j, double r_k) {
    if (std::isnan(r_j) || std::isnan(r_k) || r_j <= 0.0 || r_k <= 0.0 ||
        std::isinf(r_j) || std::isinf(r_k))
        throw std::domain_error("eval_rho: need finite r_j, r_k > 0");
    const Marginal& m = c.marginal;
    const double fj = eval_F(m, r_j);
    const double fk = eval_F(m, r_k);
    const double h = eval_H(c, r_j, r_k);
    const double cross = std::max(1.0 / r_j - r_k, 0.0);
    return (1.0 - fj) + r_k * (1.0 - fk) + cross * (fj - h) +
           (1.0 + 1.0 / r_j) * h;
}

double eval_theta(double alpha1, double alpha2) {
    if (std::isnan(alpha1) || std::isnan(alpha2) || alpha1 < 0.0 ||
        alpha2 < 0.0)
        throw std::domain_error("eval_theta: need alpha1, alpha2 >= 0");
    static const Marginal kTrans = make_transcendental();
    const double b1 = eval_F(kTrans, alpha1);
    // alpha2 == 0 sends 1/alpha2 to +inf, where F is 1.
    const double b2 = eval_F(kTrans, 1.0 / alpha2);
    return (1.0 + alpha2) * b1 * b2 + b1 * (1.0 - b2) +
           (1.0 + alpha1) * (1.0 - b1) * (1.0 - b2) +
           std::max(alpha1, alpha2) * b2 * (1.0 - b1);
}

} // namespace copsched
