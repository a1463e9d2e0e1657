#include "resonette/potential.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/differentiation/autodiff.hpp>

#include "resonette/errors.hpp"

namespace resonette {

namespace {

using boost::math::differentiation::make_fvar;

template <int Order, class F>
void fill_jet(const F& f, double x, int order, double* out) {
    auto v = f(make_fvar<double, Order>(x));
    for (int k = 0; k <= order; ++k) out[k] = static_cast<double>(v.derivative(k));
}

// Dispatches to the smallest compiled autodiff order that covers the request.
template <class F>
std::function<void(double, int, double*)> make_jet(F f) {
    return [f](double x, int order, double* out) {
        if (order <= 2)
            fill_jet<2>(f, x, order, out);
        else if (order <= 4)
            fill_jet<4>(f, x, order, out);
        else
            fill_jet<8>(f, x, order, out);
    };
}

std::map<std::string, double> merge(const std::string& name, std::map<std::string, double> defaults,
                                    const std::map<std::string, double>& given) {
    for (const auto& [k, v] : given) {
        auto it = defaults.find(k);
        if (it == defaults.end()) throw ValidationError("potential " + name + ": unknown parameter '" + k + "'");
        it->second = v;
    }
    return defaults;
}

double positive(const std::map<std::string, double>& p, const std::string& key, const std::string& name) {
    double v = p.at(key);
    if (!(v > 0.0)) throw ValidationError("potential " + name + ": parameter '" + key + "' must be positive");
    return v;
}

}  // namespace

double PotentialSpec::eval(double x) const {
    double out[1];
    jet_fn(x, 0, out);
    return out[0];
}

double PotentialSpec::deriv(int k, double x) const {
    if (k < 0 || k > max_order) throw UnsupportedOrderError("derivative order " + std::to_string(k) + " exceeds " + std::to_string(max_order));
    std::vector<double> out(k + 1);
    jet_fn(x, k, out.data());
    return out[k];
}

std::vector<double> PotentialSpec::jet(double x, int order) const {
    if (order < 0 || order > max_order) throw UnsupportedOrderError("jet order " + std::to_string(order) + " exceeds " + std::to_string(max_order));
    std::vector<double> out(order + 1);
    jet_fn(x, order, out.data());
    return out;
}

cplx PotentialSpec::eval_analytic(cplx z) const {
    if (!analytic) throw DomainError("potential " + name + " has no exact holomorphic continuation");
    return analytic(z);
}

double PotentialSpec::sup_abs() const {
    const int n = 4001;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = -negligible_radius + 2.0 * negligible_radius * i / (n - 1);
        best = std::max(best, std::abs(eval(x)));
    }
    return best;
}

double PotentialSpec::sup_gradient() const {
    const int n = 4001;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = -negligible_radius + 2.0 * negligible_radius * i / (n - 1);
        best = std::max(best, std::abs(deriv(1, x)));
    }
    return best;
}

double PotentialSpec::param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw ValidationError("potential " + name + " has no parameter '" + key + "'");
    return it->second;
}

std::vector<std::string> builtin_potentials() { return {"gaussian_barrier", "bump", "well_in_island", "sech2", "free"}; }

PotentialSpec make_custom_potential(std::string name, double nu, int max_order, double negligible_radius,
                                    std::function<void(double, int, double*)> jet_fn, std::function<cplx(cplx)> analytic) {
    PotentialSpec v;
    v.name = std::move(name);
    v.nu = nu;
    v.max_order = max_order;
    v.negligible_radius = negligible_radius;
    v.jet_fn = std::move(jet_fn);
    v.analytic = std::move(analytic);
    return v;
}

PotentialSpec make_potential(const std::string& name, const std::map<std::string, double>& given) {
    PotentialSpec v;
    v.name = name;
    if (name == "gaussian_barrier") {
        v.params = merge(name, {{"height", 0.8}, {"width", 1.0}, {"nu", 2.0}}, given);
        const double a = v.params["height"], w = positive(v.params, "width", name);
        auto f = [a, w](const auto& x) {
            using std::exp;
            return a * exp(-(x / w) * (x / w));
        };
        v.jet_fn = make_jet(f);
        v.analytic = [f](cplx z) { return f(z); };
        v.negligible_radius = w * std::sqrt(40.0 * std::log(10.0));
    } else if (name == "bump") {
        v.params = merge(name, {{"height", 1.0}, {"width", 2.0}, {"nu", 2.0}}, given);
        const double a = v.params["height"], w = positive(v.params, "width", name);
        auto f = [a, w](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            using std::exp;
            const double t = static_cast<double>(x) / w;
            if (std::abs(t) >= 1.0 || 1.0 - t * t < 1.0 / 700.0) return T(0.0);
            T u = x / w;
            return a * std::exp(1.0) * exp(-1.0 / (1.0 - u * u));
        };
        v.jet_fn = make_jet(f);
        v.negligible_radius = w;
    } else if (name == "well_in_island") {
        v.params = merge(name, {{"lambda0", 1.0}, {"a", 1.0}, {"width", 1.0}, {"nu", 2.0}}, given);
        const double l0 = positive(v.params, "lambda0", name), a = positive(v.params, "a", name),
                     w = positive(v.params, "width", name);
        if (2.0 * a * w * w <= 1.0) throw ValidationError("well_in_island: need 2 a width^2 > 1 for a well at the origin");
        auto f = [l0, a, w](const auto& x) {
            using std::exp;
            return l0 * (1.0 + a * x * x) * exp(-x * x / (2.0 * w * w));
        };
        v.jet_fn = make_jet(f);
        v.analytic = [f](cplx z) { return f(z); };
        v.negligible_radius = w * std::sqrt(2.0 * (40.0 * std::log(10.0) + std::log(1.0 + a * 100.0 * w * w)));
    } else if (name == "sech2") {
        v.params = merge(name, {{"height", 0.5}, {"width", 1.0}, {"nu", 2.0}}, given);
        const double a = v.params["height"], w = positive(v.params, "width", name);
        auto f = [a, w](const auto& x) {
            using std::cosh;
            auto c = cosh(x / w);
            return a / (c * c);
        };
        v.jet_fn = make_jet(f);
        v.analytic = [f](cplx z) { return f(z); };
        v.negligible_radius = w * 0.5 * 40.0 * std::log(10.0);
    } else if (name == "free") {
        v.params = merge(name, {{"nu", 1.0}}, given);
        v.jet_fn = [](double, int order, double* out) { std::fill(out, out + order + 1, 0.0); };
        v.analytic = [](cplx) { return cplx(0.0); };
        v.negligible_radius = 1.0;
    } else {
        throw ValidationError("unknown potential '" + name + "'");
    }
    v.nu = positive(v.params, "nu", name);
    return v;
}

}  // namespace resonette
