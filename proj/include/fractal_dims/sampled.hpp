#ifndef FRACTAL_DIMS_SAMPLED_HPP
#define FRACTAL_DIMS_SAMPLED_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace fractal_dims {

// Table (t_i, f(t_i)) on a strictly increasing positive grid.
struct SampledFunction {
    std::vector<double> ts;
    std::vector<double> vals;
    nlohmann::json meta = nlohmann::json::object();

    SampledFunction() = default;
    SampledFunction(std::vector<double> t, std::vector<double> v, nlohmann::json m = nlohmann::json::object())
        : ts(std::move(t)), vals(std::move(v)), meta(std::move(m)) {
        validate();
    }

    void validate() const {
        if (ts.size() != vals.size()) throw DomainError("SampledFunction: size mismatch");
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (!(ts[i] > 0.0)) throw DomainError("SampledFunction: nonpositive abscissa");
            if (i > 0 && !(ts[i] > ts[i - 1])) throw DomainError("SampledFunction: abscissae not increasing");
            if (!std::isfinite(vals[i])) throw DomainError("SampledFunction: non-finite value");
        }
    }

    std::size_t size() const { return ts.size(); }
    double tmin() const { return ts.front(); }
    double tmax() const { return ts.back(); }

    // Linear interpolation in log t.
    double operator()(double t) const {
        if (t < ts.front() * (1 - 1e-12) || t > ts.back() * (1 + 1e-12)) {
            throw RangeError("t = " + std::to_string(t) + " outside [" + std::to_string(ts.front()) + ", " +
                             std::to_string(ts.back()) + "]");
        }
        auto it = std::upper_bound(ts.begin(), ts.end(), t);
        if (it == ts.begin()) return vals.front();
        if (it == ts.end()) return vals.back();
        const std::size_t i = std::size_t(it - ts.begin()) - 1;
        const double w = std::log(t / ts[i]) / std::log(ts[i + 1] / ts[i]);
        return (1 - w) * vals[i] + w * vals[i + 1];
    }
};

// n points per decade, log-uniform, both ends included.
inline std::vector<double> log_grid(double a, double b, double per_decade = 48.0) {
    if (!(a > 0.0 && b > a)) throw DomainError("log_grid: need 0 < a < b");
    const int n = std::max(2, int(std::ceil(std::log10(b / a) * per_decade)) + 1);
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = a * std::pow(b / a, double(i) / (n - 1));
    t.back() = b;
    return t;
}

}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_SAMPLED_HPP
