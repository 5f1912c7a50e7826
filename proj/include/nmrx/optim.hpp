#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace nmrx {

/**
 * Plain Nelder-Mead simplex minimizer for the low-dimensional refinement
 * steps. Deterministic for a given starting point. Terminates when the
 * simplex diameter in every coordinate drops below `tol` or after
 * `max_iter` reflections.
 */
struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, double step, double tol,
                                    int max_iter = 500) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

    auto order = [&] {
        for (std::size_t i = 1; i <= n; ++i) {
            auto p = pts[i];
            double v = vals[i];
            std::size_t j = i;
            while (j > 0 && vals[j - 1] > v) {
                pts[j] = pts[j - 1];
                vals[j] = vals[j - 1];
                --j;
            }
            pts[j] = p;
            vals[j] = v;
        }
    };

    int it = 0;
    for (; it < max_iter; ++it) {
        order();
        double diam = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                diam = std::max(diam, std::abs(pts[i][k] - pts[0][k]));
        if (diam < tol) break;

        // centroid of all but the worst vertex
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) c[k] += pts[i][k] / static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k) p[k] = c[k] + coef * (c[k] - pts[n][k]);
            return p;
        };

        auto xr = blend(1.0);
        double fr = f(xr);
        if (fr < vals[0]) {
            auto xe = blend(2.0);
            double fe = f(xe);
            if (fe < fr) {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if (fr < vals[n - 1]) {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            auto xc = blend(-0.5);
            double fc = f(xc);
            if (fc < vals[n]) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t k = 0; k < n; ++k)
                        pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    return {pts[0], vals[0], it};
}

}  // namespace nmrx
