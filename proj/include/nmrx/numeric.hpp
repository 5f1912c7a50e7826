#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace nmrx {

using cplx = std::complex<double>;

inline bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population standard deviation (divide by n, not n-1).
inline double stddev_pop(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double mu = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

// Median of a copy; even-length input averages the two middle elements.
inline double median(std::vector<double> v) {
    require(!v.empty(), errc::invariant_violation, "median of empty range");
    std::size_t n = v.size();
    std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

// Median absolute deviation about the median (unscaled).
inline double mad(const std::vector<double>& v) {
    double med = median(v);
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
    return median(std::move(dev));
}

// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    const double two_pi = 2.0 * M_PI;
    a = std::fmod(a, two_pi);
    if (a <= -M_PI) a += two_pi;
    if (a > M_PI) a -= two_pi;
    return a;
}

inline bool approx_equal(double a, double b, double tol) {
    return std::abs(a - b) <= tol;
}

// Trapezoidal integral with uniform spacing dx.
inline double trapezoid(const std::vector<double>& y, std::size_t lo, std::size_t hi, double dx) {
    if (hi <= lo) return 0.0;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += 0.5 * (y[i] + y[i + 1]);
    return acc * dx;
}

inline bool is_power_of_two(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace nmrx
