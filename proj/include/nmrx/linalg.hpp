#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace nmrx {

/**
 * Symmetric positive definite banded matrix with fixed half-bandwidth.
 * band(i, d) holds A(i, i+d) for d in [0, half_bw]. Solved in place by an
 * unpivoted banded Cholesky, which is all the smoothing systems here need.
 */
class BandedSpd {
public:
    BandedSpd(std::size_t n, std::size_t half_bw)
        : n_(n), bw_(half_bw), a_(n * (half_bw + 1), 0.0) {}

    double& at(std::size_t i, std::size_t d) { return a_[i * (bw_ + 1) + d]; }
    double at(std::size_t i, std::size_t d) const { return a_[i * (bw_ + 1) + d]; }

    // Adds v to A(i, j) for j >= i (upper triangle storage).
    void add(std::size_t i, std::size_t j, double v) {
        if (j < i) std::swap(i, j);
        at(i, j - i) += v;
    }

    std::vector<double> solve(std::vector<double> b) const {
        require(b.size() == n_, errc::shape_mismatch, "banded solve rhs size");
        // Cholesky factor L stored in the same band layout: l(i,d) = L(i+d, i).
        std::vector<double> l(a_);
        auto lv = [&](std::size_t i, std::size_t d) -> double& { return l[i * (bw_ + 1) + d]; };
        for (std::size_t j = 0; j < n_; ++j) {
            double diag = lv(j, 0);
            for (std::size_t k = (j > bw_ ? j - bw_ : 0); k < j; ++k) {
                double ljk = lv(k, j - k);
                diag -= ljk * ljk;
            }
            require(diag > 0.0, errc::singular_fit, "banded system not positive definite");
            diag = std::sqrt(diag);
            lv(j, 0) = diag;
            std::size_t imax = std::min(n_ - 1, j + bw_);
            for (std::size_t i = j + 1; i <= imax; ++i) {
                double s = lv(j, i - j);
                for (std::size_t k = (i > bw_ ? i - bw_ : 0); k < j; ++k) {
                    if (j - k <= bw_ && i - k <= bw_) s -= lv(k, i - k) * lv(k, j - k);
                }
                lv(j, i - j) = s / diag;
            }
        }
        // forward then backward substitution
        for (std::size_t i = 0; i < n_; ++i) {
            double s = b[i];
            for (std::size_t k = (i > bw_ ? i - bw_ : 0); k < i; ++k) s -= lv(k, i - k) * b[k];
            b[i] = s / lv(i, 0);
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            double s = b[ii];
            std::size_t jmax = std::min(n_ - 1, ii + bw_);
            for (std::size_t j = ii + 1; j <= jmax; ++j) s -= lv(ii, j - ii) * b[j];
            b[ii] = s / lv(ii, 0);
        }
        return b;
    }

    std::size_t size() const { return n_; }

private:
    std::size_t n_, bw_;
    std::vector<double> a_;
};

/**
 * Least squares fit of a polynomial of the given degree to (x, y) pairs
 * via normal equations. Callers are expected to feed x values spanning a
 * modest range (the baseline code rescales to [-1, 1]); with degree <= 6
 * the normal equations are comfortably conditioned there.
 * Returns coefficients c0..c_degree, lowest order first.
 */
inline std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y,
                                   int degree) {
    require(degree >= 0, errc::invariant_violation, "polyfit degree must be nonnegative");
    require(x.size() == y.size(), errc::shape_mismatch, "polyfit input sizes differ");
    const std::size_t m = static_cast<std::size_t>(degree) + 1;
    require(x.size() >= m, errc::singular_fit,
            "polynomial degree too high for the number of fit points");
    // Gram matrix G = V^T V and rhs = V^T y for the Vandermonde V.
    std::vector<double> g(m * m, 0.0), rhs(m, 0.0);
    std::vector<double> pw(2 * m - 1);
    for (std::size_t k = 0; k < x.size(); ++k) {
        pw[0] = 1.0;
        for (std::size_t p = 1; p < pw.size(); ++p) pw[p] = pw[p - 1] * x[k];
        for (std::size_t i = 0; i < m; ++i) {
            rhs[i] += pw[i] * y[k];
            for (std::size_t j = i; j < m; ++j) g[i * m + j] += pw[i + j];
        }
    }
    // dense Cholesky on the small SPD Gram matrix
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < i; ++j) g[i * m + j] = g[j * m + i];
    for (std::size_t j = 0; j < m; ++j) {
        double diag = g[j * m + j];
        for (std::size_t k = 0; k < j; ++k) diag -= g[j * m + k] * g[j * m + k];
        require(diag > 0.0, errc::singular_fit, "polyfit normal equations singular");
        diag = std::sqrt(diag);
        g[j * m + j] = diag;
        for (std::size_t i = j + 1; i < m; ++i) {
            double s = g[i * m + j];
            for (std::size_t k = 0; k < j; ++k) s -= g[i * m + k] * g[j * m + k];
            g[i * m + j] = s / diag;
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= g[i * m + k] * rhs[k];
        rhs[i] = s / g[i * m + i];
    }
    for (std::size_t ii = m; ii-- > 0;) {
        double s = rhs[ii];
        for (std::size_t j = ii + 1; j < m; ++j) s -= g[j * m + ii] * rhs[j];
        rhs[ii] = s / g[ii * m + ii];
    }
    return rhs;
}

inline double polyval(const std::vector<double>& coeff, double x) {
    double acc = 0.0;
    for (std::size_t i = coeff.size(); i-- > 0;) acc = acc * x + coeff[i];
    return acc;
}

}  // namespace nmrx
