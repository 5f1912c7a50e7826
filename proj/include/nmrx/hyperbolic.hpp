#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace nmrx {

// Point on the hyperboloid sheet -x0^2 + sum xj^2 = -kappa, x0 > 0. coords
// holds d+1 entries for a d-dimensional tangent space.
struct LorentzPoint {
    std::vector<double> coords;
    double curvature_kappa = 1.0;
};

inline double lorentz_inner(const LorentzPoint& x, const LorentzPoint& y) {
    require(x.coords.size() == y.coords.size(), errc::shape_mismatch,
            "lorentz points have different dimension");
    require(x.coords.size() >= 2, errc::invalid_point, "lorentz point needs d >= 1");
    double acc = -x.coords[0] * y.coords[0];
    for (std::size_t j = 1; j < x.coords.size(); ++j) acc += x.coords[j] * y.coords[j];
    return acc;
}

inline void validate_point(const LorentzPoint& x) {
    require(x.curvature_kappa > 0, errc::nonpositive_curvature,
            "curvature must be positive");
    require(x.coords.size() >= 2, errc::invalid_point, "lorentz point needs d >= 1");
    require(all_finite(x.coords), errc::invalid_point, "lorentz point not finite");
    require(x.coords[0] > 0, errc::invalid_point, "lorentz point has x0 <= 0");
    double residual = lorentz_inner(x, x) + x.curvature_kappa;
    require(std::abs(residual) <= 1e-9, errc::invalid_point,
            "point is off the hyperboloid sheet");
}

/**
 * Exponential map at the origin: a tangent d-vector v maps to
 * (sqrt(k)*cosh(|v|/sqrt(k)), sqrt(k)*sinh(|v|/sqrt(k))*v/|v|), with v = 0
 * landing on the origin (sqrt(k), 0, ..., 0).
 */
inline LorentzPoint lorentz_exp(const std::vector<double>& v, double kappa) {
    require(kappa > 0, errc::nonpositive_curvature, "curvature must be positive");
    require(!v.empty(), errc::shape_mismatch, "tangent vector is empty");
    require(all_finite(v), errc::invalid_point, "tangent vector not finite");
    double sk = std::sqrt(kappa);
    double r = 0.0;
    for (double c : v) r += c * c;
    r = std::sqrt(r);
    LorentzPoint x;
    x.curvature_kappa = kappa;
    x.coords.assign(v.size() + 1, 0.0);
    if (r == 0.0) {
        x.coords[0] = sk;
        return x;
    }
    x.coords[0] = sk * std::cosh(r / sk);
    double scale = sk * std::sinh(r / sk) / r;
    for (std::size_t j = 0; j < v.size(); ++j) x.coords[j + 1] = scale * v[j];
    return x;
}

/**
 * Geodesic distance sqrt(k)*arcosh(-<x,y>/k). The arcosh argument is clamped
 * up to 1 only within a 1e-9 band; anything further below 1 means the inputs
 * are off the manifold and is an error.
 */
inline double lorentz_distance(const LorentzPoint& x, const LorentzPoint& y) {
    require(x.curvature_kappa == y.curvature_kappa, errc::curvature_mismatch,
            "points have different curvature");
    validate_point(x);
    validate_point(y);
    double w = -lorentz_inner(x, y) / x.curvature_kappa;
    require(w >= 1.0 - 1e-9, errc::invalid_point, "arcosh argument below clamp band");
    w = std::max(w, 1.0);
    return std::sqrt(x.curvature_kappa) * std::acosh(w);
}

/**
 * Mean-zero, unit-variance (population) rescaling of an embedding vector. A
 * constant vector has no direction to keep and maps to all zeros, which the
 * exponential map sends to the origin.
 */
inline std::vector<double> normalize_embedding(const std::vector<double>& z) {
    require(!z.empty(), errc::shape_mismatch, "embedding is empty");
    require(all_finite(z), errc::invalid_point, "embedding not finite");
    double mu = mean(z);
    double sigma = stddev_pop(z);
    std::vector<double> out(z.size(), 0.0);
    if (sigma < 1e-15) return out;
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = (z[j] - mu) / sigma;
    return out;
}

/**
 * Negative geodesic distance between two already-normalized projections
 * lifted through the exponential map. Zero means identical; more negative
 * means less consistent.
 */
inline double hard_case_score(const std::vector<double>& spectrum_vec,
                              const std::vector<double>& candidate_vec, double kappa) {
    require(spectrum_vec.size() == candidate_vec.size(), errc::shape_mismatch,
            "embedding dimensions differ");
    return -lorentz_distance(lorentz_exp(spectrum_vec, kappa),
                             lorentz_exp(candidate_vec, kappa));
}

struct HardCaseBatch {
    std::vector<double> spectrum_embedding;
    std::vector<double> positive_embedding;
    std::vector<std::vector<double>> negative_embeddings;
    double eta = 0.1;         // softmax temperature
    double margin_m = 1.0;    // ranking hinge margin
    double lambda_rank = 1.0;
    double lambda_reg = 0.01;

    void validate() const {
        require(!negative_embeddings.empty(), errc::empty_negatives,
                "hard-negative set is empty");
        std::size_t d = spectrum_embedding.size();
        require(d >= 2, errc::shape_mismatch, "embeddings need dimension >= 2");
        require(positive_embedding.size() == d, errc::shape_mismatch,
                "positive embedding dimension differs");
        for (const auto& n : negative_embeddings)
            require(n.size() == d, errc::shape_mismatch,
                    "negative embedding dimension differs");
        require(eta > 0, errc::invariant_violation, "eta must be positive");
        require(margin_m > 0, errc::invariant_violation, "margin must be positive");
        require(lambda_rank >= 0 && lambda_reg >= 0, errc::invariant_violation,
                "lambda weights must be nonnegative");
    }
};

struct HardCaseLossTerms {
    double total = 0.0;
    double con = 0.0;
    double rank = 0.0;
    double reg = 0.0;
};

struct HardCaseGradients {
    std::vector<double> spectrum;
    std::vector<double> positive;
    std::vector<std::vector<double>> negatives;
};

namespace detail {

// Geodesic distance between exp(a) and exp(b) together with its partials
// with respect to the tangent vectors a and b.
struct DistanceWithGrad {
    double value = 0.0;
    std::vector<double> grad_a;
    std::vector<double> grad_b;
};

// d<exp(v), y>_L / dv for a fixed ambient point y. At v = 0 the limit is the
// spatial part of y.
inline std::vector<double> exp_inner_grad(const std::vector<double>& v,
                                          const LorentzPoint& y, double kappa) {
    std::size_t d = v.size();
    std::vector<double> g(d, 0.0);
    double r2 = 0.0;
    for (double c : v) r2 += c * c;
    double r = std::sqrt(r2);
    if (r < 1e-12) {
        for (std::size_t j = 0; j < d; ++j) g[j] = y.coords[j + 1];
        return g;
    }
    double sk = std::sqrt(kappa);
    double sh = std::sinh(r / sk), ch = std::cosh(r / sk);
    double uy = 0.0;
    for (std::size_t j = 0; j < d; ++j) uy += (v[j] / r) * y.coords[j + 1];
    for (std::size_t j = 0; j < d; ++j) {
        double uj = v[j] / r;
        g[j] = -sh * uj * y.coords[0] + ch * uj * uy +
               (sk * sh / r) * (y.coords[j + 1] - uj * uy);
    }
    return g;
}

inline DistanceWithGrad lorentz_distance_grad(const std::vector<double>& a,
                                              const std::vector<double>& b,
                                              double kappa) {
    LorentzPoint x = lorentz_exp(a, kappa);
    LorentzPoint y = lorentz_exp(b, kappa);
    double w = -lorentz_inner(x, y) / kappa;
    require(w >= 1.0 - 1e-9, errc::invalid_point, "arcosh argument below clamp band");
    double wc = std::max(w, 1.0);
    DistanceWithGrad out;
    out.value = std::sqrt(kappa) * std::acosh(wc);
    // d(dist)/d<x,y> = -1/(sqrt(kappa)*sqrt(w^2-1)); the epsilon keeps the
    // coincident-point corner finite.
    double dist_dip = -1.0 / (std::sqrt(kappa) * std::sqrt(std::max(wc * wc - 1.0, 1e-18)));
    std::vector<double> ga = exp_inner_grad(a, y, kappa);
    std::vector<double> gb = exp_inner_grad(b, x, kappa);
    out.grad_a.resize(a.size());
    out.grad_b.resize(b.size());
    for (std::size_t j = 0; j < a.size(); ++j) out.grad_a[j] = dist_dip * ga[j];
    for (std::size_t j = 0; j < b.size(); ++j) out.grad_b[j] = dist_dip * gb[j];
    return out;
}

// Pull a gradient taken with respect to the normalized vector back to the raw
// embedding: g_raw = (1/sigma) * (g - mean(g) - z_norm * (z_norm . g) / d).
// A degenerate (constant) vector normalizes to zero and absorbs no gradient.
inline std::vector<double> normalize_backprop(const std::vector<double>& raw,
                                              const std::vector<double>& normalized,
                                              const std::vector<double>& g) {
    std::size_t d = raw.size();
    std::vector<double> out(d, 0.0);
    double sigma = stddev_pop(raw);
    if (sigma < 1e-15) return out;
    double gm = mean(g);
    double zg = 0.0;
    for (std::size_t j = 0; j < d; ++j) zg += normalized[j] * g[j];
    for (std::size_t j = 0; j < d; ++j)
        out[j] = (g[j] - gm - normalized[j] * zg / static_cast<double>(d)) / sigma;
    return out;
}

}  // namespace detail

/**
 * Contrastive + ranking + regularization objective over one spectrum, its
 * positive candidate, and a mined hard-negative set:
 *
 *   con  = -ln( e^{s+/eta} / (e^{s+/eta} + sum_k e^{s-_k/eta}) )
 *   rank = sum_k max(0, m - s+ + s-_k)
 *   reg  = sum of squared norms of the normalized projections
 *
 * where every s is a hard-case score computed after per-vector normalization.
 * When `grad` is non-null it receives analytic gradients with respect to the
 * raw batch embeddings, chained through normalization and the exponential map.
 */
inline HardCaseLossTerms hard_case_loss(const HardCaseBatch& batch, double kappa,
                                        HardCaseGradients* grad = nullptr) {
    batch.validate();
    require(kappa > 0, errc::nonpositive_curvature, "curvature must be positive");

    std::vector<double> ns = normalize_embedding(batch.spectrum_embedding);
    std::vector<double> np = normalize_embedding(batch.positive_embedding);
    std::vector<std::vector<double>> nn;
    nn.reserve(batch.negative_embeddings.size());
    for (const auto& z : batch.negative_embeddings) nn.push_back(normalize_embedding(z));

    detail::DistanceWithGrad pos = detail::lorentz_distance_grad(ns, np, kappa);
    double s_pos = -pos.value;
    std::vector<detail::DistanceWithGrad> neg(nn.size());
    std::vector<double> s_neg(nn.size());
    for (std::size_t k = 0; k < nn.size(); ++k) {
        neg[k] = detail::lorentz_distance_grad(ns, nn[k], kappa);
        s_neg[k] = -neg[k].value;
    }

    HardCaseLossTerms out;
    // Softmax contrastive term via a stable log-sum-exp over all logits.
    double lp = s_pos / batch.eta;
    double lmax = lp;
    for (double s : s_neg) lmax = std::max(lmax, s / batch.eta);
    double sum = std::exp(lp - lmax);
    for (double s : s_neg) sum += std::exp(s / batch.eta - lmax);
    double lse = lmax + std::log(sum);
    out.con = lse - lp;

    std::vector<char> hinge_active(s_neg.size(), 0);
    for (std::size_t k = 0; k < s_neg.size(); ++k) {
        double h = batch.margin_m - s_pos + s_neg[k];
        if (h > 0) {
            out.rank += h;
            hinge_active[k] = 1;
        }
    }

    auto sq = [](const std::vector<double>& z) {
        double acc = 0.0;
        for (double c : z) acc += c * c;
        return acc;
    };
    out.reg = sq(ns) + sq(np);
    for (const auto& z : nn) out.reg += sq(z);

    out.total = out.con + batch.lambda_rank * out.rank + batch.lambda_reg * out.reg;
    if (!grad) return out;

    double p_pos = std::exp(lp - lse);
    double dl_dspos = (p_pos - 1.0) / batch.eta;
    std::vector<double> dl_dsneg(s_neg.size());
    for (std::size_t k = 0; k < s_neg.size(); ++k)
        dl_dsneg[k] = std::exp(s_neg[k] / batch.eta - lse) / batch.eta;
    for (std::size_t k = 0; k < s_neg.size(); ++k) {
        if (!hinge_active[k]) continue;
        dl_dspos -= batch.lambda_rank;
        dl_dsneg[k] += batch.lambda_rank;
    }

    std::size_t d = ns.size();
    std::vector<double> gs(d, 0.0), gp(d, 0.0);
    std::vector<std::vector<double>> gn(nn.size(), std::vector<double>(d, 0.0));
    for (std::size_t j = 0; j < d; ++j) {
        // s = -distance, so ds/da = -grad_a.
        gs[j] += dl_dspos * -pos.grad_a[j];
        gp[j] += dl_dspos * -pos.grad_b[j];
    }
    for (std::size_t k = 0; k < nn.size(); ++k)
        for (std::size_t j = 0; j < d; ++j) {
            gs[j] += dl_dsneg[k] * -neg[k].grad_a[j];
            gn[k][j] += dl_dsneg[k] * -neg[k].grad_b[j];
        }
    for (std::size_t j = 0; j < d; ++j) {
        gs[j] += batch.lambda_reg * 2.0 * ns[j];
        gp[j] += batch.lambda_reg * 2.0 * np[j];
    }
    for (std::size_t k = 0; k < nn.size(); ++k)
        for (std::size_t j = 0; j < d; ++j)
            gn[k][j] += batch.lambda_reg * 2.0 * nn[k][j];

    grad->spectrum = detail::normalize_backprop(batch.spectrum_embedding, ns, gs);
    grad->positive = detail::normalize_backprop(batch.positive_embedding, np, gp);
    grad->negatives.clear();
    grad->negatives.reserve(nn.size());
    for (std::size_t k = 0; k < nn.size(); ++k)
        grad->negatives.push_back(
            detail::normalize_backprop(batch.negative_embeddings[k], nn[k], gn[k]));
    return out;
}

struct HardCaseTrainResult {
    std::vector<double> loss_curve;  // loss before each step, then the final loss
    HardCaseBatch batch;
};

/** Plain gradient descent on the batch embeddings at desk scale. */
inline HardCaseTrainResult hard_case_train(HardCaseBatch batch, double kappa,
                                           double learning_rate, std::size_t steps) {
    require(learning_rate > 0, errc::invariant_violation,
            "learning rate must be positive");
    HardCaseTrainResult out;
    for (std::size_t step = 0; step < steps; ++step) {
        HardCaseGradients g;
        HardCaseLossTerms terms = hard_case_loss(batch, kappa, &g);
        out.loss_curve.push_back(terms.total);
        auto update = [&](std::vector<double>& z, const std::vector<double>& dz) {
            for (std::size_t j = 0; j < z.size(); ++j) z[j] -= learning_rate * dz[j];
        };
        update(batch.spectrum_embedding, g.spectrum);
        update(batch.positive_embedding, g.positive);
        for (std::size_t k = 0; k < batch.negative_embeddings.size(); ++k)
            update(batch.negative_embeddings[k], g.negatives[k]);
    }
    out.loss_curve.push_back(hard_case_loss(batch, kappa).total);
    out.batch = std::move(batch);
    return out;
}

}  // namespace nmrx
