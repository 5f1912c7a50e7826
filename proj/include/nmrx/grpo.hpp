#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace nmrx {

/**
 * Group-relative advantages: each return standardized against the group's
 * mean and population standard deviation, with epsilon keeping the division
 * finite when all returns agree. A single-element group gets advantage 0.
 */
inline std::vector<double> grpo_advantages(const std::vector<double>& returns,
                                           double epsilon = 1e-8) {
    require(!returns.empty(), errc::invariant_violation, "empty return group");
    require(epsilon > 0, errc::invariant_violation, "epsilon must be positive");
    double mu = mean(returns);
    double sigma = stddev_pop(returns);
    std::vector<double> out(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i)
        out[i] = (returns[i] - mu) / (sigma + epsilon);
    return out;
}

/**
 * Clipped surrogate loss over a group of G responses with per-token log
 * probabilities:
 *
 *   L = -(1/G) sum_i (1/|y_i|) sum_t min(rho*A_i, clip(rho, 1-e, 1+e)*A_i)
 *
 * with rho = exp(new - old). When `grad_new` is non-null it receives dL/d
 * new_logprobs; on the clipped branch the token's gradient is exactly zero.
 */
inline double grpo_loss(const std::vector<std::vector<double>>& old_logprobs,
                        const std::vector<std::vector<double>>& new_logprobs,
                        const std::vector<double>& advantages, double clip_eps,
                        std::vector<std::vector<double>>* grad_new = nullptr) {
    std::size_t g = old_logprobs.size();
    require(g >= 1, errc::shape_mismatch, "empty response group");
    require(new_logprobs.size() == g && advantages.size() == g, errc::shape_mismatch,
            "group sizes disagree");
    require(clip_eps > 0 && clip_eps < 1, errc::invariant_violation,
            "clip epsilon must lie in (0, 1)");
    if (grad_new) grad_new->assign(g, {});

    double loss = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        std::size_t tokens = old_logprobs[i].size();
        require(tokens >= 1, errc::shape_mismatch, "response has no tokens");
        require(new_logprobs[i].size() == tokens, errc::shape_mismatch,
                "token counts disagree");
        if (grad_new) (*grad_new)[i].assign(tokens, 0.0);
        double adv = advantages[i];
        double scale = 1.0 / (static_cast<double>(g) * static_cast<double>(tokens));
        for (std::size_t t = 0; t < tokens; ++t) {
            double rho = std::exp(new_logprobs[i][t] - old_logprobs[i][t]);
            double unclipped = rho * adv;
            double clipped = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps) * adv;
            if (unclipped <= clipped) {
                loss -= scale * unclipped;
                if (grad_new) (*grad_new)[i][t] = -scale * rho * adv;
            } else {
                loss -= scale * clipped;
            }
        }
    }
    return loss;
}

}  // namespace nmrx
