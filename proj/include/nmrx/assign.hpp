#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "annotate.hpp"
#include "errors.hpp"
#include "hungarian.hpp"
#include "hyperbolic.hpp"
#include "molecule.hpp"
#include "multiplet.hpp"
#include "signals.hpp"

namespace nmrx {

// Scoring weights for matching predicted sites against observed multiplets.
// The per-nucleus factory picks shift widths appropriate for 1H vs 13C scales.
struct AssignConfig {
    double sigma_delta = 0.2;        // ppm width of the shift agreement kernel
    double kappa_disc = 0.3;         // multiplier applied when patterns disagree
    double tau_j = 1.0;              // Hz width of the J agreement kernel
    double lambda_match = 1.0;
    double lambda_cov = 1.0;
    double lambda_obs = 1.0;
    double alpha = 2.0;              // charge per predicted site with no signal
    double beta = 2.0;               // charge per observed signal with no site
    double merged_rate = 0.5;        // discounted charge for overlap-explainable leftovers
    double merge_tolerance_ppm = 0.1;
    double floor_phi = 1e-6;

    void validate() const {
        require(sigma_delta > 0 && tau_j > 0, errc::invariant_violation,
                "kernel widths must be positive");
        require(kappa_disc > 0 && kappa_disc <= 1, errc::invariant_violation,
                "kappa_disc must lie in (0, 1]");
        require(alpha >= 0 && beta >= 0 && merged_rate >= 0, errc::invariant_violation,
                "penalty rates must be nonnegative");
        require(lambda_match >= 0 && lambda_cov >= 0 && lambda_obs >= 0,
                errc::invariant_violation, "lambda weights must be nonnegative");
        require(merge_tolerance_ppm >= 0, errc::invariant_violation,
                "merge tolerance must be nonnegative");
        require(floor_phi > 0 && floor_phi < 1, errc::invariant_violation,
                "floor_phi must lie in (0, 1)");
    }
};

inline AssignConfig default_assign_config(Nucleus nuc) {
    AssignConfig cfg;
    if (nuc == Nucleus::C13) {
        cfg.sigma_delta = 2.0;
        cfg.merge_tolerance_ppm = 1.0;
    }
    return cfg;
}

namespace detail {

// Mean absolute difference between two J lists, both sorted descending and
// zero-padded to a common length. Two empty lists agree perfectly.
inline double j_list_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end(), std::greater<>());
    std::sort(b.begin(), b.end(), std::greater<>());
    std::size_t len = std::max(a.size(), b.size());
    if (len == 0) return 0.0;
    a.resize(len, 0.0);
    b.resize(len, 0.0);
    double sum = 0.0;
    for (std::size_t k = 0; k < len; ++k) sum += std::abs(a[k] - b[k]);
    return sum / static_cast<double>(len);
}

}  // namespace detail

/**
 * Compatibility score in (0, 1] for pairing a predicted site with an observed
 * multiplet: a Gaussian kernel on the shift difference, a discrete penalty
 * when the plotted patterns disagree (an m on either side acts as a wildcard),
 * and a Gaussian kernel on the J list distance, floored at cfg.floor_phi.
 */
inline double compatibility(const SiteGroup& site, const Multiplet& signal,
                            Nucleus signal_nucleus, const AssignConfig& cfg) {
    require(site.nucleus == signal_nucleus, errc::nucleus_mismatch,
            "site and signal nuclei differ");
    cfg.validate();
    double dd = site.predicted_shift_ppm - signal.center_ppm;
    double phi_delta = std::exp(-dd * dd / (2.0 * cfg.sigma_delta * cfg.sigma_delta));
    double phi_disc = 1.0;
    if (site.expected_multiplicity != signal.pattern &&
        site.expected_multiplicity != Pattern::m && signal.pattern != Pattern::m)
        phi_disc = cfg.kappa_disc;
    // An m on either side makes the J comparison void: an observed m carries
    // no J values by construction (the resolver gave up), and a site
    // predicted m lists one nominal J per coupled neighbour, which collapse
    // to fewer visible splittings whenever two of them coincide.
    double dj = signal.pattern == Pattern::m || site.expected_multiplicity == Pattern::m
                    ? 0.0
                    : detail::j_list_distance(site.predicted_j_hz, signal.j_values_hz);
    double phi_j = std::exp(-dj * dj / (2.0 * cfg.tau_j * cfg.tau_j));
    return std::max(cfg.floor_phi, phi_delta * phi_disc * phi_j);
}

/**
 * Negative log compatibility less the proton-count feasibility gate: for 1H
 * data a pairing whose integrals disagree is infeasible outright (+infinity);
 * 13C signals carry no integral so the gate does not apply.
 */
inline double pair_cost(const SiteGroup& site, const Multiplet& signal,
                        Nucleus signal_nucleus, const AssignConfig& cfg) {
    if (signal_nucleus == Nucleus::H1 && site.proton_count != signal.integral_protons)
        return std::numeric_limits<double>::infinity();
    return -std::log(compatibility(site, signal, signal_nucleus, cfg));
}

struct AssignmentBreakdown {
    double match = 0.0;        // sum of raw pair costs over assigned pairs
    double coverage = 0.0;     // alpha/beta charges for plain leftovers
    double observation = 0.0;  // merged_rate charges for overlap-explainable leftovers
};

struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (site, signal), sorted
    std::vector<std::size_t> unassigned_sites;
    std::vector<std::size_t> unexplained_signals;
    double total_cost = 0.0;
    AssignmentBreakdown breakdown;
};

namespace detail {

struct AssignProblem {
    std::vector<std::vector<double>> cost;  // [site][signal], raw pair costs
    std::vector<double> site_shift;
    std::vector<double> signal_shift;
    AssignConfig cfg;

    std::size_t n_sites() const { return site_shift.size(); }
    std::size_t n_signals() const { return signal_shift.size(); }
};

// Exact objective for a fixed pair set. A leftover site is charged the
// discounted merged rate when some assigned signal lies within the merge
// tolerance of its predicted shift (it plausibly merged into that signal),
// and the full coverage rate alpha otherwise; leftover signals mirror this
// against assigned sites with rate beta.
inline Assignment evaluate_assignment(
    const AssignProblem& prob, std::vector<std::pair<std::size_t, std::size_t>> pairs) {
    const AssignConfig& cfg = prob.cfg;
    std::sort(pairs.begin(), pairs.end());
    Assignment out;
    std::vector<char> site_used(prob.n_sites(), 0), signal_used(prob.n_signals(), 0);
    for (const auto& [i, j] : pairs) {
        out.breakdown.match += prob.cost[i][j];
        site_used[i] = 1;
        signal_used[j] = 1;
    }
    for (std::size_t i = 0; i < prob.n_sites(); ++i) {
        if (site_used[i]) continue;
        out.unassigned_sites.push_back(i);
        bool merged = false;
        for (std::size_t j = 0; j < prob.n_signals() && !merged; ++j)
            if (signal_used[j] &&
                std::abs(prob.site_shift[i] - prob.signal_shift[j]) <= cfg.merge_tolerance_ppm)
                merged = true;
        if (merged)
            out.breakdown.observation += cfg.merged_rate;
        else
            out.breakdown.coverage += cfg.alpha;
    }
    for (std::size_t j = 0; j < prob.n_signals(); ++j) {
        if (signal_used[j]) continue;
        out.unexplained_signals.push_back(j);
        bool merged = false;
        for (std::size_t i = 0; i < prob.n_sites() && !merged; ++i)
            if (site_used[i] &&
                std::abs(prob.site_shift[i] - prob.signal_shift[j]) <= cfg.merge_tolerance_ppm)
                merged = true;
        if (merged)
            out.breakdown.observation += cfg.merged_rate;
        else
            out.breakdown.coverage += cfg.beta;
    }
    out.pairs = std::move(pairs);
    out.total_cost = cfg.lambda_match * out.breakdown.match +
                     cfg.lambda_cov * out.breakdown.coverage +
                     cfg.lambda_obs * out.breakdown.observation;
    return out;
}

// Warm start: solve the linear relaxation that ignores merge discounts with a
// padded square Hungarian instance, then price the resulting pair set exactly.
// Any valid pair set gives an upper bound, so this only tightens pruning.
inline Assignment hungarian_incumbent(const AssignProblem& prob) {
    const AssignConfig& cfg = prob.cfg;
    const std::size_t ni = prob.n_sites(), nj = prob.n_signals();
    const std::size_t n = ni + nj;
    if (n == 0) return evaluate_assignment(prob, {});
    const double big = 1e12;
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, big));
    for (std::size_t i = 0; i < ni; ++i)
        for (std::size_t j = 0; j < nj; ++j)
            if (std::isfinite(prob.cost[i][j]))
                cost[i][j] = cfg.lambda_match * prob.cost[i][j];
    for (std::size_t i = 0; i < ni; ++i) cost[i][nj + i] = cfg.lambda_cov * cfg.alpha;
    for (std::size_t j = 0; j < nj; ++j) cost[ni + j][j] = cfg.lambda_cov * cfg.beta;
    for (std::size_t i = 0; i < nj; ++i)
        for (std::size_t j = 0; j < ni; ++j) cost[ni + i][nj + j] = 0.0;
    std::vector<int> col_of_row = hungarian_min_cost(cost);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < ni; ++i) {
        auto j = static_cast<std::size_t>(col_of_row[i]);
        if (j < nj && std::isfinite(prob.cost[i][j])) pairs.emplace_back(i, j);
    }
    return evaluate_assignment(prob, std::move(pairs));
}

// Exact branch and bound over signals: each signal is either paired with a
// still-free feasible site or left unexplained. The bound combines the exact
// accumulated cost with an optimistic per-remaining-signal floor and an
// optimistic charge for free sites that cannot all be absorbed by the
// remaining signals. Cost ties within 1e-12 resolve to the lexicographically
// smallest sorted pair set so results are deterministic.
inline Assignment solve_exact(const AssignProblem& prob) {
    const AssignConfig& cfg = prob.cfg;
    const std::size_t ni = prob.n_sites(), nj = prob.n_signals();
    const double tie_band = 1e-12;

    Assignment best = hungarian_incumbent(prob);
    require(std::isfinite(best.total_cost), errc::no_feasible_assignment,
            "assignment objective is unbounded under this configuration");

    const double discount_signal = std::min(cfg.lambda_cov * cfg.beta,
                                            cfg.lambda_obs * cfg.merged_rate);
    const double discount_site = std::min(cfg.lambda_cov * cfg.alpha,
                                          cfg.lambda_obs * cfg.merged_rate);
    std::vector<double> suffix(nj + 1, 0.0);
    for (std::size_t j = nj; j-- > 0;) {
        double floor_j = discount_signal;
        for (std::size_t i = 0; i < ni; ++i)
            if (std::isfinite(prob.cost[i][j]))
                floor_j = std::min(floor_j, cfg.lambda_match * prob.cost[i][j]);
        suffix[j] = suffix[j + 1] + floor_j;
    }

    std::vector<char> used(ni, 0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t n_free = ni;

    auto consider_leaf = [&](void) {
        Assignment leaf = evaluate_assignment(prob, pairs);
        if (leaf.total_cost < best.total_cost - tie_band ||
            (std::abs(leaf.total_cost - best.total_cost) <= tie_band &&
             leaf.pairs < best.pairs))
            best = std::move(leaf);
    };

    std::vector<std::size_t> order(ni);
    auto rec = [&](auto&& self, std::size_t j, double acc) -> void {
        std::size_t remaining = nj - j;
        double slack_sites = n_free > remaining
                                 ? static_cast<double>(n_free - remaining) * discount_site
                                 : 0.0;
        if (acc + suffix[j] + slack_sites > best.total_cost + tie_band) return;
        if (j == nj) {
            consider_leaf();
            return;
        }
        std::vector<std::size_t> options;
        for (std::size_t i = 0; i < ni; ++i)
            if (!used[i] && std::isfinite(prob.cost[i][j])) options.push_back(i);
        std::sort(options.begin(), options.end(), [&](std::size_t a, std::size_t b) {
            if (prob.cost[a][j] != prob.cost[b][j]) return prob.cost[a][j] < prob.cost[b][j];
            return a < b;
        });
        for (std::size_t i : options) {
            used[i] = 1;
            --n_free;
            pairs.emplace_back(i, j);
            self(self, j + 1, acc + cfg.lambda_match * prob.cost[i][j]);
            pairs.pop_back();
            ++n_free;
            used[i] = 0;
        }
        self(self, j + 1, acc + discount_signal);
    };
    (void)order;
    rec(rec, 0, 0.0);
    return best;
}

}  // namespace detail

/**
 * Globally optimal site-to-signal assignment under the combined match,
 * coverage, and observation objective. Exact for the problem sizes this
 * library works at; ties in total cost resolve to the lexicographically
 * smallest pair set.
 */
inline Assignment optimal_assignment(const std::vector<SiteGroup>& sites,
                                     const std::vector<Multiplet>& signals,
                                     Nucleus nucleus, const AssignConfig& cfg) {
    cfg.validate();
    detail::AssignProblem prob;
    prob.cfg = cfg;
    prob.cost.resize(sites.size(), std::vector<double>(signals.size(), 0.0));
    for (std::size_t i = 0; i < sites.size(); ++i) {
        require(sites[i].nucleus == nucleus, errc::nucleus_mismatch,
                "site nucleus differs from requested assignment nucleus");
        for (std::size_t j = 0; j < signals.size(); ++j)
            prob.cost[i][j] = pair_cost(sites[i], signals[j], nucleus, cfg);
    }
    prob.site_shift.reserve(sites.size());
    for (const auto& s : sites) prob.site_shift.push_back(s.predicted_shift_ppm);
    prob.signal_shift.reserve(signals.size());
    for (const auto& m : signals) prob.signal_shift.push_back(m.center_ppm);
    return detail::solve_exact(prob);
}

inline Assignment optimal_assignment(const CandidateStructure& candidate,
                                     const AnnotatedSpectrum& annotated,
                                     const AssignConfig& cfg) {
    Nucleus nuc = annotated.params.nucleus;
    const std::vector<SiteGroup>& sites =
        nuc == Nucleus::H1 ? candidate.h_sites : candidate.c_sites;
    require(!sites.empty(), errc::sites_not_predicted,
            "candidate has no predicted sites for this nucleus");
    return optimal_assignment(sites, annotated.multiplets, nuc, cfg);
}

// Observed evidence for scoring: either nucleus may be absent, but not both.
struct ObservedSpectra {
    std::optional<AnnotatedSpectrum> h1;
    std::optional<AnnotatedSpectrum> c13;

    void validate() const {
        require(h1.has_value() || c13.has_value(), errc::invariant_violation,
                "at least one observed spectrum is required");
        if (h1) require(h1->params.nucleus == Nucleus::H1, errc::nucleus_mismatch,
                        "h1 slot holds a non-1H spectrum");
        if (c13) require(c13->params.nucleus == Nucleus::C13, errc::nucleus_mismatch,
                         "c13 slot holds a non-13C spectrum");
    }
};

struct CandidateScore {
    std::string id;
    double score = 0.0;  // lower is better
    std::optional<Assignment> h1_assignment;
    std::optional<Assignment> c13_assignment;
    double hard_case_score = std::numeric_limits<double>::quiet_NaN();
};

/** Total assignment cost summed over whichever nuclei were observed. */
inline CandidateScore score_candidate(const CandidateStructure& candidate,
                                      const ObservedSpectra& observed,
                                      const AssignConfig& cfg_h1,
                                      const AssignConfig& cfg_c13) {
    observed.validate();
    CandidateScore out;
    out.id = candidate.id;
    if (observed.h1) {
        out.h1_assignment = optimal_assignment(candidate, *observed.h1, cfg_h1);
        out.score += out.h1_assignment->total_cost;
    }
    if (observed.c13) {
        out.c13_assignment = optimal_assignment(candidate, *observed.c13, cfg_c13);
        out.score += out.c13_assignment->total_cost;
    }
    return out;
}

/**
 * True when the two best scores in an ascending list are too close to call:
 * (s2 - s1) / (|s1| + 1) below the relative margin.
 */
inline bool detect_near_tie(const std::vector<double>& ascending_scores,
                            double relative_margin) {
    require(ascending_scores.size() >= 2, errc::too_few_scores,
            "near-tie test needs at least two scores");
    require(relative_margin > 0, errc::invariant_violation,
            "relative margin must be positive");
    double s1 = ascending_scores[0], s2 = ascending_scores[1];
    return (s2 - s1) / (std::abs(s1) + 1.0) < relative_margin;
}

struct RerankOptions {
    bool use_hard_case = false;
    double near_tie_margin = 0.05;
    double curvature = 1.0;
    std::size_t embed_dim = 16;
};

namespace detail {

// Desk-scale stand-in for a learned embedding: average-pool the 256-bin
// spectrum vector down to embed_dim blocks. Deterministic by construction.
inline std::vector<double> pooled_embedding(const SignalSet& set, std::size_t dim) {
    SpectrumVector sv = spectrum_vector(set);
    std::vector<double> out(dim, 0.0);
    std::size_t block = sv.bins.size() / dim;
    for (std::size_t d = 0; d < dim; ++d) {
        double sum = 0.0;
        for (std::size_t k = d * block; k < (d + 1) * block; ++k) sum += sv.bins[k];
        out[d] = sum / static_cast<double>(block);
    }
    return out;
}

}  // namespace detail

struct RerankResult {
    std::vector<CandidateScore> ranking;  // best first
    bool near_tie = false;
    bool hard_case_applied = false;
};

/**
 * Score every candidate against the observed spectra and order them best
 * first (ascending cost, ties by id). When requested and the top two scores
 * are a statistical dead heat, the near-tie group alone is reordered by the
 * hyperbolic hard-case score; rankings outside a detected tie are never
 * touched.
 */
inline RerankResult rerank(const std::vector<CandidateStructure>& pool,
                           const ObservedSpectra& observed,
                           const AssignConfig& cfg_h1, const AssignConfig& cfg_c13,
                           const RerankOptions& options = {}) {
    require(!pool.empty(), errc::empty_pool, "candidate pool is empty");
    observed.validate();
    require(options.embed_dim >= 1 && options.embed_dim <= spectrum_vector_bins,
            errc::invariant_violation, "embed_dim out of range");

    RerankResult out;
    out.ranking.reserve(pool.size());
    for (const auto& cand : pool)
        out.ranking.push_back(score_candidate(cand, observed, cfg_h1, cfg_c13));
    std::sort(out.ranking.begin(), out.ranking.end(),
              [](const CandidateScore& a, const CandidateScore& b) {
                  if (a.score != b.score) return a.score < b.score;
                  return a.id < b.id;
              });

    if (out.ranking.size() >= 2) {
        std::vector<double> scores;
        scores.reserve(out.ranking.size());
        for (const auto& r : out.ranking) scores.push_back(r.score);
        out.near_tie = detect_near_tie(scores, options.near_tie_margin);
        if (options.use_hard_case && out.near_tie) {
            Nucleus nuc = observed.h1 ? Nucleus::H1 : Nucleus::C13;
            const AnnotatedSpectrum& ann = observed.h1 ? *observed.h1 : *observed.c13;
            std::vector<double> query_embed = normalize_embedding(
                detail::pooled_embedding(observed_signal_set(ann), options.embed_dim));
            double s1 = scores[0];
            std::size_t group_end = 1;
            while (group_end < out.ranking.size() &&
                   (scores[group_end] - s1) / (std::abs(s1) + 1.0) <
                       options.near_tie_margin)
                ++group_end;
            std::vector<const CandidateStructure*> by_id(out.ranking.size(), nullptr);
            for (std::size_t k = 0; k < group_end; ++k) {
                for (const auto& cand : pool)
                    if (cand.id == out.ranking[k].id) {
                        by_id[k] = &cand;
                        break;
                    }
                std::vector<double> cand_embed = normalize_embedding(detail::pooled_embedding(
                    simulate_spectrum(*by_id[k], nuc), options.embed_dim));
                out.ranking[k].hard_case_score =
                    hard_case_score(query_embed, cand_embed, options.curvature);
            }
            std::stable_sort(out.ranking.begin(), out.ranking.begin() + group_end,
                             [](const CandidateScore& a, const CandidateScore& b) {
                                 return a.hard_case_score > b.hard_case_score;
                             });
            out.hard_case_applied = true;
        }
    }
    return out;
}

}  // namespace nmrx
