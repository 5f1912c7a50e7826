#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "annotate.hpp"
#include "assign.hpp"
#include "database.hpp"
#include "errors.hpp"
#include "repair.hpp"
#include "signals.hpp"

namespace nmrx {

// Placeholder best score for an empty candidate pool; any real assignment
// cost is far below it, so the first hit always registers as an improvement.
inline constexpr double empty_pool_score = 1e9;

// Two pool members whose simulated spectra agree beyond this are treated as
// duplicates of each other.
inline constexpr double duplicate_sim_threshold = 0.98;

enum class ActionType { generate, search, optimize, rerank, stop };

inline const char* action_type_name(ActionType t) {
    switch (t) {
        case ActionType::generate: return "Generate";
        case ActionType::search: return "Search";
        case ActionType::optimize: return "Optimize";
        case ActionType::rerank: return "ReRank";
        case ActionType::stop: return "Stop";
    }
    return "?";
}

inline ActionType action_type_from_string(const std::string& s) {
    if (s == "Generate") return ActionType::generate;
    if (s == "Search") return ActionType::search;
    if (s == "Optimize") return ActionType::optimize;
    if (s == "ReRank") return ActionType::rerank;
    if (s == "Stop") return ActionType::stop;
    fail(errc::malformed_action, "unknown action type '" + s + "'");
}

struct GenerateArgs {
    int n = 4;
};
struct SearchArgs {
    int k = 5;
};
struct OptimizeArgs {
    std::string candidate_id;
    int max_iters = 4;
};
struct ReRankArgs {
    bool use_hard_case = false;
};
struct StopArgs {};

struct Action {
    ActionType type = ActionType::stop;
    std::variant<GenerateArgs, SearchArgs, OptimizeArgs, ReRankArgs, StopArgs> args =
        StopArgs{};

    static Action generate(int n) { return {ActionType::generate, GenerateArgs{n}}; }
    static Action search(int k) { return {ActionType::search, SearchArgs{k}}; }
    static Action optimize(std::string id, int iters) {
        return {ActionType::optimize, OptimizeArgs{std::move(id), iters}};
    }
    static Action rerank(bool hard) { return {ActionType::rerank, ReRankArgs{hard}}; }
    static Action stop() { return {ActionType::stop, StopArgs{}}; }

    // The payload variant must agree with the declared type and carry sane
    // values; anything else is the "invalid format" event.
    void validate() const {
        switch (type) {
            case ActionType::generate: {
                const auto* a = std::get_if<GenerateArgs>(&args);
                require(a != nullptr, errc::malformed_action, "Generate args mismatch");
                require(a->n >= 1, errc::malformed_action, "Generate.n must be >= 1");
                return;
            }
            case ActionType::search: {
                const auto* a = std::get_if<SearchArgs>(&args);
                require(a != nullptr, errc::malformed_action, "Search args mismatch");
                require(a->k >= 1, errc::malformed_action, "Search.k must be >= 1");
                return;
            }
            case ActionType::optimize: {
                const auto* a = std::get_if<OptimizeArgs>(&args);
                require(a != nullptr, errc::malformed_action, "Optimize args mismatch");
                require(!a->candidate_id.empty(), errc::malformed_action,
                        "Optimize.candidate_id empty");
                require(a->max_iters >= 1, errc::malformed_action,
                        "Optimize.max_iters must be >= 1");
                return;
            }
            case ActionType::rerank:
                require(std::holds_alternative<ReRankArgs>(args), errc::malformed_action,
                        "ReRank args mismatch");
                return;
            case ActionType::stop:
                require(std::holds_alternative<StopArgs>(args), errc::malformed_action,
                        "Stop args mismatch");
                return;
        }
        fail(errc::malformed_action, "unknown action type");
    }
};

// Digest of the observed spectra that stays fixed over a trajectory.
struct NmrSummary {
    std::size_t h1_signal_count = 0;
    std::size_t c13_signal_count = 0;
    double h1_low_ppm = 0.0, h1_high_ppm = 0.0;
    double c13_low_ppm = 0.0, c13_high_ppm = 0.0;
    int total_protons = 0;
};

struct PoolMember {
    CandidateStructure candidate;
    double score = empty_pool_score;  // assignment cost vs the observation
    double sim_to_observed = 0.0;
    double hard_case = std::numeric_limits<double>::quiet_NaN();
    std::optional<SignalSet> simulated_h1;
    std::optional<SignalSet> simulated_c13;
};

struct DecisionState {
    NmrSummary nmr_summary;
    std::vector<PoolMember> candidate_pool;  // kept in current ranking order
    std::vector<std::pair<std::string, std::string>> history;  // (action, outcome)
    int budget_remaining = 0;
    std::size_t generated_cursor = 0;  // prefix of the generator source consumed
    double uncertainty = 0.0;          // normalized score spread of the top 3
    double diversity = 1.0;            // 1 - mean pairwise sim of the pool
    bool terminated = false;
};

struct CandidateSummary {
    std::size_t pool_size = 0;
    double best_score = empty_pool_score;
    double delta_score = 0.0;  // current best minus previous best; negative = better
};

struct EquivalenceJudgment {
    std::size_t duplicate_groups = 0;  // near-duplicate clusters of size >= 2
};

struct AlignmentInfo {
    double best_sim = 0.0;
    double mean_top3_sim = 0.0;
};

struct Observation {
    CandidateSummary candidate_summary;
    EquivalenceJudgment equivalence;
    AlignmentInfo alignment;
};

struct RewardWeights {
    double lambda_fmt = 1.0;
    double lambda_eff = 1.0;
    double lambda_tool = 1.0;
    double lambda_align = 1.0;
    int t0_budget = 5;  // steps beyond this start paying the efficiency penalty
    double alpha_succ = 0.5;
    double alpha_prog = 0.5;
    double alpha_fail = 0.5;
    double beta1 = 1.0;
    double beta2 = 0.5;

    void validate() const {
        require(lambda_fmt >= 0 && lambda_eff >= 0 && lambda_tool >= 0 &&
                    lambda_align >= 0,
                errc::invariant_violation, "lambda weights must be nonnegative");
        require(t0_budget >= 0, errc::invariant_violation, "T0 must be nonnegative");
        require(alpha_succ > 0 && alpha_prog > 0 && alpha_fail > 0,
                errc::invariant_violation, "alpha rates must be positive");
        require(beta1 >= 0 && beta2 >= 0, errc::invariant_violation,
                "beta rates must be nonnegative");
    }
};

// Facts about how a step went that the observation alone cannot encode.
struct StepEvents {
    bool valid = true;      // parsed and dispatched
    bool succeeded = false;  // a tool ran and returned
    bool failed = false;     // a tool raised
};

struct RewardBreakdown {
    double r_fmt = 0.0;
    double r_eff = 0.0;
    double r_tool = 0.0;
    double r_align = 0.0;
    double r_total = 0.0;
};

/**
 * Step reward r_t = lf*r_fmt + le*r_eff + lt*r_tool + la*r_align with
 *   r_fmt  = 1 if the action was well formed
 *   r_eff  = -1 once the step index passes T0
 *   r_tool = a_succ*[tool ok] + a_prog*[progress] - a_fail*[tool error]
 *   r_align = b1*clamp(prev_best - cur_best, -1, 1)
 *           + b2*clamp(prev_dups - cur_dups, -1, 1)/max(pool, 1)
 * Progress means the best score strictly improved or the pool gained a
 * member, both read off the two observations.
 */
inline RewardBreakdown step_reward(const StepEvents& events, const Observation& current,
                                   const Observation& previous, int t,
                                   const RewardWeights& weights) {
    weights.validate();
    require(t >= 1, errc::invariant_violation, "step index starts at 1");
    RewardBreakdown out;
    out.r_fmt = events.valid ? 1.0 : 0.0;
    out.r_eff = t > weights.t0_budget ? -1.0 : 0.0;
    bool productive =
        current.candidate_summary.best_score < previous.candidate_summary.best_score ||
        current.candidate_summary.pool_size > previous.candidate_summary.pool_size;
    out.r_tool = weights.alpha_succ * (events.succeeded ? 1.0 : 0.0) +
                 weights.alpha_prog * (productive ? 1.0 : 0.0) -
                 weights.alpha_fail * (events.failed ? 1.0 : 0.0);
    double r_cand = std::clamp(previous.candidate_summary.best_score -
                                   current.candidate_summary.best_score,
                               -1.0, 1.0);
    double r_eq = std::clamp(static_cast<double>(previous.equivalence.duplicate_groups) -
                                 static_cast<double>(current.equivalence.duplicate_groups),
                             -1.0, 1.0) /
                  static_cast<double>(std::max<std::size_t>(
                      current.candidate_summary.pool_size, 1));
    out.r_align = weights.beta1 * r_cand + weights.beta2 * r_eq;
    out.r_total = weights.lambda_fmt * out.r_fmt + weights.lambda_eff * out.r_eff +
                  weights.lambda_tool * out.r_tool + weights.lambda_align * out.r_align;
    return out;
}

// Everything the environment can touch. The fault injector is a test hook
// that runs before dispatch and may throw to simulate a broken tool.
struct ToolBundle {
    const CandidateDatabase* database = nullptr;
    std::vector<CandidateStructure> generator_source;
    ShiftTable h_table;
    ShiftTable c_table;
    ObservedSpectra observed;
    AssignConfig assign_h1 = default_assign_config(Nucleus::H1);
    AssignConfig assign_c13 = default_assign_config(Nucleus::C13);
    SearchConfig search;
    RepairConfig repair;
    RerankOptions rerank;
    std::size_t coarse_factor = 4;
    std::function<void(ActionType)> fault_injector;
};

/** Signal sets of the observed spectra, the common query/repair target. */
inline Spectra signal_targets(const ObservedSpectra& observed) {
    observed.validate();
    Spectra out;
    if (observed.h1) out.h = observed_signal_set(*observed.h1);
    if (observed.c13) out.c = observed_signal_set(*observed.c13);
    return out;
}

namespace detail {

inline double member_pair_sim(const PoolMember& a, const PoolMember& b,
                              const RepairConfig& cfg) {
    double acc = 0.0;
    int terms = 0;
    if (a.simulated_h1 && b.simulated_h1) {
        acc += peak_set_similarity(*a.simulated_h1, *b.simulated_h1, cfg.tol_ppm_h);
        ++terms;
    }
    if (a.simulated_c13 && b.simulated_c13) {
        acc += peak_set_similarity(*a.simulated_c13, *b.simulated_c13, cfg.tol_ppm_c);
        ++terms;
    }
    return terms > 0 ? acc / terms : 0.0;
}

inline PoolMember make_member(CandidateStructure cand, const ToolBundle& tools) {
    PoolMember m;
    if (cand.h_sites.empty() && cand.c_sites.empty())
        populate_sites(cand, tools.h_table, tools.c_table);
    m.candidate = std::move(cand);
    if (!m.candidate.h_sites.empty())
        m.simulated_h1 = simulate_spectrum(m.candidate, Nucleus::H1);
    if (!m.candidate.c_sites.empty())
        m.simulated_c13 = simulate_spectrum(m.candidate, Nucleus::C13);
    CandidateScore sc =
        score_candidate(m.candidate, tools.observed, tools.assign_h1, tools.assign_c13);
    m.score = sc.score;
    Spectra target = signal_targets(tools.observed);
    m.sim_to_observed = detail::repair_reward(m.candidate, target, tools.repair);
    return m;
}

inline void sort_pool(std::vector<PoolMember>& pool) {
    std::sort(pool.begin(), pool.end(), [](const PoolMember& a, const PoolMember& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.candidate.id < b.candidate.id;
    });
}

// Insert keeping the first occurrence of each id, then restore ranking order.
inline bool merge_into_pool(std::vector<PoolMember>& pool, PoolMember member) {
    for (const auto& m : pool)
        if (m.candidate.id == member.candidate.id) return false;
    pool.push_back(std::move(member));
    sort_pool(pool);
    return true;
}

inline void refresh_derived_fields(DecisionState& state, const ToolBundle& tools) {
    const auto& pool = state.candidate_pool;
    if (pool.size() < 2) {
        state.uncertainty = 0.0;
        state.diversity = 1.0;
        return;
    }
    std::vector<double> scores;
    scores.reserve(pool.size());
    for (const auto& m : pool) scores.push_back(m.score);
    std::sort(scores.begin(), scores.end());
    std::size_t top = std::min<std::size_t>(3, scores.size());
    state.uncertainty = (scores[top - 1] - scores[0]) / (std::abs(scores[0]) + 1.0);
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            acc += member_pair_sim(pool[i], pool[j], tools.repair);
            ++pairs;
        }
    state.diversity = 1.0 - acc / static_cast<double>(pairs);
}

inline std::size_t duplicate_group_count(const std::vector<PoolMember>& pool,
                                         const RepairConfig& cfg) {
    std::size_t n = pool.size();
    if (n < 2) return 0;
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (member_pair_sim(pool[i], pool[j], cfg) > duplicate_sim_threshold)
                parent[find(i)] = find(j);
    std::vector<std::size_t> size(n, 0);
    for (std::size_t i = 0; i < n; ++i) ++size[find(i)];
    std::size_t groups = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (parent[i] == i && size[i] >= 2) ++groups;
    return groups;
}

}  // namespace detail

inline double best_pool_score(const DecisionState& state) {
    double best = empty_pool_score;
    for (const auto& m : state.candidate_pool) best = std::min(best, m.score);
    return best;
}

/** Observation digest of a state, with delta against the previous best. */
inline Observation observe(const DecisionState& state, double previous_best,
                           const ToolBundle& tools) {
    Observation o;
    o.candidate_summary.pool_size = state.candidate_pool.size();
    o.candidate_summary.best_score = best_pool_score(state);
    o.candidate_summary.delta_score = o.candidate_summary.best_score - previous_best;
    o.equivalence.duplicate_groups =
        detail::duplicate_group_count(state.candidate_pool, tools.repair);
    std::vector<double> sims;
    sims.reserve(state.candidate_pool.size());
    for (const auto& m : state.candidate_pool) sims.push_back(m.sim_to_observed);
    std::sort(sims.begin(), sims.end(), std::greater<>());
    if (!sims.empty()) {
        o.alignment.best_sim = sims[0];
        std::size_t top = std::min<std::size_t>(3, sims.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < top; ++i) acc += sims[i];
        o.alignment.mean_top3_sim = acc / static_cast<double>(top);
    }
    return o;
}

/**
 * Pure transition: dispatches the action against the tools, merges results
 * into a copy of the state (dedup by id), decrements the budget, and
 * returns the new state with its observation. The input state is never
 * modified. Stop freezes the pool and marks termination.
 */
inline std::pair<DecisionState, Observation> step(const DecisionState& state,
                                                  const Action& action,
                                                  const ToolBundle& tools) {
    require(!state.terminated, errc::invariant_violation, "state is terminated");
    require(state.budget_remaining > 0, errc::budget_exhausted, "no budget left");
    action.validate();
    if (tools.fault_injector) tools.fault_injector(action.type);

    double previous_best = best_pool_score(state);
    DecisionState next = state;
    next.budget_remaining -= 1;

    switch (action.type) {
        case ActionType::generate: {
            const auto& a = std::get<GenerateArgs>(action.args);
            std::size_t take = std::min<std::size_t>(
                static_cast<std::size_t>(a.n),
                tools.generator_source.size() - std::min(tools.generator_source.size(),
                                                         next.generated_cursor));
            for (std::size_t i = 0; i < take; ++i)
                detail::merge_into_pool(
                    next.candidate_pool,
                    detail::make_member(tools.generator_source[next.generated_cursor + i],
                                        tools));
            next.generated_cursor += take;
            break;
        }
        case ActionType::search: {
            const auto& a = std::get<SearchArgs>(action.args);
            require(tools.database != nullptr, errc::empty_database,
                    "no database configured");
            auto k = static_cast<std::size_t>(a.k);
            std::size_t coarse =
                std::max(k, std::min(tools.database->size(), k * tools.coarse_factor));
            Spectra query = signal_targets(tools.observed);
            auto hits =
                search_two_stage(query, *tools.database, coarse, k, tools.search);
            for (const auto& h : hits)
                detail::merge_into_pool(next.candidate_pool,
                                        detail::make_member(h.entry->candidate, tools));
            break;
        }
        case ActionType::optimize: {
            const auto& a = std::get<OptimizeArgs>(action.args);
            const PoolMember* target_member = nullptr;
            for (const auto& m : next.candidate_pool)
                if (m.candidate.id == a.candidate_id) {
                    target_member = &m;
                    break;
                }
            require(target_member != nullptr, errc::invariant_violation,
                    "optimize target '" + a.candidate_id + "' not in pool");
            RepairConfig cfg = tools.repair;
            cfg.max_iters = a.max_iters;
            Spectra target = signal_targets(tools.observed);
            RepairResult rep = repair_local_search(target_member->candidate, target,
                                                   tools.h_table, tools.c_table, cfg);
            if (!rep.applied_edits.empty()) {
                rep.candidate.id = a.candidate_id + "*";
                detail::merge_into_pool(next.candidate_pool,
                                        detail::make_member(rep.candidate, tools));
            }
            break;
        }
        case ActionType::rerank: {
            const auto& a = std::get<ReRankArgs>(action.args);
            if (!next.candidate_pool.empty()) {
                std::vector<CandidateStructure> cands;
                cands.reserve(next.candidate_pool.size());
                for (const auto& m : next.candidate_pool) cands.push_back(m.candidate);
                RerankOptions opts = tools.rerank;
                opts.use_hard_case = a.use_hard_case;
                RerankResult rr = rerank(cands, tools.observed, tools.assign_h1,
                                         tools.assign_c13, opts);
                std::vector<PoolMember> reordered;
                reordered.reserve(next.candidate_pool.size());
                for (const auto& ranked : rr.ranking) {
                    for (auto& m : next.candidate_pool)
                        if (m.candidate.id == ranked.id) {
                            m.score = ranked.score;
                            m.hard_case = ranked.hard_case_score;
                            reordered.push_back(std::move(m));
                            break;
                        }
                }
                next.candidate_pool = std::move(reordered);
            }
            break;
        }
        case ActionType::stop:
            next.terminated = true;
            break;
    }

    detail::refresh_derived_fields(next, tools);
    next.history.emplace_back(action_type_name(action.type),
                              action.type == ActionType::stop ? "stop" : "ok");
    return {std::move(next), observe(next, previous_best, tools)};
}

enum class TerminationReason { stop, budget_exhausted };

inline const char* termination_name(TerminationReason r) {
    return r == TerminationReason::stop ? "Stop" : "BudgetExhausted";
}

struct TrajectoryStep {
    std::string state_digest;  // pre-action state fingerprint
    Action action;
    StepEvents events;
    Observation observation;
    RewardBreakdown reward;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    std::vector<std::string> final_prediction;  // candidate ids, best first
    TerminationReason terminated_by = TerminationReason::budget_exhausted;
    double total_return = 0.0;
    std::string truth_id;  // planted ground truth when known, else empty
};

inline double trajectory_return(const Trajectory& traj) {
    double acc = 0.0;
    for (const auto& s : traj.steps) acc += s.reward.r_total;
    return acc;
}

struct PolicySpec {
    std::string name = "workflow";  // "workflow" or "greedy-budget"
    int generate_n = 6;
    int search_k = 5;
    int optimize_max_iters = 4;
    bool use_hard_case = false;
    double sim_gate = 0.9;   // workflow: skip Optimize at or above this sim
    double stop_score = 1.0;  // greedy-budget: stop once best score is below

    void validate() const {
        require(name == "workflow" || name == "greedy-budget", errc::config_error,
                "unknown policy '" + name + "'");
        require(generate_n >= 1 && search_k >= 1 && optimize_max_iters >= 1,
                errc::config_error, "policy counts must be >= 1");
    }
};

namespace detail {

inline std::string state_digest(const DecisionState& s) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "pool=%zu;best=%.9g;budget=%d",
                  s.candidate_pool.size(), best_pool_score(s), s.budget_remaining);
    return buf;
}

inline NmrSummary summarize_observed(const ObservedSpectra& observed) {
    NmrSummary out;
    if (observed.h1) {
        out.h1_signal_count = observed.h1->multiplets.size();
        for (const auto& m : observed.h1->multiplets) out.total_protons += m.integral_protons;
        if (!observed.h1->multiplets.empty()) {
            out.h1_low_ppm = observed.h1->multiplets.front().center_ppm;
            out.h1_high_ppm = out.h1_low_ppm;
            for (const auto& m : observed.h1->multiplets) {
                out.h1_low_ppm = std::min(out.h1_low_ppm, m.center_ppm);
                out.h1_high_ppm = std::max(out.h1_high_ppm, m.center_ppm);
            }
        }
    }
    if (observed.c13) {
        out.c13_signal_count = observed.c13->multiplets.size();
        if (!observed.c13->multiplets.empty()) {
            out.c13_low_ppm = observed.c13->multiplets.front().center_ppm;
            out.c13_high_ppm = out.c13_low_ppm;
            for (const auto& m : observed.c13->multiplets) {
                out.c13_low_ppm = std::min(out.c13_low_ppm, m.center_ppm);
                out.c13_high_ppm = std::max(out.c13_high_ppm, m.center_ppm);
            }
        }
    }
    return out;
}

// Shared engine behind the scripted policies and trajectory replay: asks
// next_action for each step, executes it, and absorbs tool errors as fail
// events without aborting.
inline Trajectory run_with_actions(
    const ToolBundle& tools, const RewardWeights& weights, int budget,
    const std::function<std::optional<Action>(const DecisionState&, std::size_t)>&
        next_action) {
    require(budget >= 1, errc::invariant_violation, "budget must be >= 1");
    weights.validate();
    tools.observed.validate();

    DecisionState state;
    state.nmr_summary = summarize_observed(tools.observed);
    state.budget_remaining = budget;

    Trajectory traj;
    Observation previous = observe(state, empty_pool_score, tools);
    while (state.budget_remaining > 0 && !state.terminated) {
        std::optional<Action> maybe = next_action(state, traj.steps.size());
        if (!maybe) break;
        TrajectoryStep rec;
        rec.state_digest = state_digest(state);
        rec.action = *maybe;
        Observation current;
        try {
            auto [next, obs] = step(state, rec.action, tools);
            rec.events.valid = true;
            rec.events.succeeded = rec.action.type != ActionType::stop;
            rec.events.failed = false;
            state = std::move(next);
            current = obs;
        } catch (const Error& e) {
            rec.events.valid = e.code() != errc::malformed_action;
            rec.events.succeeded = false;
            rec.events.failed = true;
            state.budget_remaining -= 1;
            state.history.emplace_back(action_type_name(rec.action.type),
                                       rec.events.valid ? "fail" : "malformed");
            current = observe(state, previous.candidate_summary.best_score, tools);
        }
        rec.observation = current;
        rec.reward = step_reward(rec.events, current, previous,
                                 static_cast<int>(traj.steps.size()) + 1, weights);
        traj.steps.push_back(std::move(rec));
        previous = current;
    }
    traj.terminated_by = state.terminated ? TerminationReason::stop
                                          : TerminationReason::budget_exhausted;
    for (const auto& m : state.candidate_pool)
        traj.final_prediction.push_back(m.candidate.id);
    traj.total_return = trajectory_return(traj);
    return traj;
}

}  // namespace detail

/**
 * Runs one of the built-in deterministic policies to termination or budget
 * exhaustion and records the full trajectory with reward accounting.
 *
 * workflow:       Generate, Search, Optimize (only while the best sim is
 *                 below sim_gate), ReRank, Stop.
 * greedy-budget:  picks the action with the highest heuristic expected
 *                 payoff each step and stops once the best score clears
 *                 stop_score or nothing useful remains.
 */
inline Trajectory run_scripted_policy(const ToolBundle& tools, const PolicySpec& policy,
                                      const RewardWeights& weights, int budget) {
    policy.validate();
    if (policy.name == "workflow") {
        auto did_optimize = std::make_shared<bool>(false);
        auto next = [&tools, &policy, did_optimize](
                        const DecisionState& state,
                        std::size_t idx) -> std::optional<Action> {
            switch (idx) {
                case 0: return Action::generate(policy.generate_n);
                case 1: return Action::search(policy.search_k);
                case 2: {
                    double best_sim = 0.0;
                    const PoolMember* best = nullptr;
                    for (const auto& m : state.candidate_pool) {
                        best_sim = std::max(best_sim, m.sim_to_observed);
                        if (!best || m.score < best->score) best = &m;
                    }
                    if (best != nullptr && best_sim < policy.sim_gate) {
                        *did_optimize = true;
                        return Action::optimize(best->candidate.id,
                                                policy.optimize_max_iters);
                    }
                    return Action::rerank(policy.use_hard_case);
                }
                case 3:
                    return *did_optimize ? Action::rerank(policy.use_hard_case)
                                         : Action::stop();
                case 4: return Action::stop();
                default: return Action::stop();
            }
        };
        return detail::run_with_actions(tools, weights, budget, next);
    }

    // greedy-budget
    auto next = [&tools, &policy](const DecisionState& state,
                                  std::size_t) -> std::optional<Action> {
        double best = best_pool_score(state);
        if (!state.candidate_pool.empty() && best < policy.stop_score)
            return Action::stop();
        std::size_t n_search = 0, n_opt = 0, n_rerank = 0;
        for (const auto& [name, outcome] : state.history) {
            if (name == "Search") ++n_search;
            if (name == "Optimize") ++n_opt;
            if (name == "ReRank") ++n_rerank;
        }
        double best_sim = 0.0;
        for (const auto& m : state.candidate_pool)
            best_sim = std::max(best_sim, m.sim_to_observed);
        double h_generate = state.generated_cursor < tools.generator_source.size()
                                ? 0.6 / (1.0 + state.candidate_pool.size())
                                : 0.0;
        double h_search = tools.database != nullptr && !tools.database->empty()
                              ? 0.8 / (1.0 + n_search)
                              : 0.0;
        double h_optimize = !state.candidate_pool.empty() && best_sim < policy.sim_gate
                                ? 0.5 / (1.0 + n_opt)
                                : 0.0;
        double h_rerank =
            state.candidate_pool.size() >= 2 ? 0.3 / (1.0 + n_rerank) : 0.0;
        double top = std::max({h_generate, h_search, h_optimize, h_rerank});
        if (top < 1e-9) return Action::stop();
        if (h_generate == top) return Action::generate(policy.generate_n);
        if (h_search == top) return Action::search(policy.search_k);
        if (h_optimize == top) {
            const PoolMember* target_member = &state.candidate_pool.front();
            for (const auto& m : state.candidate_pool)
                if (m.score < target_member->score) target_member = &m;
            return Action::optimize(target_member->candidate.id,
                                    policy.optimize_max_iters);
        }
        return Action::rerank(policy.use_hard_case);
    };
    return detail::run_with_actions(tools, weights, budget, next);
}

/** Re-executes a recorded action sequence against the same tools. */
inline Trajectory replay_trajectory(const Trajectory& recorded, const ToolBundle& tools,
                                    const RewardWeights& weights, int budget) {
    auto next = [&recorded](const DecisionState&,
                            std::size_t idx) -> std::optional<Action> {
        if (idx >= recorded.steps.size()) return std::nullopt;
        return recorded.steps[idx].action;
    };
    return detail::run_with_actions(tools, weights, budget, next);
}

/** Fraction of cases whose ground-truth rank is within the top k; a missing
 * rank counts as a miss. */
inline double hit_at_k(const std::vector<std::optional<int>>& ranks, int k) {
    require(!ranks.empty(), errc::empty_evaluation, "no ranks to evaluate");
    require(k >= 1, errc::invariant_violation, "k must be >= 1");
    std::size_t hits = 0;
    for (const auto& r : ranks)
        if (r.has_value() && *r >= 1 && *r <= k) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

}  // namespace nmrx
