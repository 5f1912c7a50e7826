#pragma once

#include <string>

#include "agent.hpp"
#include "fid_json.hpp"

namespace nmrx {

namespace detail {

inline json action_to_json(const Action& a) {
    json j{{"type", action_type_name(a.type)}};
    switch (a.type) {
        case ActionType::generate:
            j["n"] = std::get<GenerateArgs>(a.args).n;
            break;
        case ActionType::search:
            j["k"] = std::get<SearchArgs>(a.args).k;
            break;
        case ActionType::optimize: {
            const auto& o = std::get<OptimizeArgs>(a.args);
            j["candidate_id"] = o.candidate_id;
            j["max_iters"] = o.max_iters;
            break;
        }
        case ActionType::rerank:
            j["use_hard_case"] = std::get<ReRankArgs>(a.args).use_hard_case;
            break;
        case ActionType::stop:
            break;
    }
    return j;
}

inline Action action_from_json(const json& j) {
    if (!j.is_object()) fail(errc::malformed_document, "action must be an object");
    ActionType type = action_type_from_string(get_string(j, "type"));
    switch (type) {
        case ActionType::generate:
            return Action::generate(static_cast<int>(get_number(j, "n")));
        case ActionType::search:
            return Action::search(static_cast<int>(get_number(j, "k")));
        case ActionType::optimize:
            return Action::optimize(get_string(j, "candidate_id"),
                                    static_cast<int>(get_number(j, "max_iters")));
        case ActionType::rerank: {
            auto it = j.find("use_hard_case");
            if (it == j.end() || !it->is_boolean())
                fail(errc::malformed_document, "ReRank needs boolean use_hard_case");
            return Action::rerank(it->get<bool>());
        }
        case ActionType::stop:
            return Action::stop();
    }
    fail(errc::malformed_document, "unknown action type");
}

inline json observation_to_json(const Observation& o) {
    return json{{"pool_size", o.candidate_summary.pool_size},
                {"best_score", o.candidate_summary.best_score},
                {"delta_score", o.candidate_summary.delta_score},
                {"duplicate_groups", o.equivalence.duplicate_groups},
                {"best_sim", o.alignment.best_sim},
                {"mean_top3_sim", o.alignment.mean_top3_sim}};
}

inline Observation observation_from_json(const json& j) {
    if (!j.is_object()) fail(errc::malformed_document, "observation must be an object");
    Observation o;
    o.candidate_summary.pool_size =
        static_cast<std::size_t>(get_number(j, "pool_size"));
    o.candidate_summary.best_score = get_number(j, "best_score");
    o.candidate_summary.delta_score = get_number(j, "delta_score");
    o.equivalence.duplicate_groups =
        static_cast<std::size_t>(get_number(j, "duplicate_groups"));
    o.alignment.best_sim = get_number(j, "best_sim");
    o.alignment.mean_top3_sim = get_number(j, "mean_top3_sim");
    return o;
}

inline bool get_bool(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_boolean())
        fail(errc::malformed_document, std::string("missing boolean field '") + key + "'");
    return it->get<bool>();
}

}  // namespace detail

inline std::string serialize_trajectory_json(const Trajectory& traj) {
    json steps = json::array();
    for (const auto& s : traj.steps) {
        steps.push_back(json{
            {"state_digest", s.state_digest},
            {"action", detail::action_to_json(s.action)},
            {"events",
             json{{"valid", s.events.valid},
                  {"succeeded", s.events.succeeded},
                  {"failed", s.events.failed}}},
            {"observation", detail::observation_to_json(s.observation)},
            {"reward", json{{"r_fmt", s.reward.r_fmt},
                            {"r_eff", s.reward.r_eff},
                            {"r_tool", s.reward.r_tool},
                            {"r_align", s.reward.r_align},
                            {"r_total", s.reward.r_total}}}});
    }
    json doc{{"schema_version", schema_version},
             {"kind", "trajectory"},
             {"terminated_by", termination_name(traj.terminated_by)},
             {"total_return", traj.total_return},
             {"final_prediction", traj.final_prediction},
             {"steps", steps}};
    if (!traj.truth_id.empty()) doc["truth_id"] = traj.truth_id;
    return doc.dump(2);
}

inline Trajectory parse_trajectory_json(const std::string& text) {
    json doc = detail::parse_json_text(text);
    detail::check_schema_version(doc, "trajectory");
    Trajectory traj;
    std::string term = detail::get_string(doc, "terminated_by");
    if (term == "Stop")
        traj.terminated_by = TerminationReason::stop;
    else if (term == "BudgetExhausted")
        traj.terminated_by = TerminationReason::budget_exhausted;
    else
        fail(errc::malformed_document, "unknown terminated_by '" + term + "'");
    traj.total_return = detail::get_number(doc, "total_return");
    auto truth = doc.find("truth_id");
    if (truth != doc.end()) {
        if (!truth->is_string()) fail(errc::malformed_document, "truth_id must be a string");
        traj.truth_id = truth->get<std::string>();
    }
    auto fp = doc.find("final_prediction");
    if (fp == doc.end() || !fp->is_array())
        fail(errc::malformed_document, "final_prediction must be an array");
    for (const auto& id : *fp) {
        if (!id.is_string())
            fail(errc::malformed_document, "final_prediction entries must be strings");
        traj.final_prediction.push_back(id.get<std::string>());
    }
    auto steps = doc.find("steps");
    if (steps == doc.end() || !steps->is_array())
        fail(errc::malformed_document, "steps must be an array");
    for (const auto& js : *steps) {
        if (!js.is_object()) fail(errc::malformed_document, "step must be an object");
        TrajectoryStep s;
        s.state_digest = detail::get_string(js, "state_digest");
        auto ja = js.find("action");
        if (ja == js.end()) fail(errc::malformed_document, "step missing action");
        s.action = detail::action_from_json(*ja);
        auto je = js.find("events");
        if (je == js.end() || !je->is_object())
            fail(errc::malformed_document, "step missing events");
        s.events.valid = detail::get_bool(*je, "valid");
        s.events.succeeded = detail::get_bool(*je, "succeeded");
        s.events.failed = detail::get_bool(*je, "failed");
        auto jo = js.find("observation");
        if (jo == js.end()) fail(errc::malformed_document, "step missing observation");
        s.observation = detail::observation_from_json(*jo);
        auto jr = js.find("reward");
        if (jr == js.end() || !jr->is_object())
            fail(errc::malformed_document, "step missing reward");
        s.reward.r_fmt = detail::get_number(*jr, "r_fmt");
        s.reward.r_eff = detail::get_number(*jr, "r_eff");
        s.reward.r_tool = detail::get_number(*jr, "r_tool");
        s.reward.r_align = detail::get_number(*jr, "r_align");
        s.reward.r_total = detail::get_number(*jr, "r_total");
        traj.steps.push_back(std::move(s));
    }
    return traj;
}

}  // namespace nmrx
