#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "molecule.hpp"
#include "signals.hpp"

namespace nmrx {

struct EditSet {
    bool class_swap = true;    // change an atom's environment class within its element
    bool bond_toggle = true;   // flip a bond between single and double where valence allows
    bool methyl = true;        // attach or remove a terminal methyl at an open valence
    std::string methyl_class = "CH3_alkyl";
};

struct RepairConfig {
    EditSet edits;
    double tol_ppm_h = 0.05;
    double tol_ppm_c = 1.0;
    int max_iters = 10;
};

struct RepairResult {
    CandidateStructure candidate;
    std::vector<double> reward_trace;  // strictly increasing after the first element
    std::vector<std::string> applied_edits;
};

namespace detail {

inline double max_valence(const std::string& element) {
    static const std::map<std::string, double> table = {
        {"C", 4.0}, {"N", 3.0}, {"O", 2.0}, {"S", 2.0}, {"P", 3.0},
        {"F", 1.0}, {"Cl", 1.0}, {"Br", 1.0}, {"I", 1.0}, {"H", 1.0}};
    auto it = table.find(element);
    return it != table.end() ? it->second : 4.0;
}

inline double used_valence(const MoleculeGraph& g, std::size_t i) {
    double v = g.atoms[i].attached_hydrogens;
    for (const auto& b : g.bonds)
        if (b.a == i || b.b == i) v += bond_order_value(b.order);
    return v;
}

inline double valence_slack(const MoleculeGraph& g, std::size_t i) {
    return max_valence(g.atoms[i].element) - used_valence(g, i);
}

struct Edit {
    std::string descriptor;  // lexicographic tie-break key
    MoleculeGraph graph;
};

/**
 * All legal single edits of the grammar, each tagged with a descriptor
 * like "class:2:CH2_ether", "bond:1-4:2", "methyl+:3", "methyl-:5".
 * Descriptors double as the deterministic tie-break order.
 */
inline std::vector<Edit> enumerate_edits(const MoleculeGraph& g, const ShiftTable& table,
                                         const EditSet& edits) {
    std::vector<Edit> out;
    if (edits.class_swap) {
        for (std::size_t i = 0; i < g.atoms.size(); ++i) {
            for (const auto& [cls, entry] : table.classes) {
                if (entry.element != g.atoms[i].element) continue;
                if (cls == g.atoms[i].environment_class) continue;
                Edit e{"class:" + std::to_string(i) + ":" + cls, g};
                e.graph.atoms[i].environment_class = cls;
                out.push_back(std::move(e));
            }
        }
    }
    if (edits.bond_toggle) {
        for (std::size_t bi = 0; bi < g.bonds.size(); ++bi) {
            const Bond& b = g.bonds[bi];
            if (b.order == BondOrder::single) {
                if (valence_slack(g, b.a) >= 1.0 && valence_slack(g, b.b) >= 1.0) {
                    Edit e{"bond:" + std::to_string(b.a) + "-" + std::to_string(b.b) + ":2", g};
                    e.graph.bonds[bi].order = BondOrder::double_bond;
                    out.push_back(std::move(e));
                }
            } else if (b.order == BondOrder::double_bond) {
                Edit e{"bond:" + std::to_string(b.a) + "-" + std::to_string(b.b) + ":1", g};
                e.graph.bonds[bi].order = BondOrder::single;
                out.push_back(std::move(e));
            }
        }
    }
    if (edits.methyl && table.classes.count(edits.methyl_class)) {
        for (std::size_t i = 0; i < g.atoms.size(); ++i) {
            if (valence_slack(g, i) < 1.0) continue;
            Edit e{"methyl+:" + std::to_string(i), g};
            e.graph.atoms.push_back({"C", 3, edits.methyl_class});
            e.graph.bonds.push_back({i, g.atoms.size(), BondOrder::single});
            out.push_back(std::move(e));
        }
        for (std::size_t i = 0; i < g.atoms.size() && g.atoms.size() > 1; ++i) {
            const Atom& a = g.atoms[i];
            std::size_t degree = 0;
            bool single_only = true;
            for (const auto& b : g.bonds)
                if (b.a == i || b.b == i) {
                    ++degree;
                    single_only = single_only && b.order == BondOrder::single;
                }
            if (a.element != "C" || a.attached_hydrogens != 3 || degree != 1 || !single_only)
                continue;
            Edit e{"methyl-:" + std::to_string(i), MoleculeGraph{}};
            for (std::size_t k = 0; k < g.atoms.size(); ++k)
                if (k != i) e.graph.atoms.push_back(g.atoms[k]);
            for (const auto& b : g.bonds) {
                if (b.a == i || b.b == i) continue;
                Bond nb = b;
                if (nb.a > i) --nb.a;
                if (nb.b > i) --nb.b;
                e.graph.bonds.push_back(nb);
            }
            for (const auto& d : g.dihedrals) {
                bool hit = false;
                Dihedral nd = d;
                for (auto& idx : nd.path) {
                    if (idx == i) hit = true;
                    if (idx > i) --idx;
                }
                if (!hit) e.graph.dihedrals.push_back(nd);
            }
            out.push_back(std::move(e));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Edit& a, const Edit& b) { return a.descriptor < b.descriptor; });
    return out;
}

inline double repair_reward(const CandidateStructure& cand, const Spectra& target,
                            const RepairConfig& cfg) {
    double acc = 0.0;
    int terms = 0;
    if (target.h) {
        acc += peak_set_similarity(simulate_spectrum(cand, Nucleus::H1), *target.h,
                                   cfg.tol_ppm_h);
        ++terms;
    }
    if (target.c) {
        acc += peak_set_similarity(simulate_spectrum(cand, Nucleus::C13), *target.c,
                                   cfg.tol_ppm_c);
        ++terms;
    }
    return terms > 0 ? acc / terms : 0.0;
}

}  // namespace detail

/**
 * Greedy best-improvement hill climbing over the edit grammar. Each
 * iteration tries every legal single edit, resimulates, and applies the
 * edit with the best strictly larger similarity to the target (ties go to
 * the lexicographically smallest descriptor); stops at a local optimum or
 * after max_iters. The reward trace therefore increases strictly after
 * its first element.
 */
inline RepairResult repair_local_search(const CandidateStructure& candidate,
                                        const Spectra& target, const ShiftTable& h_table,
                                        const ShiftTable& c_table, const RepairConfig& cfg = {}) {
    require(!target.empty(), errc::invariant_violation, "repair target has no signal sets");
    require(cfg.edits.class_swap || cfg.edits.bond_toggle || cfg.edits.methyl,
            errc::no_legal_edits, "edit set is empty");

    RepairResult res;
    res.candidate = candidate;
    if (res.candidate.h_sites.empty() || res.candidate.c_sites.empty())
        populate_sites(res.candidate, h_table, c_table);
    // class-swap edits draw from the union of both tables' classes;
    // prediction still uses the per-nucleus tables unchanged
    ShiftTable edit_classes = h_table;
    for (const auto& [cls, entry] : c_table.classes)
        if (!edit_classes.classes.count(cls)) edit_classes.classes[cls] = entry;

    double reward = detail::repair_reward(res.candidate, target, cfg);
    res.reward_trace.push_back(reward);

    auto first_edits = detail::enumerate_edits(res.candidate.graph, edit_classes, cfg.edits);
    require(!first_edits.empty(), errc::no_legal_edits,
            "candidate '" + candidate.id + "' admits no legal edits");

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        auto edits = iter == 0 ? std::move(first_edits)
                               : detail::enumerate_edits(res.candidate.graph, edit_classes,
                                                         cfg.edits);
        double best_reward = reward;
        const detail::Edit* best = nullptr;
        CandidateStructure best_cand;
        for (const auto& e : edits) {
            CandidateStructure trial;
            trial.id = res.candidate.id;
            trial.provenance = Provenance::repaired;
            trial.graph = e.graph;
            double r;
            try {
                populate_sites(trial, h_table, c_table);
                r = detail::repair_reward(trial, target, cfg);
            } catch (const Error&) {
                continue;  // edit produced an unpredictable structure; skip it
            }
            if (r > best_reward) {  // edits are pre-sorted, so first win is the tie-break
                best_reward = r;
                best = &e;
                best_cand = std::move(trial);
            }
        }
        if (!best) break;
        res.candidate = std::move(best_cand);
        res.applied_edits.push_back(best->descriptor);
        reward = best_reward;
        res.reward_trace.push_back(reward);
    }
    res.candidate.provenance = Provenance::repaired;
    return res;
}

}  // namespace nmrx
