#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "fid.hpp"
#include "multiplet.hpp"

namespace nmrx {

enum class BondOrder { single, double_bond, triple, aromatic };

// Contribution to valence accounting (aromatic counts as 1.5).
inline double bond_order_value(BondOrder o) {
    switch (o) {
        case BondOrder::single: return 1.0;
        case BondOrder::double_bond: return 2.0;
        case BondOrder::triple: return 3.0;
        case BondOrder::aromatic: return 1.5;
    }
    return 1.0;
}

inline int bond_order_rank(BondOrder o) { return static_cast<int>(o); }

struct Atom {
    std::string element;
    int attached_hydrogens = 0;
    std::string environment_class;
};

struct Bond {
    std::size_t a = 0;
    std::size_t b = 0;
    BondOrder order = BondOrder::single;
};

// Dihedral angle along a 4-atom coupling pathway; the middle two atoms
// identify the bond whose proton-proton coupling it parameterizes.
struct Dihedral {
    std::array<std::size_t, 4> path{};
    double theta_deg = 0.0;
};

struct MoleculeGraph {
    std::vector<Atom> atoms;
    std::vector<Bond> bonds;
    std::vector<Dihedral> dihedrals;

    std::vector<std::vector<std::pair<std::size_t, BondOrder>>> adjacency() const {
        std::vector<std::vector<std::pair<std::size_t, BondOrder>>> adj(atoms.size());
        for (const auto& b : bonds) {
            adj[b.a].push_back({b.b, b.order});
            adj[b.b].push_back({b.a, b.order});
        }
        return adj;
    }

    void validate() const {
        require(!atoms.empty(), errc::invariant_violation, "molecule has no atoms");
        for (const auto& a : atoms) {
            require(!a.element.empty(), errc::invariant_violation, "atom element empty");
            require(a.attached_hydrogens >= 0, errc::invariant_violation,
                    "attached_hydrogens must be nonnegative");
        }
        for (const auto& b : bonds) {
            require(b.a < atoms.size() && b.b < atoms.size(), errc::invariant_violation,
                    "bond endpoint out of range");
            require(b.a != b.b, errc::invariant_violation, "self-bond not allowed");
        }
        for (const auto& d : dihedrals) {
            for (std::size_t idx : d.path)
                require(idx < atoms.size(), errc::invariant_violation,
                        "dihedral atom out of range");
            require(std::isfinite(d.theta_deg), errc::invariant_violation,
                    "dihedral angle must be finite");
        }
        // connectivity check (multi-fragment inputs rejected)
        std::vector<char> seen(atoms.size(), 0);
        auto adj = adjacency();
        std::queue<std::size_t> q;
        q.push(0);
        seen[0] = 1;
        std::size_t count = 1;
        while (!q.empty()) {
            std::size_t v = q.front();
            q.pop();
            for (const auto& [u, o] : adj[v]) {
                (void)o;
                if (!seen[u]) {
                    seen[u] = 1;
                    ++count;
                    q.push(u);
                }
            }
        }
        require(count == atoms.size(), errc::disconnected,
                "molecule graph is disconnected (" + std::to_string(count) + " of " +
                    std::to_string(atoms.size()) + " atoms reachable)");
    }
};

/**
 * Iterative neighborhood color refinement. Initial color = (element,
 * attached hydrogens, degree); each round folds in the sorted multiset of
 * (bond order, neighbor color). Colors are rank-assigned from sorted
 * signatures, so the result depends only on the graph, not on memory
 * layout or hash seeds. Stabilizes in at most |atoms| rounds because the
 * partition can only refine.
 */
inline std::vector<int> refine_colors(const MoleculeGraph& g) {
    g.validate();
    const std::size_t n = g.atoms.size();
    auto adj = g.adjacency();

    std::vector<int> color(n);
    {
        std::vector<std::tuple<std::string, int, std::size_t>> keys(n);
        for (std::size_t i = 0; i < n; ++i)
            keys[i] = {g.atoms[i].element, g.atoms[i].attached_hydrogens, adj[i].size()};
        auto sorted = keys;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        for (std::size_t i = 0; i < n; ++i)
            color[i] = static_cast<int>(
                std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
    }

    std::size_t distinct = static_cast<std::size_t>(
        *std::max_element(color.begin(), color.end())) + 1;
    for (std::size_t round = 0; round < n; ++round) {
        using Sig = std::pair<int, std::vector<std::pair<int, int>>>;
        std::vector<Sig> sig(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::pair<int, int>> nb;
            nb.reserve(adj[i].size());
            for (const auto& [u, o] : adj[i]) nb.push_back({bond_order_rank(o), color[u]});
            std::sort(nb.begin(), nb.end());
            sig[i] = {color[i], std::move(nb)};
        }
        auto sorted = sig;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        if (sorted.size() == distinct) break;  // partition stable
        distinct = sorted.size();
        for (std::size_t i = 0; i < n; ++i)
            color[i] = static_cast<int>(
                std::lower_bound(sorted.begin(), sorted.end(), sig[i]) - sorted.begin());
    }
    return color;
}

struct SiteGroup {
    std::vector<std::size_t> atom_indices;  // ascending
    Nucleus nucleus = Nucleus::H1;
    double predicted_shift_ppm = 0.0;
    int proton_count = 0;
    Pattern expected_multiplicity = Pattern::s;
    std::vector<double> predicted_j_hz;  // descending
};

/**
 * Symmetry-equivalent site groups for one nucleus: proton-bearing atoms of
 * any element for 1H (so NH and OH count), carbons for 13C. Groups are
 * ordered by their lowest atom index. Shifts and couplings are filled in
 * by predict_site_groups.
 */
inline std::vector<SiteGroup> equivalence_groups(const MoleculeGraph& g, Nucleus nucleus) {
    auto color = refine_colors(g);
    std::map<int, SiteGroup> by_color;
    for (std::size_t i = 0; i < g.atoms.size(); ++i) {
        bool relevant = nucleus == Nucleus::H1 ? g.atoms[i].attached_hydrogens > 0
                                               : g.atoms[i].element == "C";
        if (!relevant) continue;
        SiteGroup& grp = by_color[color[i]];
        grp.nucleus = nucleus;
        grp.atom_indices.push_back(i);
        grp.proton_count += g.atoms[i].attached_hydrogens;
    }
    std::vector<SiteGroup> out;
    out.reserve(by_color.size());
    for (auto& [c, grp] : by_color) {
        (void)c;
        out.push_back(std::move(grp));
    }
    std::sort(out.begin(), out.end(), [](const SiteGroup& a, const SiteGroup& b) {
        return a.atom_indices.front() < b.atom_indices.front();
    });
    return out;
}

/**
 * Additive shift model: every environment class has a base shift plus
 * optional per-neighbor-class increments. The data file is a JSON object
 * {class: {base_ppm, increments: {neighbor_class: delta_ppm}}} with an
 * optional reserved "default_j_hz" number.
 */
struct ShiftEntry {
    double base_ppm = 0.0;
    std::map<std::string, double> increments;
    std::string element;  // which element may carry this class; empty = any
};

struct ShiftTable {
    std::map<std::string, ShiftEntry> classes;
    double default_j_hz = 7.0;
};

inline double karplus_j(double theta_deg, double a = 7.0, double b = -1.0, double c = 5.0) {
    require(std::isfinite(theta_deg) && std::isfinite(a) && std::isfinite(b) && std::isfinite(c),
            errc::invariant_violation, "karplus inputs must be finite");
    const double ct = std::cos(theta_deg * M_PI / 180.0);
    return a * ct * ct + b * ct + c;
}

namespace detail {

inline double atom_shift(const MoleculeGraph& g,
                         const std::vector<std::vector<std::pair<std::size_t, BondOrder>>>& adj,
                         std::size_t i, const ShiftTable& table) {
    const auto it = table.classes.find(g.atoms[i].environment_class);
    require(it != table.classes.end(), errc::unknown_environment_class,
            "no table entry for: " + g.atoms[i].environment_class);
    double s = it->second.base_ppm;
    for (const auto& [u, o] : adj[i]) {
        (void)o;
        auto inc = it->second.increments.find(g.atoms[u].environment_class);
        if (inc != it->second.increments.end()) s += inc->second;
    }
    return s;
}

// Karplus-based J for the bond (a,b) when a dihedral names that bond as
// its middle pair, otherwise the table default.
inline double coupling_j(const MoleculeGraph& g, std::size_t a, std::size_t b,
                         const ShiftTable& table) {
    for (const auto& d : g.dihedrals) {
        if ((d.path[1] == a && d.path[2] == b) || (d.path[1] == b && d.path[2] == a))
            return karplus_j(d.theta_deg);
    }
    return table.default_j_hz;
}

}  // namespace detail

/**
 * Equivalence groups with shifts and first-order couplings filled in.
 * Shift = additive model on any group member (members agree by symmetry
 * of their environment classes). 1H multiplicity follows the n+1 rule
 * over protons on bonded atoms outside the group's color; carbons are
 * reported as proton-decoupled singlets.
 */
inline std::vector<SiteGroup> predict_site_groups(const MoleculeGraph& g, const ShiftTable& table,
                                                  Nucleus nucleus) {
    auto groups = equivalence_groups(g, nucleus);
    auto color = refine_colors(g);
    auto adj = g.adjacency();

    std::set<std::string> missing;
    for (const auto& grp : groups) {
        const std::string& cls = g.atoms[grp.atom_indices.front()].environment_class;
        if (!table.classes.count(cls)) missing.insert(cls);
    }
    if (!missing.empty()) {
        std::string keys;
        for (const auto& k : missing) keys += (keys.empty() ? "" : ", ") + k;
        fail(errc::unknown_environment_class, "no table entry for: " + keys);
    }

    for (auto& grp : groups) {
        const std::size_t rep = grp.atom_indices.front();
        grp.predicted_shift_ppm = detail::atom_shift(g, adj, rep, table);
        if (nucleus == Nucleus::C13) {
            grp.expected_multiplicity = Pattern::s;
            continue;
        }
        int n_coupled = 0;
        std::vector<double> js;
        for (const auto& [u, o] : adj[rep]) {
            (void)o;
            if (color[u] == color[rep] || g.atoms[u].attached_hydrogens == 0) continue;
            n_coupled += g.atoms[u].attached_hydrogens;
            js.push_back(detail::coupling_j(g, rep, u, table));
        }
        switch (n_coupled) {
            case 0: grp.expected_multiplicity = Pattern::s; break;
            case 1: grp.expected_multiplicity = Pattern::d; break;
            case 2: grp.expected_multiplicity = Pattern::t; break;
            case 3: grp.expected_multiplicity = Pattern::q; break;
            default: grp.expected_multiplicity = Pattern::m; break;
        }
        if (grp.expected_multiplicity == Pattern::s) {
            grp.predicted_j_hz.clear();
        } else if (grp.expected_multiplicity == Pattern::m) {
            std::sort(js.begin(), js.end(), std::greater<>());
            grp.predicted_j_hz = std::move(js);
        } else {
            // a single coupling constant describes d/t/q; partners with
            // slightly different Karplus values are averaged
            double sum = 0.0;
            for (double j : js) sum += j;
            grp.predicted_j_hz = {sum / static_cast<double>(js.size())};
        }
    }
    return groups;
}

enum class Provenance { generated, searched, repaired, input };

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::generated: return "generated";
        case Provenance::searched: return "searched";
        case Provenance::repaired: return "repaired";
        case Provenance::input: return "input";
    }
    return "input";
}

inline Provenance provenance_from_string(const std::string& s) {
    if (s == "generated") return Provenance::generated;
    if (s == "searched") return Provenance::searched;
    if (s == "repaired") return Provenance::repaired;
    if (s == "input") return Provenance::input;
    fail(errc::malformed_document, "unknown provenance '" + s + "'");
}

struct CandidateStructure {
    std::string id;
    MoleculeGraph graph;
    std::vector<SiteGroup> h_sites;
    std::vector<SiteGroup> c_sites;
    Provenance provenance = Provenance::input;
};

// Predicts both nuclei's site groups in place.
inline void populate_sites(CandidateStructure& cand, const ShiftTable& h_table,
                           const ShiftTable& c_table) {
    cand.h_sites = predict_site_groups(cand.graph, h_table, Nucleus::H1);
    cand.c_sites = predict_site_groups(cand.graph, c_table, Nucleus::C13);
}

}  // namespace nmrx
