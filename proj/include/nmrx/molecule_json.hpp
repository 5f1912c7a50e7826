#pragma once

#include <string>

#include "fid_json.hpp"
#include "molecule.hpp"

namespace nmrx {

namespace detail {

inline json bond_order_to_json(BondOrder o) {
    switch (o) {
        case BondOrder::single: return 1;
        case BondOrder::double_bond: return 2;
        case BondOrder::triple: return 3;
        case BondOrder::aromatic: return "aromatic";
    }
    return 1;
}

inline BondOrder bond_order_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "aromatic") return BondOrder::aromatic;
        fail(errc::malformed_document, "bond order string must be 'aromatic'");
    }
    if (j.is_number_integer()) {
        switch (j.get<int>()) {
            case 1: return BondOrder::single;
            case 2: return BondOrder::double_bond;
            case 3: return BondOrder::triple;
        }
    }
    fail(errc::malformed_document, "bond order must be 1, 2, 3, or 'aromatic'");
}

inline json graph_to_json(const MoleculeGraph& g) {
    json atoms = json::array();
    for (const auto& a : g.atoms)
        atoms.push_back({{"element", a.element},
                         {"attached_hydrogens", a.attached_hydrogens},
                         {"environment_class", a.environment_class}});
    json bonds = json::array();
    for (const auto& b : g.bonds)
        bonds.push_back({{"a", b.a}, {"b", b.b}, {"order", bond_order_to_json(b.order)}});
    json out{{"atoms", std::move(atoms)}, {"bonds", std::move(bonds)}};
    if (!g.dihedrals.empty()) {
        json dh = json::array();
        for (const auto& d : g.dihedrals)
            dh.push_back({{"path", {d.path[0], d.path[1], d.path[2], d.path[3]}},
                          {"theta_deg", d.theta_deg}});
        out["dihedrals"] = std::move(dh);
    }
    return out;
}

inline std::size_t get_index(const json& obj, const char* key) {
    double v = get_number(obj, key);
    if (v < 0 || v != std::floor(v))
        fail(errc::malformed_document, std::string(key) + " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
}

inline MoleculeGraph graph_from_json(const json& j) {
    if (!j.is_object()) fail(errc::malformed_document, "molecule graph must be an object");
    MoleculeGraph g;
    auto atoms = j.find("atoms");
    if (atoms == j.end() || !atoms->is_array())
        fail(errc::malformed_document, "molecule missing atoms array");
    for (const auto& a : *atoms) {
        if (!a.is_object()) fail(errc::malformed_document, "atom must be an object");
        Atom atom;
        atom.element = get_string(a, "element");
        double h = get_number(a, "attached_hydrogens");
        if (h < 0 || h != std::floor(h))
            fail(errc::malformed_document, "attached_hydrogens must be a nonnegative integer");
        atom.attached_hydrogens = static_cast<int>(h);
        atom.environment_class = get_string(a, "environment_class");
        g.atoms.push_back(std::move(atom));
    }
    auto bonds = j.find("bonds");
    if (bonds != j.end()) {
        if (!bonds->is_array()) fail(errc::malformed_document, "bonds must be an array");
        for (const auto& b : *bonds) {
            if (!b.is_object()) fail(errc::malformed_document, "bond must be an object");
            Bond bond;
            bond.a = get_index(b, "a");
            bond.b = get_index(b, "b");
            auto o = b.find("order");
            if (o == b.end()) fail(errc::malformed_document, "bond missing order");
            bond.order = bond_order_from_json(*o);
            g.bonds.push_back(bond);
        }
    }
    auto dh = j.find("dihedrals");
    if (dh != j.end()) {
        if (!dh->is_array()) fail(errc::malformed_document, "dihedrals must be an array");
        for (const auto& d : *dh) {
            if (!d.is_object()) fail(errc::malformed_document, "dihedral must be an object");
            Dihedral di;
            auto p = d.find("path");
            if (p == d.end() || !p->is_array() || p->size() != 4)
                fail(errc::malformed_document, "dihedral path must have 4 atom indices");
            for (std::size_t k = 0; k < 4; ++k) {
                const auto& e = (*p)[k];
                if (!e.is_number_integer() || e.get<long>() < 0)
                    fail(errc::malformed_document, "dihedral path entries must be indices");
                di.path[k] = e.get<std::size_t>();
            }
            di.theta_deg = get_number(d, "theta_deg");
            g.dihedrals.push_back(di);
        }
    }
    g.validate();
    return g;
}

}  // namespace detail

inline std::string serialize_candidate_json(const CandidateStructure& c) {
    json doc{{"schema_version", schema_version},
             {"kind", "candidate"},
             {"id", c.id},
             {"provenance", provenance_name(c.provenance)},
             {"graph", detail::graph_to_json(c.graph)}};
    return doc.dump(2);
}

// Reads a candidate document; sites are left empty for the caller to
// predict against its shift tables.
inline CandidateStructure parse_candidate_json(const std::string& text) {
    json doc = detail::parse_json_text(text);
    detail::check_schema_version(doc, "candidate");
    CandidateStructure c;
    c.id = detail::get_string(doc, "id");
    if (c.id.empty()) fail(errc::malformed_document, "candidate id must be non-empty");
    c.provenance = doc.contains("provenance")
                       ? provenance_from_string(detail::get_string(doc, "provenance"))
                       : Provenance::input;
    auto g = doc.find("graph");
    if (g == doc.end()) fail(errc::malformed_document, "candidate missing graph");
    c.graph = detail::graph_from_json(*g);
    return c;
}

/**
 * Shift table file: a JSON object mapping environment classes to
 * {base_ppm, increments}, plus the reserved numeric key "default_j_hz"
 * for couplings that have no dihedral information.
 */
inline ShiftTable parse_shift_table_json(const std::string& text) {
    json doc = detail::parse_json_text(text);
    if (!doc.is_object()) fail(errc::malformed_document, "shift table must be a JSON object");
    ShiftTable table;
    for (const auto& [key, value] : doc.items()) {
        if (key == "default_j_hz") {
            if (!value.is_number())
                fail(errc::malformed_document, "default_j_hz must be a number");
            table.default_j_hz = value.get<double>();
            continue;
        }
        if (!value.is_object())
            fail(errc::malformed_document, "shift table entry '" + key + "' must be an object");
        ShiftEntry entry;
        entry.base_ppm = detail::get_number(value, "base_ppm");
        if (value.contains("element")) entry.element = detail::get_string(value, "element");
        auto inc = value.find("increments");
        if (inc != value.end()) {
            if (!inc->is_object())
                fail(errc::malformed_document, "increments must be an object");
            for (const auto& [nk, nv] : inc->items()) {
                if (!nv.is_number())
                    fail(errc::malformed_document, "increment for '" + nk + "' must be a number");
                entry.increments[nk] = nv.get<double>();
            }
        }
        table.classes[key] = std::move(entry);
    }
    return table;
}

inline std::string serialize_shift_table_json(const ShiftTable& table) {
    json doc = json::object();
    doc["default_j_hz"] = table.default_j_hz;
    for (const auto& [cls, entry] : table.classes) {
        json e{{"base_ppm", entry.base_ppm}};
        if (!entry.element.empty()) e["element"] = entry.element;
        if (!entry.increments.empty()) {
            json inc = json::object();
            for (const auto& [k, v] : entry.increments) inc[k] = v;
            e["increments"] = std::move(inc);
        }
        doc[cls] = std::move(e);
    }
    return doc.dump(2);
}

}  // namespace nmrx
