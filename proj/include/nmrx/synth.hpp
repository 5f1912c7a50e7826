#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "database.hpp"
#include "fid.hpp"
#include "molecule.hpp"
#include "multiplet.hpp"
#include "phase.hpp"
#include "transform.hpp"

/**
 * Deterministic fixture generation: shift tables for a small closed world of
 * environment classes, seeded FID and spectrum synthesizers whose outputs the
 * processing chain should recover exactly, and a 100-molecule catalog used as
 * the planted retrieval universe. Everything here is reproducible from a seed;
 * nothing reads the clock or global state.
 */
namespace nmrx::synth {

// ---------------------------------------------------------------------------
// Shift tables
// ---------------------------------------------------------------------------

/**
 * 1H additive model over the catalog's environment classes. Base values sit
 * near textbook ranges; increments are keyed by the class of a bonded
 * neighbor (benzylic, alpha-to-carbonyl, and similar effects). The numbers
 * are a self-consistent toy parameterization, not a fitted model: prediction
 * and synthesis share them, which is all the round-trip tests require.
 */
inline ShiftTable reference_h1_table() {
    ShiftTable t;
    t.default_j_hz = 7.0;
    auto& c = t.classes;
    c["CH3_alkyl"] = {0.90,
                      {{"C_aromatic", 1.40},
                       {"CH2_O", 0.35},
                       {"CH2_alkyl", 0.15},
                       {"CH_alkyl", 0.10}},
                      "C"};
    c["CH2_alkyl"] = {1.30,
                      {{"C_aromatic", 1.35},
                       {"C_carbonyl_ester", 1.05},
                       {"C_carbonyl_ketone", 1.15},
                       {"CH2_O", 0.30},
                       {"CH_aldehyde", 1.10}},
                      "C"};
    c["CH_alkyl"] = {1.70,
                     {{"C_aromatic", 1.15},
                      {"C_carbonyl_ester", 0.75},
                      {"C_carbonyl_ketone", 0.85}},
                     "C"};
    c["CH3_ketone"] = {2.10, {}, "C"};
    c["CH3_ester_O"] = {3.70, {}, "C"};
    c["CH2_O"] = {4.15, {}, "C"};
    c["CH_O"] = {4.90, {}, "C"};
    c["CH_aromatic"] = {7.30,
                        {{"C_aromatic", -0.10},
                         {"C_OMe_aromatic", -0.45},
                         {"C_acyl_aromatic", 0.55}},
                        "C"};
    c["CH_aldehyde"] = {9.80, {}, "C"};
    return t;
}

// 13C counterpart; every carbon-borne class must appear here because all
// carbons are 13C sites, protonated or not.
inline ShiftTable reference_c13_table() {
    ShiftTable t;
    t.default_j_hz = 7.0;
    auto& c = t.classes;
    c["CH3_alkyl"] = {14.1, {{"C_aromatic", 7.2}}, "C"};
    c["CH2_alkyl"] = {23.0,
                      {{"C_aromatic", 5.5},
                       {"C_carbonyl_ester", 4.1},
                       {"C_carbonyl_ketone", 5.9}},
                      "C"};
    c["CH_alkyl"] = {27.9, {}, "C"};
    c["CH3_ketone"] = {29.2, {}, "C"};
    c["CH3_ester_O"] = {51.8, {}, "C"};
    c["CH2_O"] = {60.4, {}, "C"};
    c["CH_O"] = {67.8, {}, "C"};
    c["CH_aromatic"] = {128.4, {}, "C"};
    c["C_aromatic"] = {137.6, {}, "C"};
    c["C_OMe_aromatic"] = {158.9, {}, "C"};
    c["C_acyl_aromatic"] = {137.0, {}, "C"};
    c["C_quaternary"] = {31.7, {}, "C"};
    c["CH_aldehyde"] = {196.0, {}, "C"};
    c["C_carbonyl_ester"] = {171.2, {}, "C"};
    c["C_carbonyl_ketone"] = {207.0, {}, "C"};
    return t;
}

// ---------------------------------------------------------------------------
// Acquisition presets
// ---------------------------------------------------------------------------

// 400 MHz proton acquisition, 10 ppm window centred at 5 ppm.
inline AcquisitionParams acquisition_h1() {
    AcquisitionParams p;
    p.spectrometer_frequency_mhz = 400.0;
    p.sweep_width_hz = 4000.0;
    p.num_points = 2048;
    p.nucleus = Nucleus::H1;
    p.solvent = "CDCl3";
    p.reference_offset_ppm = 5.0;
    return p;
}

// 100.6 MHz carbon acquisition, 220 ppm window centred at 100 ppm. The longer
// FID keeps the sharper carbon lines fully decayed before truncation.
inline AcquisitionParams acquisition_c13() {
    AcquisitionParams p;
    p.spectrometer_frequency_mhz = 100.6;
    p.sweep_width_hz = 22132.0;
    p.num_points = 8192;
    p.nucleus = Nucleus::C13;
    p.solvent = "CDCl3";
    p.reference_offset_ppm = 100.0;
    return p;
}

// ---------------------------------------------------------------------------
// Time-domain synthesis
// ---------------------------------------------------------------------------

struct FidSynthOptions {
    double fwhm_hz = 2.5;              // natural linewidth of every line
    double amplitude_per_proton = 100.0;
    double noise_sigma = 2.0;          // per quadrature, per sample
};

/**
 * Sums decaying complex exponentials plus white noise. Line positions are
 * offsets from the carrier in Hz, so a line at +f lands at
 * reference_offset_ppm + f/sf on the transformed axis.
 */
inline Fid synth_fid(const AcquisitionParams& params, const std::vector<WeightedLine>& lines,
                     const FidSynthOptions& opt, std::uint64_t seed) {
    params.validate();
    require(opt.fwhm_hz > 0.0 && opt.noise_sigma >= 0.0 && opt.amplitude_per_proton > 0.0,
            errc::invariant_violation, "FID synthesis options out of range");
    Fid fid;
    fid.params = params;
    fid.real.assign(params.num_points, 0.0);
    fid.imag.assign(params.num_points, 0.0);
    const double decay = M_PI * opt.fwhm_hz;
    for (std::size_t k = 0; k < params.num_points; ++k) {
        const double t = static_cast<double>(k) / params.sweep_width_hz;
        const double damp = std::exp(-decay * t);
        for (const auto& ln : lines) {
            const double phase = 2.0 * M_PI * ln.pos_hz * t;
            const double a = opt.amplitude_per_proton * ln.weight * damp;
            fid.real[k] += a * std::cos(phase);
            fid.imag[k] += a * std::sin(phase);
        }
    }
    if (opt.noise_sigma > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, opt.noise_sigma);
        for (std::size_t k = 0; k < params.num_points; ++k) {
            fid.real[k] += noise(rng);
            fid.imag[k] += noise(rng);
        }
    }
    return fid;
}

/**
 * First-order line list for a whole molecule: each equivalence group
 * contributes its splitting tree, built by convolving one doublet-of-order-n
 * per coupled neighbor atom. Unlike the d/t/q/m label on the site, the tree
 * keeps every coupling, so unresolved sites come out as their true dense
 * clusters rather than as singlets. Weights sum to the proton count (1H) or
 * the carbon count (13C, decoupled singlets).
 */
inline std::vector<WeightedLine> predicted_lines(const MoleculeGraph& g, const ShiftTable& table,
                                                 Nucleus nucleus,
                                                 const AcquisitionParams& params) {
    auto groups = predict_site_groups(g, table, nucleus);
    auto color = refine_colors(g);
    auto adj = g.adjacency();
    const double sf = params.spectrometer_frequency_mhz;

    std::vector<WeightedLine> out;
    for (const auto& grp : groups) {
        const double center_hz =
            (grp.predicted_shift_ppm - params.reference_offset_ppm) * sf;
        std::vector<WeightedLine> tree{{0.0, 1.0}};
        if (nucleus == Nucleus::H1) {
            const std::size_t rep = grp.atom_indices.front();
            for (const auto& [u, order] : adj[rep]) {
                (void)order;
                if (color[u] == color[rep] || g.atoms[u].attached_hydrogens == 0) continue;
                tree = nmrx::detail::split_lines(tree, nmrx::detail::coupling_j(g, rep, u, table),
                                                 g.atoms[u].attached_hydrogens);
            }
            tree = nmrx::detail::merge_coincident(std::move(tree), 1e-9);
        }
        double total = 0.0;
        for (const auto& ln : tree) total += ln.weight;
        const double scale =
            (nucleus == Nucleus::H1 ? static_cast<double>(grp.proton_count)
                                    : static_cast<double>(grp.atom_indices.size())) /
            total;
        for (const auto& ln : tree) out.push_back({center_hz + ln.pos_hz, ln.weight * scale});
    }
    return out;
}

inline Fid synth_molecule_fid(const MoleculeGraph& g, const ShiftTable& table, Nucleus nucleus,
                              const FidSynthOptions& opt, std::uint64_t seed) {
    const AcquisitionParams params =
        nucleus == Nucleus::H1 ? acquisition_h1() : acquisition_c13();
    return synth_fid(params, predicted_lines(g, table, nucleus, params), opt, seed);
}

// ---------------------------------------------------------------------------
// Frequency-domain synthesis
// ---------------------------------------------------------------------------

struct LorentzianLine {
    double center_ppm = 0.0;
    double height = 1.0;
    double fwhm_hz = 2.0;
};

/**
 * Direct frequency-domain spectrum: absorptive Lorentzians in the real
 * channel, their dispersive partners in the imaginary one, plus white noise.
 * The axis matches fft_spectrum exactly (+sw/2 down to -sw/2 around the
 * carrier). The log is pre-stamped as phased and baseline-corrected so the
 * peak stages accept it directly.
 */
inline Spectrum synth_spectrum(AcquisitionParams params, std::size_t n_bins,
                               const std::vector<LorentzianLine>& lines, double noise_sigma,
                               std::uint64_t seed) {
    require(n_bins >= 2, errc::invariant_violation, "spectrum needs at least two bins");
    params.num_points = n_bins;
    params.validate();
    Spectrum sp;
    sp.params = params;
    sp.real.assign(n_bins, 0.0);
    sp.imag.assign(n_bins, 0.0);
    sp.ppm_axis.resize(n_bins);
    const double sf = params.spectrometer_frequency_mhz;
    const double hz_per_bin = params.sweep_width_hz / static_cast<double>(n_bins);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (std::size_t i = 0; i < n_bins; ++i) {
        const double freq_hz = params.sweep_width_hz / 2.0 - static_cast<double>(i) * hz_per_bin;
        sp.ppm_axis[i] = freq_hz / sf + params.reference_offset_ppm;
        for (const auto& ln : lines) {
            const double g = ln.fwhm_hz / 2.0;
            const double d = freq_hz - (ln.center_ppm - params.reference_offset_ppm) * sf;
            const double denom = d * d + g * g;
            sp.real[i] += ln.height * g * g / denom;
            sp.imag[i] -= ln.height * g * d / denom;
        }
        if (noise_sigma > 0.0) {
            sp.real[i] += noise(rng);
            sp.imag[i] += noise(rng);
        }
    }
    sp.processing_log = {"synthetic", "phase:synthetic", "baseline:synthetic"};
    return sp;
}

// ---------------------------------------------------------------------------
// Phase recovery fixtures
// ---------------------------------------------------------------------------

struct PhaseCase {
    Spectrum absorptive;    // ground truth, zero phase error
    PhaseParams distortion; // what was applied to produce `distorted`
    Spectrum distorted;
};

/**
 * A fully decayed multi-line FID (so the absorptive spectrum has no
 * truncation wiggles), transformed and then deliberately mis-phased.
 * Line centers are kept at least 80 Hz apart; decay rates of 10-25 1/s put
 * every line between roughly 3 and 8 Hz wide.
 *
 * Two placement rules keep the recovery problem well posed. Lines stay
 * inside the middle 60% of the sweep: dispersion tails decay only as
 * 1/offset, so a line parked near an edge wraps a noticeably asymmetric
 * tail through the rest of the spectrum, and that reads as a genuine
 * phase ramp no corrector should be asked to ignore. And the first two
 * lines are pinned to opposite outer thirds, so every case has enough
 * frequency spread to determine the first-order term.
 */
inline PhaseCase random_phase_case(std::mt19937_64& rng) {
    AcquisitionParams params = acquisition_h1();
    std::uniform_int_distribution<int> n_peaks(3, 6);
    std::uniform_real_distribution<double> low_third(-1200.0, -600.0);
    std::uniform_real_distribution<double> high_third(600.0, 1200.0);
    std::uniform_real_distribution<double> center(-1200.0, 1200.0);
    std::uniform_real_distribution<double> amp(250.0, 600.0);
    std::uniform_real_distribution<double> rate(10.0, 25.0);
    std::normal_distribution<double> noise(0.0, 0.5);

    const int n = n_peaks(rng);
    std::vector<double> freqs, amps, decays;
    freqs.push_back(low_third(rng));
    freqs.push_back(high_third(rng));
    while (freqs.size() < static_cast<std::size_t>(n)) {
        const double f = center(rng);
        bool clear = true;
        for (double other : freqs) clear = clear && std::abs(f - other) >= 80.0;
        if (clear) freqs.push_back(f);
    }
    for (int i = 0; i < n; ++i) {
        amps.push_back(amp(rng));
        decays.push_back(rate(rng));
    }

    Fid fid;
    fid.params = params;
    fid.real.assign(params.num_points, 0.0);
    fid.imag.assign(params.num_points, 0.0);
    for (std::size_t k = 0; k < params.num_points; ++k) {
        const double t = static_cast<double>(k) / params.sweep_width_hz;
        for (int i = 0; i < n; ++i) {
            const double a = amps[static_cast<std::size_t>(i)] *
                             std::exp(-decays[static_cast<std::size_t>(i)] * t);
            const double ph = 2.0 * M_PI * freqs[static_cast<std::size_t>(i)] * t;
            fid.real[k] += a * std::cos(ph);
            fid.imag[k] += a * std::sin(ph);
        }
        fid.real[k] += noise(rng);
        fid.imag[k] += noise(rng);
    }
    // Half weight on t=0 keeps the discrete transform free of the constant
    // vertical offset, so the reference truly is pure absorption over a
    // zero baseline.
    fid.real[0] *= 0.5;
    fid.imag[0] *= 0.5;

    PhaseCase out;
    out.absorptive = fft_spectrum(zero_fill(fid));
    std::uniform_real_distribution<double> phi0(-M_PI, M_PI);
    std::uniform_real_distribution<double> phi1(-2.0 * M_PI, 2.0 * M_PI);
    out.distortion = {phi0(rng), phi1(rng)};
    out.distorted = apply_phase(out.absorptive, out.distortion);
    return out;
}

// ---------------------------------------------------------------------------
// Planted molecule catalog
// ---------------------------------------------------------------------------

namespace detail {

struct GraphBuilder {
    MoleculeGraph g;

    std::size_t atom(const char* element, int hydrogens, const char* cls) {
        g.atoms.push_back({element, hydrogens, cls});
        return g.atoms.size() - 1;
    }
    void bond(std::size_t a, std::size_t b, BondOrder o = BondOrder::single) {
        g.bonds.push_back({a, b, o});
    }
};

enum class Chain { methyl, ethyl, propyl, isopropyl, butyl };

inline const char* chain_tag(Chain c) {
    switch (c) {
        case Chain::methyl: return "me";
        case Chain::ethyl: return "et";
        case Chain::propyl: return "pr";
        case Chain::isopropyl: return "ipr";
        case Chain::butyl: return "bu";
    }
    return "me";
}

/**
 * Grows an alkyl chain off `to`. head_class overrides the class of the atom
 * bonded to `to` (oxygen- and carbonyl-adjacent carbons live in different
 * classes); the rest of the chain uses the plain alkyl classes.
 */
inline void attach_chain(GraphBuilder& b, Chain c, std::size_t to,
                         const char* head_class = nullptr) {
    switch (c) {
        case Chain::methyl: {
            b.bond(to, b.atom("C", 3, head_class ? head_class : "CH3_alkyl"));
            break;
        }
        case Chain::ethyl: {
            std::size_t h = b.atom("C", 2, head_class ? head_class : "CH2_alkyl");
            b.bond(to, h);
            b.bond(h, b.atom("C", 3, "CH3_alkyl"));
            break;
        }
        case Chain::propyl: {
            std::size_t h = b.atom("C", 2, head_class ? head_class : "CH2_alkyl");
            std::size_t m = b.atom("C", 2, "CH2_alkyl");
            b.bond(to, h);
            b.bond(h, m);
            b.bond(m, b.atom("C", 3, "CH3_alkyl"));
            break;
        }
        case Chain::isopropyl: {
            std::size_t h = b.atom("C", 1, head_class ? head_class : "CH_alkyl");
            b.bond(to, h);
            b.bond(h, b.atom("C", 3, "CH3_alkyl"));
            b.bond(h, b.atom("C", 3, "CH3_alkyl"));
            break;
        }
        case Chain::butyl: {
            std::size_t h = b.atom("C", 2, head_class ? head_class : "CH2_alkyl");
            std::size_t m1 = b.atom("C", 2, "CH2_alkyl");
            std::size_t m2 = b.atom("C", 2, "CH2_alkyl");
            b.bond(to, h);
            b.bond(h, m1);
            b.bond(m1, m2);
            b.bond(m2, b.atom("C", 3, "CH3_alkyl"));
            break;
        }
    }
}

// Class of the chain head when it bonds directly to an ether/ester oxygen.
inline const char* oxygen_head_class(Chain c) {
    switch (c) {
        case Chain::methyl: return "CH3_ester_O";
        case Chain::isopropyl: return "CH_O";
        default: return "CH2_O";
    }
}

// Substituent vocabulary for the benzene series.
inline const std::vector<std::string>& ring_subs() {
    static const std::vector<std::string> s{"h", "me", "et", "ipr", "ome", "ac", "cho"};
    return s;
}

inline void attach_ring_substituent(GraphBuilder& b, const std::string& sub,
                                    std::size_t ring_atom) {
    Atom& ra = b.g.atoms[ring_atom];
    if (sub == "h") return;  // ring atom keeps its proton
    ra.attached_hydrogens = 0;
    if (sub == "me" || sub == "et" || sub == "ipr") {
        ra.environment_class = "C_aromatic";
        attach_chain(b, sub == "me" ? Chain::methyl : sub == "et" ? Chain::ethyl
                                                                  : Chain::isopropyl,
                     ring_atom);
    } else if (sub == "ome") {
        ra.environment_class = "C_OMe_aromatic";
        std::size_t o = b.atom("O", 0, "O_ether");
        b.bond(ring_atom, o);
        attach_chain(b, Chain::methyl, o, "CH3_ester_O");
    } else if (sub == "ac") {
        ra.environment_class = "C_acyl_aromatic";
        std::size_t co = b.atom("C", 0, "C_carbonyl_ketone");
        b.bond(ring_atom, co);
        b.bond(co, b.atom("O", 0, "O_carbonyl"), BondOrder::double_bond);
        attach_chain(b, Chain::methyl, co, "CH3_ketone");
    } else if (sub == "cho") {
        ra.environment_class = "C_acyl_aromatic";
        std::size_t cho = b.atom("C", 1, "CH_aldehyde");
        b.bond(ring_atom, cho);
        b.bond(cho, b.atom("O", 0, "O_carbonyl"), BondOrder::double_bond);
    } else {
        fail(errc::invariant_violation, "unknown ring substituent '" + sub + "'");
    }
}

inline MoleculeGraph para_benzene(const std::string& x, const std::string& y) {
    GraphBuilder b;
    for (int i = 0; i < 6; ++i) b.atom("C", 1, "CH_aromatic");
    for (std::size_t i = 0; i < 6; ++i) b.bond(i, (i + 1) % 6, BondOrder::aromatic);
    attach_ring_substituent(b, x, 0);
    attach_ring_substituent(b, y, 3);
    return std::move(b.g);
}

inline MoleculeGraph ester(Chain acid, Chain alcohol) {
    GraphBuilder b;
    std::size_t co = b.atom("C", 0, "C_carbonyl_ester");
    b.bond(co, b.atom("O", 0, "O_carbonyl"), BondOrder::double_bond);
    std::size_t o = b.atom("O", 0, "O_ester");
    b.bond(co, o);
    attach_chain(b, acid, co, acid == Chain::methyl ? "CH3_ketone" : nullptr);
    attach_chain(b, alcohol, o, oxygen_head_class(alcohol));
    return std::move(b.g);
}

inline MoleculeGraph ketone(Chain a, Chain c) {
    GraphBuilder b;
    std::size_t co = b.atom("C", 0, "C_carbonyl_ketone");
    b.bond(co, b.atom("O", 0, "O_carbonyl"), BondOrder::double_bond);
    attach_chain(b, a, co, a == Chain::methyl ? "CH3_ketone" : nullptr);
    attach_chain(b, c, co, c == Chain::methyl ? "CH3_ketone" : nullptr);
    return std::move(b.g);
}

inline MoleculeGraph ether(Chain a, Chain c) {
    GraphBuilder b;
    std::size_t o = b.atom("O", 0, "O_ether");
    attach_chain(b, a, o, oxygen_head_class(a));
    attach_chain(b, c, o, oxygen_head_class(c));
    return std::move(b.g);
}

inline MoleculeGraph aldehyde(Chain c) {
    GraphBuilder b;
    std::size_t cho = b.atom("C", 1, "CH_aldehyde");
    b.bond(cho, b.atom("O", 0, "O_carbonyl"), BondOrder::double_bond);
    attach_chain(b, c, cho);
    return std::move(b.g);
}

inline MoleculeGraph linear_alkane(int carbons) {
    GraphBuilder b;
    std::size_t prev = b.atom("C", 3, "CH3_alkyl");
    for (int i = 1; i < carbons; ++i) {
        std::size_t next =
            b.atom("C", i + 1 == carbons ? 3 : 2, i + 1 == carbons ? "CH3_alkyl" : "CH2_alkyl");
        b.bond(prev, next);
        prev = next;
    }
    return std::move(b.g);
}

inline MoleculeGraph branched_alkane(const std::string& name) {
    GraphBuilder b;
    if (name == "isobutane") {
        std::size_t ch = b.atom("C", 1, "CH_alkyl");
        for (int i = 0; i < 3; ++i) b.bond(ch, b.atom("C", 3, "CH3_alkyl"));
    } else if (name == "isopentane") {
        std::size_t ch = b.atom("C", 1, "CH_alkyl");
        b.bond(ch, b.atom("C", 3, "CH3_alkyl"));
        b.bond(ch, b.atom("C", 3, "CH3_alkyl"));
        std::size_t ch2 = b.atom("C", 2, "CH2_alkyl");
        b.bond(ch, ch2);
        b.bond(ch2, b.atom("C", 3, "CH3_alkyl"));
    } else if (name == "neopentane") {
        std::size_t cq = b.atom("C", 0, "C_quaternary");
        for (int i = 0; i < 4; ++i) b.bond(cq, b.atom("C", 3, "CH3_alkyl"));
    } else if (name == "23-dimethylbutane") {
        std::size_t c2 = b.atom("C", 1, "CH_alkyl");
        std::size_t c3 = b.atom("C", 1, "CH_alkyl");
        b.bond(c2, c3);
        b.bond(c2, b.atom("C", 3, "CH3_alkyl"));
        b.bond(c2, b.atom("C", 3, "CH3_alkyl"));
        b.bond(c3, b.atom("C", 3, "CH3_alkyl"));
        b.bond(c3, b.atom("C", 3, "CH3_alkyl"));
    } else if (name == "cyclohexane") {
        for (int i = 0; i < 6; ++i) b.atom("C", 2, "CH2_alkyl");
        for (std::size_t i = 0; i < 6; ++i) b.bond(i, (i + 1) % 6);
    } else {
        fail(errc::invariant_violation, "unknown alkane '" + name + "'");
    }
    return std::move(b.g);
}

}  // namespace detail

/**
 * Fixed 100-molecule universe: 25 esters, 15 ketones, 15 ethers, 12 alkanes,
 * 28 para-(di)substituted benzenes, and 5 aldehydes, enumerated over small
 * alkyl fragments. Order and ids are stable across runs, so index-based
 * references from tests stay valid.
 */
inline std::vector<CandidateStructure> full_catalog() {
    using detail::Chain;
    const std::vector<Chain> chains{Chain::methyl, Chain::ethyl, Chain::propyl,
                                    Chain::isopropyl, Chain::butyl};
    std::vector<CandidateStructure> out;
    auto add = [&out](std::string id, MoleculeGraph g) {
        CandidateStructure c;
        c.id = std::move(id);
        c.graph = std::move(g);
        c.provenance = Provenance::input;
        out.push_back(std::move(c));
    };

    for (Chain acid : chains)
        for (Chain alcohol : chains)
            add(std::string("ester-") + detail::chain_tag(acid) + "-" +
                    detail::chain_tag(alcohol),
                detail::ester(acid, alcohol));
    for (std::size_t i = 0; i < chains.size(); ++i)
        for (std::size_t j = i; j < chains.size(); ++j)
            add(std::string("ketone-") + detail::chain_tag(chains[i]) + "-" +
                    detail::chain_tag(chains[j]),
                detail::ketone(chains[i], chains[j]));
    for (std::size_t i = 0; i < chains.size(); ++i)
        for (std::size_t j = i; j < chains.size(); ++j)
            add(std::string("ether-") + detail::chain_tag(chains[i]) + "-" +
                    detail::chain_tag(chains[j]),
                detail::ether(chains[i], chains[j]));

    const char* linear[] = {"ethane", "propane", "butane", "pentane", "hexane", "heptane",
                            "octane"};
    for (int i = 0; i < 7; ++i) add(std::string("alkane-") + linear[i], detail::linear_alkane(i + 2));
    for (const char* name : {"isobutane", "isopentane", "neopentane", "23-dimethylbutane",
                             "cyclohexane"})
        add(std::string("alkane-") + name, detail::branched_alkane(name));

    const auto& subs = detail::ring_subs();
    for (std::size_t i = 0; i < subs.size(); ++i)
        for (std::size_t j = i; j < subs.size(); ++j)
            add("benzene-" + subs[i] + "-" + subs[j], detail::para_benzene(subs[i], subs[j]));

    for (Chain c : chains)
        add(std::string("aldehyde-") + detail::chain_tag(c), detail::aldehyde(c));

    for (const auto& cand : out) cand.graph.validate();
    return out;
}

/**
 * Catalog indices whose molecules make clean end-to-end subjects: every 1H
 * site group is separated from its neighbors by well over the multiplet
 * clustering gap, so the annotated spectrum maps one-to-one onto the
 * predicted sites. The rest of the catalog serves as retrieval decoys.
 */
inline std::vector<std::size_t> planted_truth_indices() {
    static const std::vector<std::string> ids{
        "ester-me-me",    "ester-me-et",    "ester-me-pr",   "ester-et-me",
        "ester-et-et",    "ester-pr-me",    "ketone-me-me",  "ketone-me-et",
        "ether-me-me",    "ether-et-et",    "alkane-propane", "alkane-butane",
        "alkane-isobutane", "benzene-me-me", "benzene-me-ome", "benzene-me-ac",
        "benzene-et-et",  "benzene-ome-ome", "benzene-ome-ac", "benzene-ac-ac"};
    const auto catalog = full_catalog();
    std::vector<std::size_t> out;
    for (const auto& id : ids)
        for (std::size_t i = 0; i < catalog.size(); ++i)
            if (catalog[i].id == id) {
                out.push_back(i);
                break;
            }
    require(out.size() == ids.size(), errc::invariant_violation,
            "planted truth id missing from catalog");
    return out;
}

inline CandidateDatabase planted_database() {
    return CandidateDatabase::build(full_catalog(), reference_h1_table(),
                                    reference_c13_table());
}

}  // namespace nmrx::synth
