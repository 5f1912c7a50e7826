#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "annotate.hpp"
#include "errors.hpp"
#include "molecule.hpp"

namespace nmrx {

struct Signal {
    double shift_ppm = 0.0;
    Pattern multiplicity = Pattern::s;
    std::vector<double> j_hz;  // descending
    double weight = 1.0;       // proton count for 1H, 1 for 13C
};

struct SignalSet {
    std::vector<Signal> signals;
    Nucleus nucleus = Nucleus::H1;

    double total_weight() const {
        double w = 0.0;
        for (const auto& s : signals) w += s.weight;
        return w;
    }
};

// Observed side: one signal per annotated multiplet.
inline SignalSet observed_signal_set(const AnnotatedSpectrum& annotated) {
    SignalSet out;
    out.nucleus = annotated.params.nucleus;
    for (const auto& m : annotated.multiplets) {
        Signal s;
        s.shift_ppm = m.center_ppm;
        s.multiplicity = m.pattern;
        s.j_hz = m.j_values_hz;
        s.weight = annotated.params.nucleus == Nucleus::H1
                       ? static_cast<double>(m.integral_protons)
                       : 1.0;
        out.signals.push_back(std::move(s));
    }
    return out;
}

// Predicted side: one signal per site group, descending ppm.
inline SignalSet simulate_spectrum(const CandidateStructure& cand, Nucleus nucleus) {
    const auto& sites = nucleus == Nucleus::H1 ? cand.h_sites : cand.c_sites;
    require(!sites.empty(), errc::sites_not_predicted,
            "candidate '" + cand.id + "' has no predicted " +
                std::string(nucleus_name(nucleus)) + " sites");
    SignalSet out;
    out.nucleus = nucleus;
    for (const auto& g : sites) {
        Signal s;
        s.shift_ppm = g.predicted_shift_ppm;
        s.multiplicity = g.expected_multiplicity;
        s.j_hz = g.predicted_j_hz;
        s.weight = nucleus == Nucleus::H1 ? static_cast<double>(g.proton_count) : 1.0;
        out.signals.push_back(std::move(s));
    }
    std::sort(out.signals.begin(), out.signals.end(),
              [](const Signal& a, const Signal& b) { return a.shift_ppm > b.shift_ppm; });
    return out;
}

namespace detail {

// Total order on signal sets used to canonicalize the argument order of
// the greedy matcher, making Sim exactly symmetric.
inline bool signal_set_less(const SignalSet& a, const SignalSet& b) {
    if (a.signals.size() != b.signals.size()) return a.signals.size() < b.signals.size();
    for (std::size_t i = 0; i < a.signals.size(); ++i) {
        const Signal &x = a.signals[i], &y = b.signals[i];
        if (x.shift_ppm != y.shift_ppm) return x.shift_ppm < y.shift_ppm;
        if (x.weight != y.weight) return x.weight < y.weight;
        if (x.multiplicity != y.multiplicity) return x.multiplicity < y.multiplicity;
        if (x.j_hz != y.j_hz) return x.j_hz < y.j_hz;
    }
    return false;
}

}  // namespace detail

/**
 * Set similarity Sim = 2 W_match / (W_a + W_b). Candidate pairs within
 * tol_ppm are taken greedily in order of increasing shift distance, each
 * signal used at most once; a pair contributes min(w_a, w_b), halved when
 * the multiplicities disagree (m acts as a wildcard). Arguments are
 * canonically ordered first so Sim is exactly symmetric.
 */
inline double peak_set_similarity(const SignalSet& a, const SignalSet& b, double tol_ppm) {
    require(a.nucleus == b.nucleus, errc::nucleus_mismatch,
            "cannot compare signal sets for different nuclei");
    require(tol_ppm > 0.0, errc::invariant_violation, "tol_ppm must be positive");
    const SignalSet& x = detail::signal_set_less(b, a) ? b : a;
    const SignalSet& y = detail::signal_set_less(b, a) ? a : b;
    if (x.signals.empty() && y.signals.empty()) return 1.0;

    struct Cand {
        double dist;
        std::size_t i, j;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < x.signals.size(); ++i)
        for (std::size_t j = 0; j < y.signals.size(); ++j) {
            double d = std::abs(x.signals[i].shift_ppm - y.signals[j].shift_ppm);
            if (d <= tol_ppm) cands.push_back({d, i, j});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& p, const Cand& q) {
        if (p.dist != q.dist) return p.dist < q.dist;
        if (p.i != q.i) return p.i < q.i;
        return p.j < q.j;
    });

    std::vector<char> used_x(x.signals.size(), 0), used_y(y.signals.size(), 0);
    double matched = 0.0;
    for (const auto& c : cands) {
        if (used_x[c.i] || used_y[c.j]) continue;
        used_x[c.i] = used_y[c.j] = 1;
        const Signal &sx = x.signals[c.i], &sy = y.signals[c.j];
        double w = std::min(sx.weight, sy.weight);
        bool wildcard = sx.multiplicity == Pattern::m || sy.multiplicity == Pattern::m;
        if (sx.multiplicity != sy.multiplicity && !wildcard) w *= 0.5;
        matched += w;
    }
    double denom = x.total_weight() + y.total_weight();
    return denom > 0.0 ? 2.0 * matched / denom : 0.0;
}

inline constexpr std::size_t spectrum_vector_bins = 256;

struct SpectrumVector {
    std::vector<double> bins;  // length spectrum_vector_bins, L2-normalized
    Nucleus nucleus = Nucleus::H1;
};

// Standard retrieval windows: 1H covers -1..13 ppm, 13C covers -10..230.
inline std::pair<double, double> vector_window(Nucleus n) {
    return n == Nucleus::H1 ? std::pair{-1.0, 13.0} : std::pair{-10.0, 230.0};
}

/**
 * Weight histogram over the nucleus window, Gaussian-smeared with a
 * one-bin sigma and L2-normalized. Out-of-window shifts clamp to the
 * nearest edge bin; an empty set stays the zero vector.
 */
inline SpectrumVector spectrum_vector(const SignalSet& set) {
    SpectrumVector out;
    out.nucleus = set.nucleus;
    out.bins.assign(spectrum_vector_bins, 0.0);
    if (set.signals.empty()) return out;

    auto [lo, hi] = vector_window(set.nucleus);
    std::vector<double> hist(spectrum_vector_bins, 0.0);
    for (const auto& s : set.signals) {
        double t = (s.shift_ppm - lo) / (hi - lo) * static_cast<double>(spectrum_vector_bins);
        long bin = static_cast<long>(std::floor(t));
        bin = std::clamp(bin, 0L, static_cast<long>(spectrum_vector_bins) - 1);
        hist[static_cast<std::size_t>(bin)] += s.weight;
    }
    for (std::size_t k = 0; k < spectrum_vector_bins; ++k) {
        if (hist[k] == 0.0) continue;
        for (std::size_t j = 0; j < spectrum_vector_bins; ++j) {
            double d = static_cast<double>(j) - static_cast<double>(k);
            out.bins[j] += hist[k] * std::exp(-0.5 * d * d);
        }
    }
    double norm = 0.0;
    for (double v : out.bins) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& v : out.bins) v /= norm;
    return out;
}

inline double cosine_similarity(const SpectrumVector& a, const SpectrumVector& b) {
    require(a.nucleus == b.nucleus, errc::nucleus_mismatch,
            "cannot compare vectors for different nuclei");
    require(a.bins.size() == b.bins.size(), errc::shape_mismatch, "vector lengths differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        dot += a.bins[i] * b.bins[i];
        na += a.bins[i] * a.bins[i];
        nb += b.bins[i] * b.bins[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

// A query may carry either nucleus or both; joint scores average the two.
struct Spectra {
    std::optional<SignalSet> h;
    std::optional<SignalSet> c;

    bool empty() const { return !h && !c; }
};

}  // namespace nmrx
