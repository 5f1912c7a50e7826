#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "peaks.hpp"

namespace nmrx {

enum class Pattern { s, d, t, q, dd, td, dt, ddd, m };

inline const char* pattern_name(Pattern p) {
    switch (p) {
        case Pattern::s: return "s";
        case Pattern::d: return "d";
        case Pattern::t: return "t";
        case Pattern::q: return "q";
        case Pattern::dd: return "dd";
        case Pattern::td: return "td";
        case Pattern::dt: return "dt";
        case Pattern::ddd: return "ddd";
        case Pattern::m: return "m";
    }
    return "m";
}

inline Pattern pattern_from_string(const std::string& s) {
    static const std::pair<const char*, Pattern> table[] = {
        {"s", Pattern::s},   {"d", Pattern::d},   {"t", Pattern::t},
        {"q", Pattern::q},   {"dd", Pattern::dd}, {"td", Pattern::td},
        {"dt", Pattern::dt}, {"ddd", Pattern::ddd}, {"m", Pattern::m}};
    for (const auto& [name, p] : table)
        if (s == name) return p;
    fail(errc::malformed_document, "unknown multiplet pattern '" + s + "'");
}

// Number of J values a pattern carries (s and m carry none).
inline std::size_t pattern_j_count(Pattern p) {
    switch (p) {
        case Pattern::s:
        case Pattern::m: return 0;
        case Pattern::d:
        case Pattern::t:
        case Pattern::q: return 1;
        case Pattern::dd:
        case Pattern::td:
        case Pattern::dt: return 2;
        case Pattern::ddd: return 3;
    }
    return 0;
}

struct Multiplet {
    double center_ppm = 0.0;
    Pattern pattern = Pattern::m;
    std::vector<double> j_values_hz;  // descending
    int integral_protons = 0;
    PeakList member_peaks;  // descending ppm

    double area() const {
        double a = 0.0;
        for (const auto& p : member_peaks) a += p.area;
        return a;
    }
};

/**
 * Single-linkage clustering of a descending-ppm peak list: a cluster ends
 * wherever the gap to the next apex exceeds gap_hz. 18 Hz sits above
 * typical three-bond couplings and below typical inter-signal spacing.
 */
inline std::vector<PeakList> group_multiplets(const PeakList& peaks, double sf_mhz,
                                              double gap_hz = 18.0) {
    std::vector<PeakList> clusters;
    for (const auto& pk : peaks) {
        bool fresh = clusters.empty() ||
                     (clusters.back().back().shift_ppm - pk.shift_ppm) * sf_mhz > gap_hz;
        if (fresh) clusters.emplace_back();
        clusters.back().push_back(pk);
    }
    return clusters;
}

/**
 * First-order forward model: a pattern is a Cartesian sum of symmetric
 * splittings (doublet = +-J/2, triplet = -J,0,+J with 1:2:1 weights, and
 * so on), positions in Hz about zero. Coincident lines are merged with
 * summed weights. Used for simulation and for round-trip testing of the
 * classifier.
 */
struct WeightedLine {
    double pos_hz = 0.0;
    double weight = 0.0;
};

namespace detail {

inline int binomial(int n, int k) {
    int r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - i + 1) / i;
    return r;
}

inline std::vector<WeightedLine> split_lines(const std::vector<WeightedLine>& in, double j,
                                             int order) {
    std::vector<WeightedLine> out;
    out.reserve(in.size() * (order + 1));
    for (const auto& ln : in)
        for (int k = 0; k <= order; ++k)
            out.push_back({ln.pos_hz + (k - order / 2.0) * j,
                           ln.weight * binomial(order, k)});
    return out;
}

inline std::vector<WeightedLine> merge_coincident(std::vector<WeightedLine> lines, double tol) {
    std::sort(lines.begin(), lines.end(),
              [](const WeightedLine& a, const WeightedLine& b) { return a.pos_hz < b.pos_hz; });
    std::vector<WeightedLine> merged;
    for (const auto& ln : lines) {
        if (!merged.empty() && std::abs(ln.pos_hz - merged.back().pos_hz) <= tol)
            merged.back().weight += ln.weight;
        else
            merged.push_back(ln);
    }
    return merged;
}

}  // namespace detail

inline std::vector<WeightedLine> multiplet_lines(Pattern p, const std::vector<double>& js) {
    require(js.size() == pattern_j_count(p), errc::invariant_violation,
            "J count does not match pattern");
    std::vector<WeightedLine> lines{{0.0, 1.0}};
    switch (p) {
        case Pattern::s:
        case Pattern::m: break;
        case Pattern::d: lines = detail::split_lines(lines, js[0], 1); break;
        case Pattern::t: lines = detail::split_lines(lines, js[0], 2); break;
        case Pattern::q: lines = detail::split_lines(lines, js[0], 3); break;
        case Pattern::dd:
            lines = detail::split_lines(detail::split_lines(lines, js[0], 1), js[1], 1);
            break;
        case Pattern::td:
            lines = detail::split_lines(detail::split_lines(lines, js[0], 2), js[1], 1);
            break;
        case Pattern::dt:
            lines = detail::split_lines(detail::split_lines(lines, js[0], 1), js[1], 2);
            break;
        case Pattern::ddd:
            lines = detail::split_lines(
                detail::split_lines(detail::split_lines(lines, js[0], 1), js[1], 1), js[2], 1);
            break;
    }
    return detail::merge_coincident(std::move(lines), 1e-9);
}

struct ClassifierConfig {
    double ratio_tol = 0.25;   // intensity profile tolerance, normalized to tallest line
    double j_tol_hz = 0.5;     // spacing agreement tolerance
    int max_factor_depth = 3;  // doublet-tree factoring cap (8 lines)
};

// Interface point: the rule cascade below is one implementation; a learned
// classifier can be swapped in without touching callers.
class MultipletClassifier {
public:
    virtual ~MultipletClassifier() = default;
    virtual Multiplet classify(const PeakList& cluster, double sf_mhz) const = 0;
};

class RuleBasedClassifier : public MultipletClassifier {
public:
    explicit RuleBasedClassifier(ClassifierConfig cfg = {}) : cfg_(cfg) {}

    Multiplet classify(const PeakList& cluster, double sf_mhz) const override {
        require(!cluster.empty(), errc::invariant_violation, "empty peak cluster");
        Multiplet m;
        m.member_peaks = cluster;
        double wsum = 0.0, csum = 0.0;
        for (const auto& pk : cluster) {
            wsum += pk.area;
            csum += pk.area * pk.shift_ppm;
        }
        m.center_ppm = wsum > 0.0 ? csum / wsum : cluster.front().shift_ppm;

        // work on ascending Hz positions (cluster arrives in descending ppm)
        std::vector<WeightedLine> lines(cluster.size());
        for (std::size_t i = 0; i < cluster.size(); ++i) {
            const Peak& pk = cluster[cluster.size() - 1 - i];
            lines[i] = {pk.shift_ppm * sf_mhz, pk.intensity};
        }
        auto [pattern, js] = classify_lines(lines);
        m.pattern = pattern;
        std::sort(js.begin(), js.end(), std::greater<>());
        m.j_values_hz = std::move(js);
        return m;
    }

    // Core cascade on (ascending position, weight) pairs; exposed for the
    // forward-model round-trip tests.
    std::pair<Pattern, std::vector<double>> classify_lines(
        const std::vector<WeightedLine>& lines) const {
        const std::size_t n = lines.size();
        if (n == 1) return {Pattern::s, {}};
        std::vector<double> pos(n), inten(n), gap(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            pos[i] = lines[i].pos_hz;
            inten[i] = lines[i].weight;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) gap[i] = pos[i + 1] - pos[i];
        const double imax = *std::max_element(inten.begin(), inten.end());

        auto profile_ok = [&](std::initializer_list<double> expected) {
            if (expected.size() != n) return false;
            double emax = *std::max_element(expected.begin(), expected.end());
            std::size_t i = 0;
            for (double e : expected) {
                if (std::abs(inten[i] / imax - e / emax) > cfg_.ratio_tol) return false;
                ++i;
            }
            return true;
        };

        if (n == 2) {
            if (profile_ok({1, 1})) return {Pattern::d, {gap[0]}};
            return {Pattern::m, {}};
        }
        if (n == 3 && std::abs(gap[0] - gap[1]) <= cfg_.j_tol_hz && profile_ok({1, 2, 1}))
            return {Pattern::t, {(pos[2] - pos[0]) / 2.0}};
        if (n == 4) {
            auto [gmin, gmax] = std::minmax_element(gap.begin(), gap.end());
            if (*gmax - *gmin <= cfg_.j_tol_hz && profile_ok({1, 3, 3, 1}))
                return {Pattern::q, {(pos[3] - pos[0]) / 3.0}};
            // dd positions are +-(J1+J2)/2, +-(J1-J2)/2: the outer-pair span
            // gives J1 twice over, the flank gaps give J2 twice over
            if (std::abs(gap[0] - gap[2]) <= cfg_.j_tol_hz &&
                std::abs(gap[1] - gap[0]) > cfg_.j_tol_hz && profile_ok({1, 1, 1, 1})) {
                double j1a = pos[3] - pos[1], j1b = pos[2] - pos[0];
                if (std::abs(j1a - j1b) <= cfg_.j_tol_hz)
                    return {Pattern::dd, {(j1a + j1b) / 2.0, (gap[0] + gap[2]) / 2.0}};
            }
        }
        if (auto factored = factor(lines)) return *factored;
        return {Pattern::m, {}};
    }

private:
    ClassifierConfig cfg_;

    /**
     * Doublet-tree factoring: peel off a doublet splitting equal to the gap
     * between the two lowest lines, pair every line with a partner J away
     * (weights integerized against the smallest), and recurse on the
     * midpoints. The multiset of peeled J values then names the pattern.
     */
    std::optional<std::pair<Pattern, std::vector<double>>> factor(
        const std::vector<WeightedLine>& lines) const {
        auto factors = extract(lines, 0);
        if (!factors) return std::nullopt;
        std::sort(factors->begin(), factors->end(), std::greater<>());
        const auto& f = *factors;
        auto eq = [&](double a, double b) { return std::abs(a - b) <= cfg_.j_tol_hz; };
        auto made = [](Pattern p, std::vector<double> js) {
            return std::make_pair(p, std::move(js));
        };
        switch (f.size()) {
            case 1: return made(Pattern::d, {f[0]});
            case 2:
                if (eq(f[0], f[1])) return made(Pattern::t, {(f[0] + f[1]) / 2.0});
                return made(Pattern::dd, {f[0], f[1]});
            case 3:
                if (eq(f[0], f[1]) && eq(f[1], f[2]))
                    return made(Pattern::q, {(f[0] + f[1] + f[2]) / 3.0});
                if (eq(f[0], f[1])) return made(Pattern::td, {(f[0] + f[1]) / 2.0, f[2]});
                if (eq(f[1], f[2])) return made(Pattern::dt, {f[0], (f[1] + f[2]) / 2.0});
                return made(Pattern::ddd, {f[0], f[1], f[2]});
            default: return std::nullopt;
        }
    }

    std::optional<std::vector<double>> extract(const std::vector<WeightedLine>& lines,
                                               int depth) const {
        if (lines.size() == 1) {
            if (lines[0].weight > 0.0) return std::vector<double>{};
            return std::nullopt;
        }
        if (depth >= cfg_.max_factor_depth) return std::nullopt;

        double wmin = lines[0].weight;
        for (const auto& ln : lines) wmin = std::min(wmin, ln.weight);
        if (wmin <= 0.0) return std::nullopt;
        std::vector<long> avail(lines.size());
        long total = 0;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            double r = lines[i].weight / wmin;
            long ir = std::lround(r);
            if (ir < 1 || std::abs(r - static_cast<double>(ir)) > cfg_.ratio_tol)
                return std::nullopt;
            avail[i] = ir;
            total += ir;
        }
        if (total % 2 != 0) return std::nullopt;

        const double j = lines[1].pos_hz - lines[0].pos_hz;
        if (j <= 0.0) return std::nullopt;
        std::vector<WeightedLine> mids;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            while (avail[i] > 0) {
                std::size_t partner = lines.size();
                for (std::size_t k = i + 1; k < lines.size(); ++k) {
                    if (avail[k] > 0 &&
                        std::abs(lines[k].pos_hz - (lines[i].pos_hz + j)) <= cfg_.j_tol_hz) {
                        partner = k;
                        break;
                    }
                }
                if (partner == lines.size()) return std::nullopt;
                long mcount = std::min(avail[i], avail[partner]);
                avail[i] -= mcount;
                avail[partner] -= mcount;
                mids.push_back({(lines[i].pos_hz + lines[partner].pos_hz) / 2.0,
                                static_cast<double>(mcount)});
            }
        }
        auto rest = extract(detail::merge_coincident(std::move(mids), cfg_.j_tol_hz / 2.0),
                            depth + 1);
        if (!rest) return std::nullopt;
        rest->insert(rest->begin(), j);
        return rest;
    }
};

}  // namespace nmrx
