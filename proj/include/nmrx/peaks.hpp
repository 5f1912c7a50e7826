#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "fid.hpp"
#include "numeric.hpp"

namespace nmrx {

/**
 * One detected resonance line. Bounds follow the decreasing-ppm axis, so
 * right_bound_ppm < shift_ppm < left_bound_ppm always holds.
 */
struct Peak {
    double shift_ppm = 0.0;
    double intensity = 0.0;   // apex height above baseline (interpolated)
    double width_hz = 0.0;    // full width at half maximum
    double area = 0.0;
    double left_bound_ppm = 0.0;
    double right_bound_ppm = 0.0;
};

using PeakList = std::vector<Peak>;

namespace detail {

struct RawPeak {
    std::size_t apex = 0;
    std::size_t lo = 0;       // lower bin index (higher ppm)
    std::size_t hi = 0;       // upper bin index (lower ppm)
    bool open_lo = true;      // no neighbouring peak abuts this side
    bool open_hi = true;
};

/**
 * Strict local maxima above threshold, each with derivative-descent bounds:
 * extend from the apex while the values keep falling, stop at a sign change
 * of the first difference (shoulder split) or once |value| drops below the
 * noise level.
 */
inline std::vector<RawPeak> find_raw_peaks(const std::vector<double>& y, double noise,
                                           double threshold) {
    std::vector<RawPeak> out;
    const std::size_t n = y.size();
    if (n < 3) return out;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] > y[i + 1] && y[i] > threshold)) continue;
        RawPeak p{i, i, i};
        while (p.lo > 0 && y[p.lo - 1] < y[p.lo] && std::abs(y[p.lo]) >= noise) --p.lo;
        while (p.hi + 1 < n && y[p.hi + 1] < y[p.hi] && std::abs(y[p.hi]) >= noise) ++p.hi;
        out.push_back(p);
    }
    return out;
}

/**
 * Two touching maxima whose connecting valley never drops below merge_frac
 * of the smaller apex are one line wearing a noise dimple, not two resolved
 * lines: fold them into a single peak. Swept until no pair qualifies, so
 * bump chains riding on a tall line's tail collapse into it.
 */
inline void merge_shallow_valleys(std::vector<RawPeak>& raw, const std::vector<double>& y,
                                  double merge_frac) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t k = 0; k + 1 < raw.size(); ++k) {
            RawPeak& a = raw[k];
            const RawPeak& b = raw[k + 1];
            if (b.lo > a.hi + 1) continue;  // separated by a below-noise gap
            double valley = y[a.apex];
            for (std::size_t j = a.apex; j <= b.apex; ++j) valley = std::min(valley, y[j]);
            if (valley <= merge_frac * std::min(y[a.apex], y[b.apex])) continue;
            if (y[b.apex] > y[a.apex]) a.apex = b.apex;
            a.lo = std::min(a.lo, b.lo);
            a.hi = std::max(a.hi, b.hi);
            raw.erase(raw.begin() + k + 1);
            changed = true;
        }
    }
}

/** A side with a touching neighbour is interior to a cluster: the
 *  neighbour's own interval accounts for everything past the valley. */
inline void mark_open_sides(std::vector<RawPeak>& raw) {
    for (std::size_t k = 0; k < raw.size(); ++k) {
        raw[k].open_lo = k == 0 || raw[k - 1].hi + 1 < raw[k].lo;
        raw[k].open_hi = k + 1 == raw.size() || raw[k].hi + 1 < raw[k + 1].lo;
    }
}

/**
 * Adjacent peaks meet at their shared valley bin. Hand that bin to the
 * taller peak so the above-threshold bins partition into disjoint
 * intervals; a trim is skipped when it would push a bound onto the
 * neighbour's apex bin.
 */
inline void resolve_shared_valleys(std::vector<RawPeak>& raw, const std::vector<double>& y) {
    for (std::size_t k = 0; k + 1 < raw.size(); ++k) {
        RawPeak& a = raw[k];
        RawPeak& b = raw[k + 1];
        if (a.hi != b.lo) continue;
        const std::size_t v = a.hi;
        bool trim_b = y[a.apex] >= y[b.apex];
        if (trim_b && v + 2 > b.apex) trim_b = false;
        if (!trim_b && (v < 2 || a.apex > v - 2)) trim_b = (v + 2 <= b.apex);
        if (trim_b)
            b.lo = v + 1;
        else if (v >= 2 && a.apex <= v - 2)
            a.hi = v - 1;
        // else: both apexes hug the valley; leave the single shared bin
    }
}

}  // namespace detail

/**
 * Peak picking on the real channel of a phased, baseline-corrected
 * spectrum. Apex position and height come from a parabola through the apex
 * and its neighbours, width from linear interpolation at half maximum, and
 * area from the trapezoid over the detected interval plus the analytic
 * Lorentzian tail beyond each open bound (the raw trapezoid alone loses
 * over a tenth of a Lorentzian's area at typical cutoffs; sides facing an
 * abutting peak get no tail, that mass already sits in the neighbour's
 * interval). Result is sorted by descending ppm.
 */
inline PeakList detect_peaks(const Spectrum& sp, double noise, double threshold_sigma = 5.0,
                             double merge_valley_frac = 0.7) {
    sp.validate();
    require(sp.has_log_prefix("phase") && sp.has_log_prefix("baseline"), errc::not_corrected,
            "detect_peaks requires a phased, baseline-corrected spectrum");
    require(noise >= 0.0 && threshold_sigma > 0.0, errc::invariant_violation,
            "noise must be nonnegative and threshold_sigma positive");

    const std::vector<double>& y = sp.real;
    auto raw = detail::find_raw_peaks(y, noise, threshold_sigma * noise);
    detail::merge_shallow_valleys(raw, y, merge_valley_frac);
    detail::mark_open_sides(raw);
    detail::resolve_shared_valleys(raw, y);

    const double hzb = sp.hz_per_bin();
    const double ppb = sp.ppm_per_bin();
    PeakList peaks;
    peaks.reserve(raw.size());
    for (const auto& p : raw) {
        const double y0 = y[p.apex - 1], y1 = y[p.apex], y2 = y[p.apex + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        const double delta = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
        const double height = y1 - 0.25 * (y0 - y2) * delta;
        const double apex_bin = static_cast<double>(p.apex) + delta;

        const double half = height / 2.0;
        std::size_t l = p.apex;
        while (l > p.lo && y[l] > half) --l;
        double xl = static_cast<double>(l);
        if (y[l + 1] != y[l]) xl += (half - y[l]) / (y[l + 1] - y[l]);
        std::size_t r = p.apex;
        while (r < p.hi && y[r] > half) ++r;
        double xr = static_cast<double>(r);
        if (y[r - 1] != y[r]) xr -= (half - y[r]) / (y[r - 1] - y[r]);
        const double width_hz = std::max(xr - xl, 1e-9) * hzb;

        double area = trapezoid(y, p.lo, p.hi, hzb);
        const double g = width_hz / 2.0;
        if (p.open_lo) {
            const double d_lo = (apex_bin - static_cast<double>(p.lo)) * hzb;
            area += height * g * (M_PI / 2.0 - std::atan(d_lo / g));
        }
        if (p.open_hi) {
            const double d_hi = (static_cast<double>(p.hi) - apex_bin) * hzb;
            area += height * g * (M_PI / 2.0 - std::atan(d_hi / g));
        }

        Peak pk;
        pk.shift_ppm = sp.ppm_axis[p.apex] - delta * ppb;
        pk.intensity = height;
        pk.width_hz = width_hz;
        pk.area = area;
        pk.left_bound_ppm = sp.ppm_axis[p.lo];
        pk.right_bound_ppm = sp.ppm_axis[p.hi];
        peaks.push_back(pk);
    }
    return peaks;  // ascending bin order is descending ppm already
}

}  // namespace nmrx
