#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "baseline.hpp"
#include "multiplet.hpp"
#include "peaks.hpp"

namespace nmrx {

struct AnnotateConfig {
    double threshold_sigma = 5.0;
    double gap_hz = 18.0;
    ClassifierConfig classifier;
    double noise_sigma = 0.0;  // 0 means estimate from the spectrum
    // Integral normalization: the smallest surviving multiplet is declared
    // to carry anchor_protons hydrogens. Clusters far below the tallest
    // signal, and areas far below the largest, are excluded so a stray
    // noise excursion can never become the anchor and inflate everything.
    int anchor_protons = 1;
    double min_anchor_area_fraction = 0.02;
    double min_cluster_intensity_fraction = 0.05;
    // Within one cluster, peaks far below the cluster's own top are residual
    // noise bumps riding a tall line's tail; they would otherwise break the
    // pattern rules. 0.03 stays under a septet's outer lines at 1/20.
    double min_member_intensity_fraction = 0.03;
};

struct AnnotatedSpectrum {
    std::vector<Multiplet> multiplets;  // descending center_ppm
    AcquisitionParams params;
    double noise_sigma = 0.0;
};

inline AnnotatedSpectrum annotate(const Spectrum& sp, const AnnotateConfig& cfg = {},
                                  const MultipletClassifier* classifier = nullptr) {
    RuleBasedClassifier fallback(cfg.classifier);
    if (!classifier) classifier = &fallback;

    AnnotatedSpectrum out;
    out.params = sp.params;
    out.noise_sigma = cfg.noise_sigma > 0.0 ? cfg.noise_sigma : estimate_noise(sp.real);

    PeakList peaks = detect_peaks(sp, out.noise_sigma, cfg.threshold_sigma);
    auto clusters = group_multiplets(peaks, sp.params.spectrometer_frequency_mhz, cfg.gap_hz);

    double tallest = 0.0;
    for (const auto& pk : peaks) tallest = std::max(tallest, pk.intensity);
    for (const auto& cluster : clusters) {
        double top = 0.0;
        for (const auto& pk : cluster) top = std::max(top, pk.intensity);
        if (top < cfg.min_cluster_intensity_fraction * tallest) continue;
        PeakList kept;
        for (const auto& pk : cluster)
            if (pk.intensity >= cfg.min_member_intensity_fraction * top) kept.push_back(pk);
        out.multiplets.push_back(
            classifier->classify(kept, sp.params.spectrometer_frequency_mhz));
    }
    std::stable_sort(out.multiplets.begin(), out.multiplets.end(),
                     [](const Multiplet& a, const Multiplet& b) {
                         return a.center_ppm > b.center_ppm;
                     });

    if (!out.multiplets.empty()) {
        double max_area = 0.0;
        for (const auto& m : out.multiplets) max_area = std::max(max_area, m.area());
        double anchor = max_area;
        for (const auto& m : out.multiplets) {
            double a = m.area();
            if (a >= cfg.min_anchor_area_fraction * max_area) anchor = std::min(anchor, a);
        }
        for (auto& m : out.multiplets) {
            long n = std::lround(m.area() / anchor * cfg.anchor_protons);
            m.integral_protons = static_cast<int>(std::max(1L, n));
        }
    }
    return out;
}

}  // namespace nmrx
