#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "srlaser/config.hpp"
#include "srlaser/dynamics.hpp"

namespace srlaser {

/// First-order field correlation <J+(t + lag) J-(t)>_t at non-negative lags.
struct CorrelationEstimate {
    double lag_step = 0.0;
    std::vector<std::complex<double>> g1;

    std::size_t size() const { return g1.size(); }
    double lag(std::size_t k) const { return lag_step * static_cast<double>(k); }
};

/// Time-averaged correlation over every available start time, for lags up to
/// max_lag. Throws AnalysisError when the record is shorter than max_lag.
CorrelationEstimate g1_estimate(const FieldRecord& record, double max_lag);
CorrelationEstimate g1_estimate(std::span<const std::complex<double>> field, double sample_interval,
                                std::size_t lags);

/// Two-sided power spectral density on an ascending frequency grid (Hz,
/// 0 = atomic resonance). A field J- ~ exp(-i 2 pi f t) puts its peak at +f.
struct Spectrum {
    double bin_width = 0.0;
    std::vector<double> freq;
    std::vector<double> psd;

    std::size_t size() const { return freq.size(); }
    /// Sum of psd * bin_width; equals g1(0).
    double total_power() const;
};

/// Fourier transform of the Hermitian extension of g1 over [-T, T), where
/// T = lags * lag_step. The bin width is 1 / (2 T).
Spectrum psd(const CorrelationEstimate& corr, SpectralWindow window = SpectralWindow::None);

struct Peak {
    double freq = 0.0;    // parabolic-interpolated centre, Hz
    double height = 0.0;  // interpolated maximum of the psd
    double fwhm = 0.0;    // half-maximum crossing width, Hz
    std::size_t bin = 0;
};

struct PeakSearch {
    double delta_pa_hz = 0.0;  // side-peak spacing; 0 searches for a single line
    double side_window_fraction = 0.25;
    double threshold = 10.0;   // minimum height over the median floor
};

struct PeakSet {
    double floor = 0.0;
    std::optional<Peak> central;
    std::optional<Peak> lower;  // near -delta_pa
    std::optional<Peak> upper;  // near +delta_pa
};

/// Central line in |f| < delta_pa/2, side lines in windows of half-width
/// fraction * delta_pa around +-delta_pa shifted by the measured central
/// offset. Lines not clearing the floor are reported missing.
PeakSet find_peaks(const Spectrum& spec, const PeakSearch& search);

struct LinewidthFit {
    double fwhm = 0.0;       // Hz
    double offset = 0.0;     // fitted centre, Hz
    double raw_fwhm = 0.0;   // interpolated half-maximum width, Hz
    bool fit_converged = false;
    bool resolution_limited = false;  // narrower than two bins; fwhm is then 2 bins
};

/// Lorentzian least-squares fit over +-10 initial FWHM around the peak
/// (at most max_half_window Hz). Falls back to the raw width if the fit fails.
LinewidthFit fit_linewidth(const Spectrum& spec, const Peak& peak, double max_half_window = 0.0);

struct PullingPoint {
    double delta_ca_hz = 0.0;
    double offset_hz = 0.0;
};

struct PullingFit {
    double coefficient = 0.0;  // d(offset) / d(delta_ca / 2 pi)
    double stderr = 0.0;
};

/// Least-squares slope of central offset against cavity-atom detuning.
/// Requires at least three points and two distinct detunings.
PullingFit pulling_coefficient(std::span<const PullingPoint> points);

/// (h_upper - h_lower) / (h_upper + h_lower).
double contrast_ratio(double h_upper, double h_lower);
/// Throws AnalysisError if either side peak is missing.
double contrast_ratio(const PeakSet& peaks);

struct SpectrumResult {
    Spectrum spectrum;
    PeakSet peaks;
    std::optional<LinewidthFit> central;
    double central_bin_width = 0.0;  // resolution the central fit was made at
    std::optional<double> contrast;
};

/// Central-line fit at a resolution matched to the line: starting from a
/// coarse lag window, the window is set to give `target_bins` bins per
/// FWHM (capped at the full window) and the fit repeated until the window
/// stops changing. A short window averages more of the record, so broad
/// lines come out with much less estimator noise than at the full window.
struct AdaptiveFit {
    LinewidthFit fit;
    double bin_width = 0.0;
};
std::optional<AdaptiveFit> fit_linewidth_adaptive(const CorrelationEstimate& corr, const PeakSearch& search,
                                                  SpectralWindow window, double target_bins,
                                                  double max_half_window);

/// g1 -> psd -> peaks -> central linewidth -> contrast, configured from cfg.
SpectrumResult analyze(const FieldRecord& record, const SimConfig& cfg);

}  // namespace srlaser
