#include "srlaser/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <fftw3.h>
#include <fmt/format.h>

#include "srlaser/error.hpp"
#include "srlaser/units.hpp"

namespace srlaser {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place complex transform of `data`; sign is FFTW_FORWARD (exp(-i...)) or
// FFTW_BACKWARD. Unnormalized.
void fft_inplace(std::vector<std::complex<double>>& data, int sign) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr, sign, FFTW_ESTIMATE);
    }
    if (!plan) throw AnalysisError("FFTW plan creation failed");
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

// Smallest 2^a 3^b 5^c >= n.
std::size_t good_fft_size(std::size_t n) {
    std::size_t best = 1;
    while (best < n) best *= 2;
    for (std::size_t p5 = 1; p5 < best; p5 *= 5)
        for (std::size_t p35 = p5; p35 < best; p35 *= 3) {
            std::size_t v = p35;
            while (v < n) v *= 2;
            best = std::min(best, v);
        }
    return best;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

// Index range [lo, hi] of bins with freq in [f_lo, f_hi].
std::pair<std::size_t, std::size_t> bin_range(const Spectrum& s, double f_lo, double f_hi) {
    const auto lo = std::lower_bound(s.freq.begin(), s.freq.end(), f_lo);
    const auto hi = std::upper_bound(s.freq.begin(), s.freq.end(), f_hi);
    if (lo >= hi) return {1, 0};
    return {static_cast<std::size_t>(lo - s.freq.begin()), static_cast<std::size_t>(hi - s.freq.begin()) - 1};
}

double half_max_width(const Spectrum& s, std::size_t i, double height, std::size_t lo, std::size_t hi) {
    const double half = 0.5 * height;
    double left = s.freq[lo];
    for (std::size_t k = i; k > lo; --k) {
        if (s.psd[k - 1] < half) {
            const double y0 = s.psd[k - 1];
            const double y1 = s.psd[k];
            left = s.freq[k - 1] + (half - y0) / (y1 - y0) * s.bin_width;
            break;
        }
    }
    double right = s.freq[hi];
    for (std::size_t k = i; k < hi; ++k) {
        if (s.psd[k + 1] < half) {
            const double y0 = s.psd[k];
            const double y1 = s.psd[k + 1];
            right = s.freq[k] + (y0 - half) / (y0 - y1) * s.bin_width;
            break;
        }
    }
    return right - left;
}

std::optional<Peak> peak_in_window(const Spectrum& s, double f_lo, double f_hi, double floor, double threshold) {
    const auto [lo, hi] = bin_range(s, f_lo, f_hi);
    if (lo > hi) return std::nullopt;
    std::size_t best = lo;
    for (std::size_t k = lo; k <= hi; ++k)
        if (s.psd[k] > s.psd[best]) best = k;
    const double y0 = s.psd[best];
    if (!(y0 > threshold * floor)) return std::nullopt;
    // A maximum on the window edge is the flank of something outside it.
    if (best == 0 || best + 1 >= s.size()) return std::nullopt;
    if (s.psd[best - 1] > y0 || s.psd[best + 1] > y0) return std::nullopt;

    Peak p;
    p.bin = best;
    const double ym = s.psd[best - 1];
    const double yp = s.psd[best + 1];
    const double denom = ym - 2.0 * y0 + yp;
    const double shift = denom != 0.0 ? std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5) : 0.0;
    p.freq = s.freq[best] + shift * s.bin_width;
    p.height = y0 - 0.25 * (ym - yp) * shift;
    p.fwhm = half_max_width(s, best, p.height, lo, hi);
    return p;
}

struct LorentzFit {
    double amplitude, centre, hwhm, baseline;
    bool converged;
};

// Levenberg-Marquardt on y = A / (1 + ((x - c)/w)^2) + B, in normalized units.
LorentzFit fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y, LorentzFit start) {
    using Vec4 = Eigen::Vector4d;
    Vec4 p(start.amplitude, start.centre, start.hwhm, start.baseline);
    auto residual_norm = [&](const Vec4& q) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = (x[i] - q[1]) / q[2];
            const double r = y[i] - (q[0] / (1.0 + u * u) + q[3]);
            acc += r * r;
        }
        return acc;
    };
    double lambda = 1e-3;
    double cost = residual_norm(p);
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Vec4 jtr = Vec4::Zero();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = (x[i] - p[1]) / p[2];
            const double d = 1.0 + u * u;
            const double model = p[0] / d + p[3];
            Vec4 jac(1.0 / d, p[0] * 2.0 * u / (p[2] * d * d), p[0] * 2.0 * u * u / (p[2] * d * d), 1.0);
            jtj += jac * jac.transpose();
            jtr += jac * (y[i] - model);
        }
        bool improved = false;
        for (int attempt = 0; attempt < 20 && !improved; ++attempt) {
            Eigen::Matrix4d a = jtj;
            a.diagonal() *= (1.0 + lambda);
            const Vec4 delta = a.ldlt().solve(jtr);
            Vec4 trial = p + delta;
            if (!(trial[2] > 0.0) || !trial.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            const double trial_cost = residual_norm(trial);
            if (trial_cost < cost) {
                const double rel = (cost - trial_cost) / std::max(cost, 1e-300);
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-12);
                improved = true;
                if (rel < 1e-12 || delta.norm() < 1e-10 * (1.0 + p.norm())) converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!improved) {
            converged = true;  // no descent direction left: at a minimum
            break;
        }
        if (converged) break;
    }
    return {p[0], p[1], p[2], p[3], converged && p.allFinite()};
}

struct SmoothedGuess {
    double freq, height, fwhm;
};

// Start values for the line fit. A broad line in a noisy spectrum has its
// raw maximum on a noise spike, so the width is read from a boxcar-smoothed
// copy at the finest smoothing whose half-maximum width spans at least four
// smoothing lengths. Narrow lines pass at smoothing 1 and keep the raw peak.
SmoothedGuess smoothed_guess(const Spectrum& s, const Peak& peak, double max_half_window) {
    SmoothedGuess raw{peak.freq, peak.height, peak.fwhm};
    if (raw.fwhm >= 4.0 * s.bin_width) return raw;
    const double reach = max_half_window > 0.0 ? max_half_window : 0.5 * (s.freq.back() - s.freq.front());
    const auto [lo, hi] = bin_range(s, peak.freq - reach, peak.freq + reach);
    if (lo > hi || hi - lo < 8) return raw;
    const std::size_t n = hi - lo + 1;
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + s.psd[lo + k];

    Spectrum sm;
    sm.bin_width = s.bin_width;
    sm.freq.assign(s.freq.begin() + static_cast<std::ptrdiff_t>(lo), s.freq.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    sm.psd.resize(n);
    for (std::size_t w = 3; 8 * w <= n; w *= 3) {
        const std::size_t r = w / 2;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t a = k >= r ? k - r : 0;
            const std::size_t b = std::min(n, k + r + 1);
            sm.psd[k] = (prefix[b] - prefix[a]) / static_cast<double>(b - a);
        }
        // Search the smoothed maximum within a few smoothing lengths of the raw one.
        const std::size_t centre = peak.bin - lo;
        const std::size_t from = centre > 4 * w ? centre - 4 * w : 0;
        const std::size_t to = std::min(n - 1, centre + 4 * w);
        std::size_t best = from;
        for (std::size_t k = from; k <= to; ++k)
            if (sm.psd[k] > sm.psd[best]) best = k;
        const double width = half_max_width(sm, best, sm.psd[best], 0, n - 1);
        if (width >= 4.0 * static_cast<double>(w) * s.bin_width) return {sm.freq[best], sm.psd[best], width};
    }
    return raw;
}

}  // namespace

CorrelationEstimate g1_estimate(std::span<const std::complex<double>> field, double sample_interval,
                                std::size_t lags) {
    const std::size_t n = field.size();
    if (lags == 0) throw AnalysisError("g1_estimate: need at least one lag");
    if (n < lags) throw AnalysisError(fmt::format("g1_estimate: record of {} samples shorter than {} lags", n, lags));
    const std::size_t size = good_fft_size(n + lags);
    std::vector<std::complex<double>> buf(size, {0.0, 0.0});
    std::copy(field.begin(), field.end(), buf.begin());
    fft_inplace(buf, FFTW_FORWARD);
    for (auto& v : buf) v = std::norm(v);
    fft_inplace(buf, FFTW_BACKWARD);

    CorrelationEstimate out;
    out.lag_step = sample_interval;
    out.g1.resize(lags);
    const double inv_size = 1.0 / static_cast<double>(size);
    for (std::size_t k = 0; k < lags; ++k) out.g1[k] = buf[k] * inv_size / static_cast<double>(n - k);
    // Zero lag is |J+|^2 by definition.
    double p0 = 0.0;
    for (const auto& v : field) p0 += std::norm(v);
    out.g1[0] = p0 / static_cast<double>(n);
    return out;
}

CorrelationEstimate g1_estimate(const FieldRecord& record, double max_lag) {
    if (record.sample_interval <= 0.0) throw AnalysisError("g1_estimate: record has no sample interval");
    const auto lags = static_cast<std::size_t>(std::floor(max_lag / record.sample_interval + 1e-9));
    if (lags == 0) throw AnalysisError("g1_estimate: max_lag shorter than one sample");
    if (record.size() < lags)
        throw AnalysisError(fmt::format("g1_estimate: record ({} samples) shorter than max_lag ({} samples)",
                                        record.size(), lags));
    return g1_estimate(record.j_plus, record.sample_interval, lags);
}

double Spectrum::total_power() const { return std::accumulate(psd.begin(), psd.end(), 0.0) * bin_width; }

Spectrum psd(const CorrelationEstimate& corr, SpectralWindow window) {
    const std::size_t k_max = corr.size();
    if (k_max == 0) throw AnalysisError("psd: empty correlation");
    const std::size_t len = 2 * k_max;
    std::vector<std::complex<double>> h(len, {0.0, 0.0});
    for (std::size_t k = 0; k < k_max; ++k) {
        double w = 1.0;
        if (window == SpectralWindow::Hann)
            w = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(k_max)));
        h[k] = corr.g1[k] * w;
        if (k > 0) h[len - k] = std::conj(h[k]);
    }
    fft_inplace(h, FFTW_FORWARD);

    Spectrum s;
    const double dt = corr.lag_step;
    s.bin_width = 1.0 / (static_cast<double>(len) * dt);
    s.freq.resize(len);
    s.psd.resize(len);
    // Reorder bins m = K..2K-1 (negative) then 0..K-1.
    for (std::size_t i = 0; i < len; ++i) {
        const std::size_t m = (i + k_max) % len;
        const auto signed_m = static_cast<double>(i) - static_cast<double>(k_max);
        s.freq[i] = signed_m * s.bin_width;
        s.psd[i] = h[m].real() * dt;
    }
    return s;
}

PeakSet find_peaks(const Spectrum& s, const PeakSearch& search) {
    PeakSet out;
    if (s.size() < 3) return out;
    out.floor = median(s.psd);
    if (!(out.floor > 0.0)) {
        // Degenerate floor (e.g. a single synthetic tone): use the mean magnitude.
        double acc = 0.0;
        for (double v : s.psd) acc += std::abs(v);
        out.floor = acc / static_cast<double>(s.size());
    }
    const double f_min = s.freq.front();
    const double f_max = s.freq.back();
    const double spacing = std::abs(search.delta_pa_hz);
    if (spacing <= 0.0) {
        out.central = peak_in_window(s, f_min, f_max, out.floor, search.threshold);
        return out;
    }
    out.central = peak_in_window(s, -0.5 * spacing, 0.5 * spacing, out.floor, search.threshold);
    const double shift = out.central ? out.central->freq : 0.0;
    const double half = search.side_window_fraction * spacing;
    out.lower = peak_in_window(s, shift - spacing - half, shift - spacing + half, out.floor, search.threshold);
    out.upper = peak_in_window(s, shift + spacing - half, shift + spacing + half, out.floor, search.threshold);
    return out;
}

LinewidthFit fit_linewidth(const Spectrum& s, const Peak& peak, double max_half_window) {
    LinewidthFit out;
    out.raw_fwhm = peak.fwhm;
    out.offset = peak.freq;
    const double bin = s.bin_width;
    const SmoothedGuess guess = smoothed_guess(s, peak, max_half_window);
    const double guess_fwhm = std::max(guess.fwhm, bin);
    double half_window = std::max(10.0 * guess_fwhm, 5.0 * bin);
    if (max_half_window > 0.0) half_window = std::min(half_window, std::max(max_half_window, 3.0 * bin));
    const auto [lo, hi] = bin_range(s, guess.freq - half_window, guess.freq + half_window);

    bool fitted = false;
    if (lo <= hi && hi - lo + 1 >= 5) {
        // Normalize: x in units of the guessed half width, y in peak heights.
        const double x_scale = 0.5 * guess_fwhm;
        const double y_scale = guess.height > 0.0 ? guess.height : 1.0;
        std::vector<double> x, y;
        for (std::size_t k = lo; k <= hi; ++k) {
            x.push_back((s.freq[k] - guess.freq) / x_scale);
            y.push_back(s.psd[k] / y_scale);
        }
        const double base = std::clamp(std::min(y.front(), y.back()), 0.0, 0.5);
        const LorentzFit f = fit_lorentzian(x, y, {1.0 - base, 0.0, 1.0, base, false});
        const double centre = guess.freq + f.centre * x_scale;
        if (f.converged && f.hwhm > 0.0 && f.amplitude > 0.0 && std::abs(f.centre * x_scale) <= half_window) {
            out.fwhm = 2.0 * f.hwhm * x_scale;
            out.offset = centre;
            out.fit_converged = true;
            fitted = true;
        }
    }
    if (!fitted) out.fwhm = out.raw_fwhm;
    if (!(out.fwhm >= 2.0 * bin)) {
        out.resolution_limited = true;
        out.fwhm = 2.0 * bin;
    }
    return out;
}

PullingFit pulling_coefficient(std::span<const PullingPoint> pts) {
    if (pts.size() < 3) throw AnalysisError("pulling_coefficient: need at least three detunings");
    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) {
        mx += p.delta_ca_hz;
        my += p.offset_hz;
    }
    const auto n = static_cast<double>(pts.size());
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : pts) {
        sxx += (p.delta_ca_hz - mx) * (p.delta_ca_hz - mx);
        sxy += (p.delta_ca_hz - mx) * (p.offset_hz - my);
    }
    if (!(sxx > 0.0)) throw AnalysisError("pulling_coefficient: degenerate detuning set");
    PullingFit fit;
    fit.coefficient = sxy / sxx;
    double ss = 0.0;
    for (const auto& p : pts) {
        const double r = p.offset_hz - (my + fit.coefficient * (p.delta_ca_hz - mx));
        ss += r * r;
    }
    fit.stderr = std::sqrt(ss / (n - 2.0) / sxx);
    return fit;
}

double contrast_ratio(double h_upper, double h_lower) {
    const double sum = h_upper + h_lower;
    if (!(sum > 0.0)) throw AnalysisError("contrast_ratio: side peak heights must have a positive sum");
    return (h_upper - h_lower) / sum;
}

double contrast_ratio(const PeakSet& peaks) {
    if (!peaks.upper || !peaks.lower) throw AnalysisError("contrast_ratio: a side peak is missing");
    return contrast_ratio(peaks.upper->height, peaks.lower->height);
}

std::optional<AdaptiveFit> fit_linewidth_adaptive(const CorrelationEstimate& corr, const PeakSearch& search,
                                                  SpectralWindow window, double target_bins,
                                                  double max_half_window) {
    constexpr std::size_t kMinLags = 16;
    const std::size_t full = corr.size();
    if (full < kMinLags || !(target_bins > 0.0)) return std::nullopt;
    auto at_lags = [&](std::size_t lags) -> std::optional<AdaptiveFit> {
        CorrelationEstimate sub;
        sub.lag_step = corr.lag_step;
        sub.g1.assign(corr.g1.begin(), corr.g1.begin() + static_cast<std::ptrdiff_t>(lags));
        const auto s = psd(sub, window);
        const auto peaks = find_peaks(s, search);
        if (!peaks.central) return std::nullopt;
        return AdaptiveFit{fit_linewidth(s, *peaks.central, max_half_window), s.bin_width};
    };
    std::size_t lags = std::max(kMinLags, full / 64);
    std::optional<AdaptiveFit> best;
    for (int pass = 0; pass < 8; ++pass) {
        auto f = at_lags(lags);
        if (!f) break;
        best = f;
        // Bin width 1/(2 L): target_bins bins per FWHM needs L = target_bins / (2 FWHM).
        const double want = target_bins / (2.0 * f->fit.fwhm * corr.lag_step);
        const auto next = static_cast<std::size_t>(std::clamp(want, static_cast<double>(kMinLags),
                                                              static_cast<double>(full)));
        if (next <= lags * 5 / 4 && next * 5 / 4 >= lags) break;  // settled within 25%
        lags = next;
    }
    return best;
}

SpectrumResult analyze(const FieldRecord& record, const SimConfig& cfg) {
    SpectrumResult r;
    const auto corr = g1_estimate(record, cfg.effective_max_lag());
    r.spectrum = psd(corr, cfg.analysis.window);
    const double spacing = angular_to_hz(std::abs(cfg.pump.delta_pa));
    const PeakSearch search{spacing, cfg.analysis.side_window_fraction, cfg.analysis.peak_threshold};
    r.peaks = find_peaks(r.spectrum, search);
    if (r.peaks.central) {
        const double limit = spacing > 0.0 ? 0.25 * spacing : 0.0;
        r.central = fit_linewidth(r.spectrum, *r.peaks.central, limit);
        r.central_bin_width = r.spectrum.bin_width;
        if (cfg.analysis.linewidth_bins > 0.0) {
            if (auto a = fit_linewidth_adaptive(corr, search, cfg.analysis.window, cfg.analysis.linewidth_bins, limit)) {
                r.central = a->fit;
                r.central_bin_width = a->bin_width;
            }
        }
    }
    if (r.peaks.upper && r.peaks.lower) r.contrast = contrast_ratio(r.peaks);
    return r;
}

}  // namespace srlaser
