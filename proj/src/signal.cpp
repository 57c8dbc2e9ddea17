#include "whisker/signal.hpp"

#include <cmath>

namespace whisker {

DriftFit fit_drift(std::span<const double> t, std::span<const double> s) {
    if (t.size() != s.size() || t.size() < 2) {
        fail("degenerate_window", "drift fit needs at least 2 samples");
    }
    const double n = static_cast<double>(t.size());
    double t_mean = 0.0, s_mean = 0.0;
    for (size_t i = 0; i < t.size(); ++i) {
        t_mean += t[i];
        s_mean += s[i];
    }
    t_mean /= n;
    s_mean /= n;
    // centered form of the normal equations
    double stt = 0.0, sts = 0.0;
    for (size_t i = 0; i < t.size(); ++i) {
        const double dt = t[i] - t_mean;
        stt += dt * dt;
        sts += dt * (s[i] - s_mean);
    }
    if (stt <= 0.0) fail("degenerate_window", "all sample times equal");
    DriftFit fit;
    fit.slope = sts / stt;
    fit.intercept = s_mean - fit.slope * t_mean;
    return fit;
}

SignalPipeline::SignalPipeline(PipelineConfig cfg) : cfg_(cfg) {
    if (cfg_.window < 2) fail("degenerate_window", "pipeline window must be >= 2");
    for (auto& f : filt_) {
        f = cfg_.filter_design;
        f.reset();
    }
    // Raw and Bandpass modes have no calibration phase.
    calibrated_ =
        cfg_.mode == PipelineMode::Raw || cfg_.mode == PipelineMode::Bandpass;
    win_t_.reserve(static_cast<size_t>(cfg_.window));
    for (auto& w : win_raw_) w.reserve(static_cast<size_t>(cfg_.window));
}

void SignalPipeline::fit_all_channels() {
    for (size_t ch = 0; ch < 3; ++ch) {
        fit_[ch] = fit_drift(win_t_, win_raw_[ch]);
    }
}

PipelineOutput SignalPipeline::step(const std::array<double, 3>& raw) {
    PipelineOutput out;
    const double t = static_cast<double>(tick_);

    if (cfg_.mode == PipelineMode::Raw) {
        out.s_c = raw;
        out.s_p = raw;
        out.calibrated = true;
    } else if (cfg_.mode == PipelineMode::Bandpass) {
        out.s_c = raw;
        for (size_t ch = 0; ch < 3; ++ch) out.s_p[ch] = filt_[ch].step(raw[ch]);
        out.calibrated = true;
    } else {
        if (!calibrated_) {
            // initial hover window
            win_t_.push_back(t);
            for (size_t ch = 0; ch < 3; ++ch) win_raw_[ch].push_back(raw[ch]);
            if (win_t_.size() >= static_cast<size_t>(cfg_.window)) {
                fit_all_channels();
                calibrated_ = true;
                win_t_.clear();
                for (auto& w : win_raw_) w.clear();
                window_clean_ = true;
            } else {
                ++tick_;
                return out; // calibrated = false
            }
        }
        out.calibrated = true;
        bool clean_sample = true;
        for (size_t ch = 0; ch < 3; ++ch) {
            out.s_c[ch] = calibrate(raw[ch], fit_[ch], t);
            out.s_p[ch] = filt_[ch].step(out.s_c[ch]);
            if (std::abs(out.s_c[ch]) > cfg_.refit_threshold) clean_sample = false;
        }
        out.contact = std::abs(out.s_p[0]) > cfg_.contact_threshold ||
                      std::abs(out.s_p[1]) > cfg_.contact_threshold ||
                      std::abs(out.s_p[2]) > cfg_.contact_threshold;
        if (out.contact) clean_sample = false;

        win_t_.push_back(t);
        for (size_t ch = 0; ch < 3; ++ch) win_raw_[ch].push_back(raw[ch]);
        if (!clean_sample) window_clean_ = false;

        if (win_t_.size() >= static_cast<size_t>(cfg_.window)) {
            // Re-fit once per full window, only in TDORC and only when the
            // whole window was contact-free. Takes effect from the next tick.
            if (cfg_.mode == PipelineMode::Tdorc && window_clean_) {
                fit_all_channels();
                out.recalibrated = true;
            }
            win_t_.clear();
            for (auto& w : win_raw_) w.clear();
            window_clean_ = true;
        }
    }

    if (out.calibrated && cfg_.mode != PipelineMode::Tdoc &&
        cfg_.mode != PipelineMode::Tdorc) {
        out.contact = std::abs(out.s_p[0]) > cfg_.contact_threshold ||
                      std::abs(out.s_p[1]) > cfg_.contact_threshold ||
                      std::abs(out.s_p[2]) > cfg_.contact_threshold;
    }

    ++tick_;
    return out;
}

PipelineOutput SignalPipeline::step_strict(const std::array<double, 3>& raw) {
    if (!calibrated_) {
        fail("not_calibrated", "initial hover window not complete");
    }
    return step(raw);
}

double fpr(std::span<const uint8_t> contacts,
           std::span<const uint8_t> ground_truth_free) {
    if (contacts.size() != ground_truth_free.size()) {
        fail("length_mismatch", "fpr inputs must have equal length");
    }
    int64_t fp = 0, tn = 0;
    for (size_t i = 0; i < contacts.size(); ++i) {
        if (!ground_truth_free[i]) continue;
        if (contacts[i]) ++fp;
        else ++tn;
    }
    if (fp + tn == 0) fail("empty_denominator", "no free-flight samples");
    return static_cast<double>(fp) / static_cast<double>(fp + tn);
}

} // namespace whisker
