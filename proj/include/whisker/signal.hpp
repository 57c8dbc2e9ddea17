#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "whisker/errors.hpp"

namespace whisker {

// First-order linear drift model S ~ slope * t + intercept.
struct DriftFit {
    double slope = 0.0;     // counts per tick
    double intercept = 0.0; // counts
};

// Closed-form least squares over a window of (tick, raw) pairs.
// Throws degenerate_window for fewer than 2 samples or all-equal ticks.
DriftFit fit_drift(std::span<const double> t, std::span<const double> s);

inline double calibrate(double s_r, const DriftFit& fit, double t) {
    return s_r - (fit.slope * t + fit.intercept);
}

// First-order Butterworth bandpass 0.05-1 Hz at 50 Hz sample rate,
// direct-form II transposed. Defaults are the pipeline's fixed design.
struct Biquad {
    double b0 = 0.0564, b1 = 0.0, b2 = -0.0564;
    double a1 = -1.8865, a2 = 0.8872;
    double z0 = 0.0, z1 = 0.0;

    double step(double x) {
        const double y = b0 * x + z0;
        z0 = b1 * x - a1 * y + z1;
        z1 = b2 * x - a2 * y;
        return y;
    }
    void reset() { z0 = z1 = 0.0; }
};

enum class PipelineMode { Raw, Bandpass, Tdoc, Tdorc };

struct PipelineConfig {
    PipelineMode mode = PipelineMode::Tdorc;
    int window = 100;                // sliding-window length n
    double refit_threshold = 20.0;   // free-flight gate on |S_c|
    double contact_threshold = 20.0; // T_c, on |S_p|
    Biquad filter_design{};          // copied per channel
};

struct PipelineOutput {
    std::array<double, 3> s_c{0.0, 0.0, 0.0};
    std::array<double, 3> s_p{0.0, 0.0, 0.0};
    bool contact = false;
    bool recalibrated = false;
    bool calibrated = false; // false while the initial hover window fills
};

// Per-whisker preprocessing: drift calibration, bandpass, contact detection.
// One pipeline per whisker (3 barometer channels); pipelines are independent.
class SignalPipeline {
public:
    explicit SignalPipeline(PipelineConfig cfg);

    // Feed one 3-channel raw sample. In Tdoc/Tdorc modes the first `window`
    // samples fill the initial hover window; outputs are flagged
    // calibrated=false until the initial fit completes.
    PipelineOutput step(const std::array<double, 3>& raw);

    // Same, but requires the initial calibration window to be complete.
    // Throws not_calibrated otherwise.
    PipelineOutput step_strict(const std::array<double, 3>& raw);

    bool calibrated() const { return calibrated_; }
    const DriftFit& drift(int channel) const { return fit_[static_cast<size_t>(channel)]; }
    int64_t tick() const { return tick_; }

private:
    void fit_all_channels();

    PipelineConfig cfg_;
    int64_t tick_ = 0;
    bool calibrated_ = false;
    bool window_clean_ = true; // no contact / large |S_c| in current window
    std::array<Biquad, 3> filt_;
    std::array<DriftFit, 3> fit_{};
    std::vector<double> win_t_;
    std::array<std::vector<double>, 3> win_raw_;
};

// FP / (FP + TN) over aligned flag sequences. ground_truth_free marks
// free-flight samples (the negatives). Throws empty_denominator when no
// negatives exist.
double fpr(std::span<const uint8_t> contacts,
           std::span<const uint8_t> ground_truth_free);

} // namespace whisker
