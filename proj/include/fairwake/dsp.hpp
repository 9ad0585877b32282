// fairwake/dsp.hpp

// Copyright 2026  The Fairwake Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Deterministic signal-processing kernels for the wake-word pipeline:
// STFT / inverse STFT (weighted overlap-add), power spectrogram, mel
// filterbank, and MFCC extraction with log-energy substitution. Everything
// here is a pure function of its inputs.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "fairwake/common.hpp"
#include "fairwake/wav.hpp"

namespace fairwake {

/// Pipeline audio rate. Non-16 kHz inputs are rejected at load time.
inline constexpr int kPipelineSampleRate = 16000;

/// Floor applied inside the mel-log and the log-energy, so silence maps to
/// ln(kLogFloor) instead of -inf.
inline constexpr double kLogFloor = 1e-10;

inline constexpr double kPi = 3.14159265358979323846;

enum class WindowFn { kHann };

/// Analysis framing. Defaults follow the detector front end: 100 ms window,
/// 50 ms hop, zero-padded to a 2048-point FFT.
struct FrameConfig {
  double window_ms = 100.0;
  double hop_ms = 50.0;
  int fft_size = 2048;
  WindowFn window_fn = WindowFn::kHann;
};

inline int window_samples(const FrameConfig& cfg, int sample_rate) {
  return static_cast<int>(std::lround(cfg.window_ms * sample_rate / 1000.0));
}

inline int hop_samples(const FrameConfig& cfg, int sample_rate) {
  return static_cast<int>(std::lround(cfg.hop_ms * sample_rate / 1000.0));
}

inline void validate_frame_config(const FrameConfig& cfg, int sample_rate) {
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
  const int win = window_samples(cfg, sample_rate);
  const int hop = hop_samples(cfg, sample_rate);
  if (hop <= 0 || hop > win)
    throw ConfigError("frame config requires 0 < hop_ms <= window_ms");
  if (cfg.fft_size < win)
    throw ConfigError("fft_size must be >= window length in samples");
  if (cfg.fft_size < 2 || (cfg.fft_size & (cfg.fft_size - 1)) != 0)
    throw ConfigError("fft_size must be a power of two");
}

/// T x F complex STFT. Rows are time frames, columns frequency bins
/// (F = fft_size/2 + 1).
struct ComplexSpectrogram {
  Eigen::MatrixXcd frames;
  FrameConfig config;
  int sample_rate = kPipelineSampleRate;
};

/// T x F power spectrogram, |STFT|^2.
struct Spectrogram {
  Eigen::MatrixXd values;
  FrameConfig config;
  int sample_rate = kPipelineSampleRate;
};

struct MelMatrix {
  Eigen::MatrixXd weights;  // n_mels x F
  std::vector<double> center_freqs_hz;
};

/// T x 13 MFCC matrix; column 0 carries the frame log-energy.
struct MfccFrames {
  Eigen::MatrixXd coeffs;
  FrameConfig config;
};

inline constexpr int kMfccCoeffs = 13;
inline constexpr int kMfccMelFilters = 40;

/// Periodic Hann window (COLA at 50% overlap).
inline std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / n));
  return w;
}

inline int frame_count(std::size_t n_samples, int win, int hop) {
  if (n_samples < static_cast<std::size_t>(win)) return 0;
  return static_cast<int>((n_samples - static_cast<std::size_t>(win)) /
                          static_cast<std::size_t>(hop)) +
         1;
}

/// Iterative radix-2 FFT with cached bit-reversal and twiddles. Restricted to
/// power-of-two sizes, which validate_frame_config guarantees.
class FftPlan {
 public:
  explicit FftPlan(int n) : n_(n) {
    if (n < 2 || (n & (n - 1)) != 0)
      throw ConfigError("FFT size must be a power of two >= 2");
    bitrev_.resize(static_cast<std::size_t>(n));
    int log2n = 0;
    while ((1 << log2n) < n) ++log2n;
    for (int i = 0; i < n; ++i) {
      int r = 0;
      for (int b = 0; b < log2n; ++b) r = (r << 1) | ((i >> b) & 1);
      bitrev_[static_cast<std::size_t>(i)] = r;
    }
    twiddle_.resize(static_cast<std::size_t>(n / 2));
    for (int k = 0; k < n / 2; ++k) {
      const double a = -2.0 * kPi * k / n;
      twiddle_[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
    }
  }

  int size() const { return n_; }
  void forward(std::complex<double>* a) const { run(a, false); }
  /// Inverse transform, including the 1/n scale.
  void inverse(std::complex<double>* a) const { run(a, true); }

 private:
  void run(std::complex<double>* a, bool inverse) const {
    for (int i = 0; i < n_; ++i) {
      const int j = bitrev_[static_cast<std::size_t>(i)];
      if (j > i) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n_; len <<= 1) {
      const int half = len >> 1;
      const int stride = n_ / len;
      for (int base = 0; base < n_; base += len) {
        for (int k = 0; k < half; ++k) {
          std::complex<double> w = twiddle_[static_cast<std::size_t>(k * stride)];
          if (inverse) w = std::conj(w);
          const std::complex<double> u = a[base + k];
          const std::complex<double> v = a[base + k + half] * w;
          a[base + k] = u + v;
          a[base + k + half] = u - v;
        }
      }
    }
    if (inverse) {
      const double s = 1.0 / n_;
      for (int i = 0; i < n_; ++i) a[i] *= s;
    }
  }

  int n_;
  std::vector<int> bitrev_;
  std::vector<std::complex<double>> twiddle_;
};

/// Hann-windowed, zero-padded STFT. Frame t covers samples
/// [t*hop, t*hop + win); T = floor((N - win)/hop) + 1.
inline ComplexSpectrogram stft(const Waveform& w, const FrameConfig& cfg) {
  validate_frame_config(cfg, w.sample_rate);
  const int win = window_samples(cfg, w.sample_rate);
  const int hop = hop_samples(cfg, w.sample_rate);
  if (w.samples.size() < static_cast<std::size_t>(win))
    throw std::length_error("stft: signal shorter than one analysis window");
  const int n_frames = frame_count(w.samples.size(), win, hop);
  const int n_bins = cfg.fft_size / 2 + 1;

  const std::vector<double> window = hann_window(win);
  const FftPlan plan(cfg.fft_size);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));

  ComplexSpectrogram out;
  out.config = cfg;
  out.sample_rate = w.sample_rate;
  out.frames.resize(n_frames, n_bins);
  for (int t = 0; t < n_frames; ++t) {
    const std::size_t offset = static_cast<std::size_t>(t) * hop;
    for (int i = 0; i < win; ++i)
      buf[static_cast<std::size_t>(i)] = w.samples[offset + i] *
                                         window[static_cast<std::size_t>(i)];
    std::fill(buf.begin() + win, buf.end(), std::complex<double>(0.0, 0.0));
    plan.forward(buf.data());
    for (int f = 0; f < n_bins; ++f) out.frames(t, f) = buf[static_cast<std::size_t>(f)];
  }
  return out;
}

/// Weighted overlap-add inverse STFT with window-square normalization.
/// Output covers exactly the analyzed span, (T-1)*hop + win samples.
/// Requires hop <= win/2 (Hann at 50% overlap or denser), otherwise the
/// normalizer vanishes between frames.
inline Waveform istft(const ComplexSpectrogram& s) {
  const FrameConfig& cfg = s.config;
  validate_frame_config(cfg, s.sample_rate);
  const int win = window_samples(cfg, s.sample_rate);
  const int hop = hop_samples(cfg, s.sample_rate);
  if (2 * hop > win)
    throw ConfigError("istft: hop must be <= half the window for COLA synthesis");
  const int n_frames = static_cast<int>(s.frames.rows());
  const int n_bins = cfg.fft_size / 2 + 1;
  if (n_frames < 1 || s.frames.cols() != n_bins)
    throw DimensionError("istft: spectrogram shape does not match frame config");

  const std::vector<double> window = hann_window(win);
  const FftPlan plan(cfg.fft_size);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));

  const std::size_t out_len =
      static_cast<std::size_t>(n_frames - 1) * hop + static_cast<std::size_t>(win);
  std::vector<double> num(out_len, 0.0);
  std::vector<double> den(out_len, 0.0);

  for (int t = 0; t < n_frames; ++t) {
    for (int f = 0; f < n_bins; ++f) buf[static_cast<std::size_t>(f)] = s.frames(t, f);
    for (int f = n_bins; f < cfg.fft_size; ++f)
      buf[static_cast<std::size_t>(f)] = std::conj(buf[static_cast<std::size_t>(cfg.fft_size - f)]);
    plan.inverse(buf.data());
    const std::size_t offset = static_cast<std::size_t>(t) * hop;
    for (int i = 0; i < win; ++i) {
      const double wi = window[static_cast<std::size_t>(i)];
      num[offset + i] += wi * buf[static_cast<std::size_t>(i)].real();
      den[offset + i] += wi * wi;
    }
  }

  Waveform out;
  out.sample_rate = s.sample_rate;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i)
    out.samples[i] = den[i] > 1e-10 ? num[i] / den[i] : 0.0;
  return out;
}

/// Element-wise squared magnitude.
inline Spectrogram power_spectrogram(const ComplexSpectrogram& s) {
  Spectrogram out;
  out.config = s.config;
  out.sample_rate = s.sample_rate;
  out.values = s.frames.array().abs2();
  return out;
}

inline Eigen::MatrixXd phase_of(const ComplexSpectrogram& s) {
  return s.frames.array().arg();
}

/// Rebuilds a complex spectrogram as sqrt(power) * exp(i*phase). The phase
/// matrix is used as-is so reconstruction stays phase-preserving.
inline ComplexSpectrogram from_power_and_phase(const Eigen::MatrixXd& power,
                                               const Eigen::MatrixXd& phase,
                                               const FrameConfig& cfg,
                                               int sample_rate) {
  if (power.rows() != phase.rows() || power.cols() != phase.cols())
    throw DimensionError("from_power_and_phase: power/phase shape mismatch");
  ComplexSpectrogram out;
  out.config = cfg;
  out.sample_rate = sample_rate;
  out.frames.resize(power.rows(), power.cols());
  for (Eigen::Index t = 0; t < power.rows(); ++t) {
    for (Eigen::Index f = 0; f < power.cols(); ++f) {
      const double mag = std::sqrt(std::max(power(t, f), 0.0));
      out.frames(t, f) = std::complex<double>(mag * std::cos(phase(t, f)),
                                              mag * std::sin(phase(t, f)));
    }
  }
  return out;
}

inline double hz_to_mel(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

/// Triangular mel filterbank with centers equally spaced on the mel scale
/// over [0, Nyquist]. Rows are filters, columns FFT bins; weights are
/// evaluated at bin center frequencies, no area normalization.
inline MelMatrix mel_filterbank(int fft_size, int n_mels, int sample_rate) {
  if (n_mels < 1) throw ConfigError("mel_filterbank: n_mels must be >= 1");
  if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0)
    throw ConfigError("mel_filterbank: fft_size must be a power of two");
  const int n_bins = fft_size / 2 + 1;
  const double nyquist = sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);

  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (int k = 0; k < n_mels + 2; ++k)
    edges[static_cast<std::size_t>(k)] = mel_to_hz(mel_max * k / (n_mels + 1));

  MelMatrix mel;
  mel.weights = Eigen::MatrixXd::Zero(n_mels, n_bins);
  mel.center_freqs_hz.resize(static_cast<std::size_t>(n_mels));
  for (int j = 0; j < n_mels; ++j) {
    const double lo = edges[static_cast<std::size_t>(j)];
    const double mid = edges[static_cast<std::size_t>(j) + 1];
    const double hi = edges[static_cast<std::size_t>(j) + 2];
    mel.center_freqs_hz[static_cast<std::size_t>(j)] = mid;
    bool any = false;
    for (int i = 0; i < n_bins; ++i) {
      const double fc = static_cast<double>(i) * sample_rate / fft_size;
      double w = 0.0;
      if (fc >= lo && fc <= mid && mid > lo)
        w = (fc - lo) / (mid - lo);
      else if (fc > mid && fc <= hi && hi > mid)
        w = (hi - fc) / (hi - mid);
      if (w > 0.0) any = true;
      mel.weights(j, i) = w;
    }
    if (!any)
      throw ConfigError(
          "mel_filterbank: filter " + std::to_string(j) +
          " covers no FFT bin; n_mels too large for this fft_size");
  }
  return mel;
}

/// Orthonormal DCT-II matrix, n_out x n_in.
inline Eigen::MatrixXd dct2_matrix(int n_out, int n_in) {
  Eigen::MatrixXd d(n_out, n_in);
  const double s0 = std::sqrt(1.0 / n_in);
  const double sk = std::sqrt(2.0 / n_in);
  for (int k = 0; k < n_out; ++k)
    for (int m = 0; m < n_in; ++m)
      d(k, m) = (k == 0 ? s0 : sk) *
                std::cos(kPi * k * (2.0 * m + 1.0) / (2.0 * n_in));
  return d;
}

/// 13 MFCCs per frame: power spectrum -> 40 mel energies -> ln(e + floor) ->
/// orthonormal DCT-II, keep the first 13 coefficients; coefficient 0 is then
/// replaced by ln(raw frame energy + floor).
inline MfccFrames mfcc_features(const Waveform& w, const FrameConfig& cfg,
                                int n_mels = kMfccMelFilters,
                                int n_coeffs = kMfccCoeffs) {
  const ComplexSpectrogram spec = stft(w, cfg);
  const Spectrogram power = power_spectrogram(spec);
  const MelMatrix mel = mel_filterbank(cfg.fft_size, n_mels, w.sample_rate);
  const Eigen::MatrixXd dct = dct2_matrix(n_coeffs, n_mels);

  const int win = window_samples(cfg, w.sample_rate);
  const int hop = hop_samples(cfg, w.sample_rate);
  const int n_frames = static_cast<int>(power.values.rows());

  MfccFrames out;
  out.config = cfg;
  out.coeffs.resize(n_frames, n_coeffs);
  for (int t = 0; t < n_frames; ++t) {
    const Eigen::VectorXd energies = mel.weights * power.values.row(t).transpose();
    const Eigen::VectorXd log_energies =
        (energies.array() + kLogFloor).log().matrix();
    out.coeffs.row(t) = (dct * log_energies).transpose();

    const std::size_t offset = static_cast<std::size_t>(t) * hop;
    double frame_energy = 0.0;
    for (int i = 0; i < win; ++i) {
      const double x = w.samples[offset + i];
      frame_energy += x * x;
    }
    out.coeffs(t, 0) = std::log(frame_energy + kLogFloor);
  }
  return out;
}

}  // namespace fairwake
