// fairwake/augment.hpp

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

// Spectrum- and time-domain training augmentations (FreqMixStyle,
// FilterAugment, frequency masking, device-IR convolution), the
// probability-gated batch policy, and the noise+reverb validation
// perturbation. Magnitude-domain transforms run on the power spectrogram and
// reconstruct through the inverse STFT with the original phase.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "fairwake/common.hpp"
#include "fairwake/dsp.hpp"
#include "fairwake/parallel.hpp"
#include "fairwake/rng.hpp"

namespace fairwake {

/// Stabilizer floor for the per-frequency std in FreqMixStyle. Applied as
/// max(sigma, eps) so non-degenerate bins renormalize exactly.
inline constexpr double kMixStyleSigmaFloor = 1e-5;

struct FreqMixStyleConfig {
  double alpha = 0.4;
  bool same_label_only = true;
};

struct FilterAugmentConfig {
  int n_bands_min = 3;
  int n_bands_max = 9;
  double min_bandwidth_hz = 187.0;
  double gain_db_min = -6.0;
  double gain_db_max = 6.0;
};

struct FreqMaskConfig {
  int max_width = 30;        // W_F, in mel channels
  int n_mel_channels = 128;  // nu
};

struct ImpulseResponse {
  std::vector<double> taps;
  int sample_rate = kPipelineSampleRate;
  std::string source_id;
};

enum class Technique { kFreqMixStyle, kFilterAugment, kFreqMasking, kDir };

struct AugmentationPolicy {
  double apply_probability = 0.2;
  std::vector<Technique> enabled;
  FreqMixStyleConfig freq_mix_style;
  FilterAugmentConfig filter_augment;
  FreqMaskConfig freq_masking;
  std::vector<ImpulseResponse> impulse_responses;
  bool allow_stacking = false;  // off: one technique per gated sample
  FrameConfig frame;
};

// ---------------------------------------------------------------------------
// FreqMixStyle

/// Deterministic core with an explicit interpolation weight. Per frequency
/// bin, x_i is normalized over time (population moments) and rescaled to the
/// Beta-mixed statistics of x_i and x_j. Output is clamped at zero to keep
/// the power-domain invariant.
inline Spectrogram freq_mix_style_with_lambda(const Spectrogram& x_i,
                                              const Spectrogram& x_j,
                                              double lambda) {
  if (x_i.values.rows() != x_j.values.rows() ||
      x_i.values.cols() != x_j.values.cols())
    throw DimensionError("freq_mix_style: spectrogram shapes differ");

  const Eigen::RowVectorXd mu_i = x_i.values.colwise().mean();
  const Eigen::RowVectorXd mu_j = x_j.values.colwise().mean();
  const Eigen::MatrixXd centered = x_i.values.rowwise() - mu_i;
  const Eigen::RowVectorXd sigma_i =
      centered.array().square().colwise().mean().sqrt();
  const Eigen::RowVectorXd sigma_j = (x_j.values.rowwise() - mu_j)
                                         .array()
                                         .square()
                                         .colwise()
                                         .mean()
                                         .sqrt();

  const Eigen::RowVectorXd mu_new = lambda * mu_i + (1.0 - lambda) * mu_j;
  const Eigen::RowVectorXd sigma_new =
      lambda * sigma_i + (1.0 - lambda) * sigma_j;

  const Eigen::RowVectorXd denom = sigma_i.cwiseMax(kMixStyleSigmaFloor);
  const Eigen::RowVectorXd scale =
      sigma_new.cwiseMax(kMixStyleSigmaFloor).cwiseQuotient(denom);

  Spectrogram out;
  out.config = x_i.config;
  out.sample_rate = x_i.sample_rate;
  out.values = ((centered.array().rowwise() * scale.array()).rowwise() +
                mu_new.array())
                   .cwiseMax(0.0)
                   .matrix();
  return out;
}

inline Spectrogram freq_mix_style(const Spectrogram& x_i, const Spectrogram& x_j,
                                  const FreqMixStyleConfig& cfg, Pcg32& rng) {
  if (!(cfg.alpha > 0.0))
    throw ConfigError("freq_mix_style: alpha must be positive");
  const double lambda = rng.beta(cfg.alpha, cfg.alpha);
  return freq_mix_style_with_lambda(x_i, x_j, lambda);
}

// ---------------------------------------------------------------------------
// FilterAugment

/// Per-bin power weights for a piecewise-linear dB gain curve with nodes at
/// the given boundary frequencies (must start at 0 and end at Nyquist).
inline Eigen::VectorXd filter_augment_mask(const std::vector<double>& boundaries_hz,
                                           const std::vector<double>& gains_db,
                                           int fft_size, int sample_rate) {
  if (boundaries_hz.size() < 2 || boundaries_hz.size() != gains_db.size())
    throw ConfigError("filter_augment_mask: need one gain per boundary, >= 2 nodes");
  const double nyquist = sample_rate / 2.0;
  if (boundaries_hz.front() != 0.0 || boundaries_hz.back() != nyquist)
    throw ConfigError("filter_augment_mask: boundaries must span [0, Nyquist]");
  const int n_bins = fft_size / 2 + 1;
  Eigen::VectorXd mask(n_bins);
  std::size_t seg = 0;
  for (int i = 0; i < n_bins; ++i) {
    const double fc = static_cast<double>(i) * sample_rate / fft_size;
    while (seg + 2 < boundaries_hz.size() && fc > boundaries_hz[seg + 1]) ++seg;
    const double lo = boundaries_hz[seg];
    const double hi = boundaries_hz[seg + 1];
    const double t = hi > lo ? std::clamp((fc - lo) / (hi - lo), 0.0, 1.0) : 0.0;
    const double gain_db = gains_db[seg] + t * (gains_db[seg + 1] - gains_db[seg]);
    mask(i) = std::pow(10.0, gain_db / 10.0);  // power-domain weight
  }
  return mask;
}

/// Samples n in [n_bands_min, n_bands_max] bands whose boundaries on the
/// linear-Hz axis keep the minimum bandwidth, draws a node gain at every
/// boundary (edges included) and applies the linearly interpolated dB curve.
/// The mask is constant over time.
inline Spectrogram filter_augment(const Spectrogram& x,
                                  const FilterAugmentConfig& cfg, Pcg32& rng) {
  if (cfg.n_bands_min < 1 || cfg.n_bands_max < cfg.n_bands_min)
    throw ConfigError("filter_augment: bad band count range");
  if (!(cfg.min_bandwidth_hz > 0.0))
    throw ConfigError("filter_augment: min bandwidth must be positive");
  const double nyquist = x.sample_rate / 2.0;
  if (nyquist < cfg.n_bands_min * cfg.min_bandwidth_hz)
    throw ConfigError("filter_augment: infeasible band layout for this rate");

  std::vector<double> boundaries;
  constexpr int kMaxCountResamples = 50;
  constexpr int kMaxLayoutAttempts = 100;
  for (int outer = 0; outer < kMaxCountResamples && boundaries.empty(); ++outer) {
    const int n_bands = rng.uniform_int(cfg.n_bands_min, cfg.n_bands_max);
    if (nyquist < n_bands * cfg.min_bandwidth_hz) continue;
    for (int attempt = 0; attempt < kMaxLayoutAttempts; ++attempt) {
      std::vector<double> b(static_cast<std::size_t>(n_bands) + 1);
      b.front() = 0.0;
      b.back() = nyquist;
      for (int k = 1; k < n_bands; ++k)
        b[static_cast<std::size_t>(k)] = rng.uniform(0.0, nyquist);
      std::sort(b.begin() + 1, b.end() - 1);
      bool ok = true;
      for (std::size_t k = 1; k < b.size(); ++k)
        if (b[k] - b[k - 1] < cfg.min_bandwidth_hz) {
          ok = false;
          break;
        }
      if (ok) {
        boundaries = std::move(b);
        break;
      }
    }
  }
  if (boundaries.empty())
    throw ConfigError("filter_augment: could not sample a feasible band layout");

  std::vector<double> gains(boundaries.size());
  for (auto& g : gains) g = rng.uniform(cfg.gain_db_min, cfg.gain_db_max);

  const Eigen::VectorXd mask =
      filter_augment_mask(boundaries, gains, x.config.fft_size, x.sample_rate);
  if (mask.size() != x.values.cols())
    throw DimensionError("filter_augment: mask/spectrogram bin mismatch");

  Spectrogram out;
  out.config = x.config;
  out.sample_rate = x.sample_rate;
  out.values = x.values.array().rowwise() * mask.transpose().array();
  return out;
}

// ---------------------------------------------------------------------------
// Frequency masking

/// Zeroes every linear-frequency bin whose center falls inside the mel-channel
/// band [f0, f0 + width) on the nu-channel axis. Bins outside the band are
/// bit-identical to the input. A band reaching the top channel includes the
/// Nyquist bin.
inline Spectrogram freq_mask_band(const Spectrogram& x, int f0, int width,
                                  int nu) {
  if (nu < 1) throw ConfigError("freq_mask: nu must be >= 1");
  if (width < 0 || f0 < 0 || f0 + width > nu)
    throw ConfigError("freq_mask: band outside the mel axis");
  Spectrogram out = x;
  if (width == 0) return out;

  const double nyquist = x.sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  const double lo_hz = mel_to_hz(mel_max * f0 / nu);
  const bool to_top = (f0 + width == nu);
  const double hi_hz = to_top ? std::numeric_limits<double>::infinity()
                              : mel_to_hz(mel_max * (f0 + width) / nu);
  for (Eigen::Index i = 0; i < out.values.cols(); ++i) {
    const double fc = static_cast<double>(i) * x.sample_rate / x.config.fft_size;
    if (fc >= lo_hz && fc < hi_hz) out.values.col(i).setZero();
  }
  return out;
}

/// Draws width ~ U{0..W_F} and start ~ U{0..nu-width} on the nu-channel mel
/// axis; width 0 is a legal no-op.
inline Spectrogram freq_mask(const Spectrogram& x, const FreqMaskConfig& cfg,
                             Pcg32& rng) {
  if (cfg.n_mel_channels < 1)
    throw ConfigError("freq_mask: n_mel_channels must be >= 1");
  if (cfg.max_width < 0 || cfg.max_width > cfg.n_mel_channels)
    throw ConfigError("freq_mask: max_width must be in [0, nu]");
  const int width = rng.uniform_int(0, cfg.max_width);
  const int f0 = rng.uniform_int(0, cfg.n_mel_channels - width);
  return freq_mask_band(x, f0, width, cfg.n_mel_channels);
}

// ---------------------------------------------------------------------------
// Device impulse response

/// Full linear convolution with a peak-normalized impulse response, truncated
/// to the input length. FFT-based; the direct-sum path lives in tests as the
/// oracle.
inline Waveform dir_convolve(const Waveform& w, const ImpulseResponse& h) {
  if (h.sample_rate != w.sample_rate)
    throw ConfigError("dir_convolve: sample-rate mismatch");
  if (h.taps.empty()) throw ConfigError("dir_convolve: empty impulse response");
  double peak = 0.0;
  for (double t : h.taps) peak = std::max(peak, std::abs(t));
  if (peak == 0.0)
    throw ConfigError("dir_convolve: impulse response has no nonzero tap");

  const std::size_t n = w.samples.size();
  const std::size_t k = h.taps.size();
  std::size_t fft_n = 1;
  while (fft_n < n + k - 1) fft_n <<= 1;
  fft_n = std::max<std::size_t>(fft_n, 2);

  const FftPlan plan(static_cast<int>(fft_n));
  std::vector<std::complex<double>> a(fft_n, {0.0, 0.0});
  std::vector<std::complex<double>> b(fft_n, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) a[i] = w.samples[i];
  for (std::size_t i = 0; i < k; ++i) b[i] = h.taps[i] / peak;
  plan.forward(a.data());
  plan.forward(b.data());
  for (std::size_t i = 0; i < fft_n; ++i) a[i] *= b[i];
  plan.inverse(a.data());

  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = a[i].real();
  return out;
}

// ---------------------------------------------------------------------------
// Batch policy

struct PolicyItem {
  Waveform wave;
  int label = 0;
};

namespace detail {

struct MagnitudeAugmentTrace {
  Eigen::MatrixXd analysis_phase;
  Eigen::MatrixXd transformed_power;
  ComplexSpectrogram synthesis_input;
};

/// waveform -> STFT -> power transform -> phase-preserving ISTFT, resized to
/// the input length. The optional trace exposes the synthesis input so tests
/// can assert bit-exact phase preservation.
inline Waveform apply_magnitude_transform(
    const Waveform& w, const FrameConfig& frame,
    const std::function<Eigen::MatrixXd(const Spectrogram&)>& transform,
    MagnitudeAugmentTrace* trace = nullptr) {
  const ComplexSpectrogram spec = stft(w, frame);
  const Spectrogram power = power_spectrogram(spec);
  const Eigen::MatrixXd phase = phase_of(spec);
  const Eigen::MatrixXd transformed = transform(power);
  const ComplexSpectrogram synth =
      from_power_and_phase(transformed, phase, frame, w.sample_rate);
  Waveform out = istft(synth);
  out.samples.resize(w.samples.size(), 0.0);
  if (trace != nullptr) {
    trace->analysis_phase = phase;
    trace->transformed_power = transformed;
    trace->synthesis_input = synth;
  }
  return out;
}

}  // namespace detail

inline void validate_policy(const AugmentationPolicy& policy) {
  if (policy.apply_probability < 0.0 || policy.apply_probability > 1.0)
    throw ConfigError("policy: apply_probability must be in [0, 1]");
  for (Technique t : policy.enabled) {
    if (t == Technique::kDir && policy.impulse_responses.empty())
      throw ConfigError("policy: DIR enabled but no impulse responses loaded");
    if (t == Technique::kFreqMixStyle && !(policy.freq_mix_style.alpha > 0.0))
      throw ConfigError("policy: FreqMixStyle alpha must be positive");
  }
  if (policy.freq_masking.max_width < 0 ||
      policy.freq_masking.max_width > policy.freq_masking.n_mel_channels)
    throw ConfigError("policy: freq mask width must be in [0, nu]");
}

/// Gated augmentation over a batch. Each sample i is gated by Bernoulli(p) on
/// its own RNG stream derived from (seed, i), so results are independent of
/// scheduling. Returns one entry per item; nullopt means the sample was left
/// untouched (not gated, no same-label partner, or too short to frame).
inline std::vector<std::optional<Waveform>> apply_policy_sparse(
    const std::vector<PolicyItem>& batch, const AugmentationPolicy& policy,
    std::uint64_t seed, int n_threads = 1) {
  validate_policy(policy);
  const int n = static_cast<int>(batch.size());
  if (n == 0) throw ConfigError("apply_policy: empty batch");

  struct Decision {
    bool gated = false;
    std::vector<Technique> techniques;
    int partner = -1;
    Pcg32 rng{0};
  };

  std::vector<Decision> decisions(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Decision& d = decisions[static_cast<std::size_t>(i)];
    d.rng = Pcg32(derive_stream(seed, static_cast<std::uint64_t>(i)));
    if (policy.enabled.empty()) continue;
    d.gated = d.rng.next_double() < policy.apply_probability;
    if (!d.gated) continue;
    if (policy.allow_stacking) {
      d.techniques = policy.enabled;
    } else {
      d.techniques.push_back(
          policy.enabled[static_cast<std::size_t>(d.rng.uniform_int(
              0, static_cast<int>(policy.enabled.size()) - 1))]);
    }
    const bool wants_mix =
        std::find(d.techniques.begin(), d.techniques.end(),
                  Technique::kFreqMixStyle) != d.techniques.end();
    if (wants_mix) {
      std::vector<int> partners;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        if (!policy.freq_mix_style.same_label_only ||
            batch[static_cast<std::size_t>(j)].label ==
                batch[static_cast<std::size_t>(i)].label)
          partners.push_back(j);
      }
      if (partners.empty()) {
        if (d.techniques.size() == 1) {
          d.gated = false;  // skip mixing for this sample, no error
          continue;
        }
        d.techniques.erase(std::remove(d.techniques.begin(), d.techniques.end(),
                                       Technique::kFreqMixStyle),
                           d.techniques.end());
      } else {
        d.partner = partners[static_cast<std::size_t>(
            d.rng.uniform_int(0, static_cast<int>(partners.size()) - 1))];
      }
    }
  }

  std::vector<std::optional<Waveform>> out(static_cast<std::size_t>(n));
  const int win = window_samples(policy.frame, kPipelineSampleRate);
  parallel_for(n, n_threads, [&](int i) {
    Decision d = decisions[static_cast<std::size_t>(i)];
    if (!d.gated) return;
    const Waveform& wave = batch[static_cast<std::size_t>(i)].wave;

    Waveform current = wave;
    bool touched = false;
    for (Technique t : d.techniques) {
      if (t == Technique::kDir) {
        const auto& pool = policy.impulse_responses;
        const ImpulseResponse& ir = pool[static_cast<std::size_t>(
            d.rng.uniform_int(0, static_cast<int>(pool.size()) - 1))];
        current = dir_convolve(current, ir);
        touched = true;
        continue;
      }
      if (current.samples.size() < static_cast<std::size_t>(win)) {
        log::warn("apply_policy: sample too short to frame, left untouched");
        break;
      }
      auto transform = [&](const Spectrogram& power) -> Eigen::MatrixXd {
        switch (t) {
          case Technique::kFreqMixStyle: {
            const Spectrogram partner_power = power_spectrogram(
                stft(batch[static_cast<std::size_t>(d.partner)].wave,
                     policy.frame));
            return freq_mix_style(power, partner_power, policy.freq_mix_style,
                                  d.rng)
                .values;
          }
          case Technique::kFilterAugment:
            return filter_augment(power, policy.filter_augment, d.rng).values;
          case Technique::kFreqMasking:
            return freq_mask(power, policy.freq_masking, d.rng).values;
          default:
            return power.values;
        }
      };
      current = detail::apply_magnitude_transform(current, policy.frame, transform);
      touched = true;
    }
    if (touched) out[static_cast<std::size_t>(i)] = std::move(current);
  });
  return out;
}

/// Dense variant: untouched samples are copied through.
inline std::vector<Waveform> apply_policy(const std::vector<PolicyItem>& batch,
                                          const AugmentationPolicy& policy,
                                          std::uint64_t seed, int n_threads = 1) {
  auto sparse = apply_policy_sparse(batch, policy, seed, n_threads);
  std::vector<Waveform> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i)
    out.push_back(sparse[i].has_value() ? std::move(*sparse[i]) : batch[i].wave);
  return out;
}

// ---------------------------------------------------------------------------
// Validation perturbation

/// Reverberates with the (peak-normalized, truncated) RIR, then adds a noise
/// segment scaled to the requested SNR computed from the two signal powers.
/// snr_db = +inf disables the noise term. The rng picks the noise offset.
inline Waveform validation_perturb(const Waveform& w, const Waveform& noise,
                                   const ImpulseResponse& rir, double snr_db,
                                   Pcg32& rng) {
  Waveform reverberated = dir_convolve(w, rir);
  if (std::isinf(snr_db) && snr_db > 0.0) return reverberated;
  if (noise.sample_rate != w.sample_rate)
    throw ConfigError("validation_perturb: noise sample-rate mismatch");
  if (noise.samples.empty())
    throw ConfigError("validation_perturb: empty noise signal");

  const std::size_t n = w.samples.size();
  std::vector<double> segment(n);
  if (noise.samples.size() >= n) {
    const std::size_t offset = static_cast<std::size_t>(rng.uniform_int(
        0, static_cast<int>(noise.samples.size() - n)));
    std::copy(noise.samples.begin() + static_cast<std::ptrdiff_t>(offset),
              noise.samples.begin() + static_cast<std::ptrdiff_t>(offset + n),
              segment.begin());
  } else {
    const std::size_t start = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(noise.samples.size()) - 1));
    for (std::size_t i = 0; i < n; ++i)
      segment[i] = noise.samples[(start + i) % noise.samples.size()];
  }

  double p_signal = 0.0;
  double p_noise = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p_signal += reverberated.samples[i] * reverberated.samples[i];
    p_noise += segment[i] * segment[i];
  }
  p_signal /= static_cast<double>(n);
  p_noise /= static_cast<double>(n);
  if (p_noise <= 0.0)
    throw ConfigError("validation_perturb: zero-power noise with finite SNR");

  const double scale = std::sqrt(p_signal / (p_noise * std::pow(10.0, snr_db / 10.0)));
  for (std::size_t i = 0; i < n; ++i)
    reverberated.samples[i] += scale * segment[i];
  return reverberated;
}

}  // namespace fairwake
