// tests/test_augment.cpp

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

#include <catch2/catch.hpp>
#include <cmath>
#include <optional>

#include "fairwake/augment.hpp"
#include "fairwake/dsp.hpp"
#include "fairwake/rng.hpp"

using namespace fairwake;

namespace {

Spectrogram random_power_spectrogram(int t, Pcg32& rng, double lo = 1.0,
                                     double hi = 3.0) {
  Spectrogram s;
  s.config = FrameConfig{};
  s.sample_rate = kPipelineSampleRate;
  s.values.resize(t, s.config.fft_size / 2 + 1);
  for (Eigen::Index r = 0; r < s.values.rows(); ++r)
    for (Eigen::Index c = 0; c < s.values.cols(); ++c)
      s.values(r, c) = rng.uniform(lo, hi);
  return s;
}

Waveform random_waveform(std::size_t n, Pcg32& rng, double amp = 0.4) {
  Waveform w;
  w.samples.resize(n);
  for (auto& s : w.samples) s = rng.uniform(-amp, amp);
  return w;
}

Eigen::RowVectorXd column_means(const Eigen::MatrixXd& m) {
  return m.colwise().mean();
}

Eigen::RowVectorXd column_stds(const Eigen::MatrixXd& m) {
  const Eigen::RowVectorXd mu = m.colwise().mean();
  return (m.rowwise() - mu).array().square().colwise().mean().sqrt();
}

}  // namespace

TEST_CASE("freq_mix_style with lambda 1 is the identity") {
  Pcg32 rng(101);
  const Spectrogram a = random_power_spectrogram(12, rng);
  const Spectrogram b = random_power_spectrogram(12, rng);
  const Spectrogram out = freq_mix_style_with_lambda(a, b, 1.0);
  REQUIRE((out.values - a.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("freq_mix_style with lambda 0 swaps the statistics") {
  Pcg32 rng(102);
  const Spectrogram a = random_power_spectrogram(16, rng);
  const Spectrogram b = random_power_spectrogram(16, rng, 2.0, 6.0);
  const Spectrogram out = freq_mix_style_with_lambda(a, b, 0.0);
  const Eigen::RowVectorXd mu_out = column_means(out.values);
  const Eigen::RowVectorXd sd_out = column_stds(out.values);
  const Eigen::RowVectorXd mu_b = column_means(b.values);
  const Eigen::RowVectorXd sd_b = column_stds(b.values);
  REQUIRE((mu_out - mu_b).cwiseAbs().maxCoeff() < 1e-6);
  REQUIRE((sd_out - sd_b).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("freq_mix_style at lambda 0.5 averages the statistics") {
  Pcg32 rng(103);
  const Spectrogram a = random_power_spectrogram(16, rng);
  const Spectrogram b = random_power_spectrogram(16, rng, 2.0, 5.0);
  const Spectrogram out = freq_mix_style_with_lambda(a, b, 0.5);
  const Eigen::RowVectorXd mu_expect =
      0.5 * column_means(a.values) + 0.5 * column_means(b.values);
  const Eigen::RowVectorXd sd_expect =
      0.5 * column_stds(a.values) + 0.5 * column_stds(b.values);
  REQUIRE((column_means(out.values) - mu_expect).cwiseAbs().maxCoeff() < 1e-6);
  REQUIRE((column_stds(out.values) - sd_expect).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("freq_mix_style satisfies the mixing equations by recomputation") {
  Pcg32 rng(104);
  for (int trial = 0; trial < 100; ++trial) {
    const Spectrogram a = random_power_spectrogram(10, rng);
    const Spectrogram b = random_power_spectrogram(10, rng, 1.5, 4.0);
    const double lambda = rng.next_double();
    const Spectrogram out = freq_mix_style_with_lambda(a, b, lambda);
    const Eigen::RowVectorXd mu_expect =
        lambda * column_means(a.values) + (1.0 - lambda) * column_means(b.values);
    const Eigen::RowVectorXd sd_expect =
        lambda * column_stds(a.values) + (1.0 - lambda) * column_stds(b.values);
    REQUIRE((column_means(out.values) - mu_expect).cwiseAbs().maxCoeff() < 1e-6);
    REQUIRE((column_stds(out.values) - sd_expect).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("freq_mix_style rejects shape mismatches") {
  Pcg32 rng(105);
  const Spectrogram a = random_power_spectrogram(10, rng);
  const Spectrogram b = random_power_spectrogram(11, rng);
  REQUIRE_THROWS_AS(freq_mix_style_with_lambda(a, b, 0.5), DimensionError);
}

TEST_CASE("filter_augment with all gains at 0 dB is the identity") {
  Pcg32 rng(201);
  const Spectrogram x = random_power_spectrogram(8, rng);
  FilterAugmentConfig cfg;
  cfg.gain_db_min = 0.0;
  cfg.gain_db_max = 0.0;
  const Spectrogram out = filter_augment(x, cfg, rng);
  REQUIRE((out.values - x.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("filter_augment stays inside the power-domain gain bounds") {
  Pcg32 rng(202);
  const Spectrogram x = random_power_spectrogram(8, rng);
  const double lo = std::pow(10.0, -6.0 / 10.0);
  const double hi = std::pow(10.0, 6.0 / 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Spectrogram out = filter_augment(x, FilterAugmentConfig{}, rng);
    for (Eigen::Index t = 0; t < x.values.rows(); ++t)
      for (Eigen::Index f = 0; f < x.values.cols(); ++f) {
        const double ratio = out.values(t, f) / x.values(t, f);
        REQUIRE(ratio >= lo - 1e-12);
        REQUIRE(ratio <= hi + 1e-12);
      }
  }
}

TEST_CASE("filter_augment mask matches the closed-form dB interpolation") {
  const int fft_size = 2048;
  const double nyquist = kPipelineSampleRate / 2.0;
  const Eigen::VectorXd mask = filter_augment_mask({0.0, nyquist}, {6.0, -6.0},
                                                   fft_size, kPipelineSampleRate);
  for (int i = 0; i < mask.size(); ++i) {
    const double fc = static_cast<double>(i) * kPipelineSampleRate / fft_size;
    const double gain_db = 6.0 - 12.0 * fc / nyquist;
    REQUIRE(mask(i) == Approx(std::pow(10.0, gain_db / 10.0)).margin(1e-9));
  }
}

TEST_CASE("filter_augment mask is constant over time") {
  Pcg32 rng(203);
  const Spectrogram x = random_power_spectrogram(9, rng);
  const Spectrogram out = filter_augment(x, FilterAugmentConfig{}, rng);
  for (Eigen::Index f = 0; f < x.values.cols(); ++f) {
    const double ratio0 = out.values(0, f) / x.values(0, f);
    for (Eigen::Index t = 1; t < x.values.rows(); ++t)
      REQUIRE(out.values(t, f) / x.values(t, f) == Approx(ratio0).margin(1e-12));
  }
}

TEST_CASE("filter_augment rejects infeasible layouts") {
  Pcg32 rng(204);
  const Spectrogram x = random_power_spectrogram(4, rng);
  FilterAugmentConfig cfg;
  cfg.min_bandwidth_hz = 5000.0;  // 3 bands cannot fit under 8 kHz
  REQUIRE_THROWS_AS(filter_augment(x, cfg, rng), ConfigError);
}

TEST_CASE("freq_mask with zero width is a bitwise no-op") {
  Pcg32 rng(301);
  const Spectrogram x = random_power_spectrogram(7, rng);
  const Spectrogram out = freq_mask_band(x, 40, 0, 128);
  REQUIRE((out.values.array() == x.values.array()).all());
}

TEST_CASE("freq_mask over the whole axis zeroes everything") {
  Pcg32 rng(302);
  const Spectrogram x = random_power_spectrogram(7, rng);
  const Spectrogram out = freq_mask_band(x, 0, 128, 128);
  REQUIRE(out.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("freq_mask zeroes exactly the bins inside the mel band") {
  Pcg32 rng(303);
  const Spectrogram x = random_power_spectrogram(6, rng);
  const int f0 = 10;
  const int width = 10;
  const int nu = 128;
  const Spectrogram out = freq_mask_band(x, f0, width, nu);

  const double mel_max = hz_to_mel(kPipelineSampleRate / 2.0);
  const double lo_hz = mel_to_hz(mel_max * f0 / nu);
  const double hi_hz = mel_to_hz(mel_max * (f0 + width) / nu);
  int zeroed = 0;
  for (Eigen::Index i = 0; i < x.values.cols(); ++i) {
    const double fc =
        static_cast<double>(i) * kPipelineSampleRate / x.config.fft_size;
    const bool inside = fc >= lo_hz && fc < hi_hz;
    if (inside) {
      ++zeroed;
      REQUIRE(out.values.col(i).cwiseAbs().maxCoeff() == 0.0);
    } else {
      // untouched bins are bit-identical
      REQUIRE((out.values.col(i).array() == x.values.col(i).array()).all());
    }
  }
  REQUIRE(zeroed > 0);
}

TEST_CASE("freq_mask draw with zero max width never changes the input") {
  Pcg32 rng(304);
  const Spectrogram x = random_power_spectrogram(5, rng);
  FreqMaskConfig cfg;
  cfg.max_width = 0;
  const Spectrogram out = freq_mask(x, cfg, rng);
  REQUIRE((out.values.array() == x.values.array()).all());
}

TEST_CASE("dir_convolve with a unit impulse is the identity") {
  Pcg32 rng(401);
  const Waveform w = random_waveform(2048, rng);
  ImpulseResponse h;
  h.taps = {1.0};
  const Waveform out = dir_convolve(w, h);
  REQUIRE(out.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    REQUIRE(out.samples[i] == Approx(w.samples[i]).margin(1e-9));
}

TEST_CASE("dir_convolve with a delayed impulse shifts the signal") {
  Pcg32 rng(402);
  const Waveform w = random_waveform(512, rng);
  const int lag = 37;
  ImpulseResponse h;
  h.taps.assign(lag + 1, 0.0);
  h.taps.back() = 0.7;  // peak normalization maps this to 1
  const Waveform out = dir_convolve(w, h);
  for (int i = 0; i < lag; ++i)
    REQUIRE(out.samples[static_cast<std::size_t>(i)] == Approx(0.0).margin(1e-9));
  for (std::size_t i = static_cast<std::size_t>(lag); i < w.samples.size(); ++i)
    REQUIRE(out.samples[i] ==
            Approx(w.samples[i - static_cast<std::size_t>(lag)]).margin(1e-9));
}

TEST_CASE("dir_convolve matches the direct-sum oracle") {
  Pcg32 rng(403);
  const Waveform w = random_waveform(256, rng);
  ImpulseResponse h;
  h.taps.resize(32);
  for (auto& t : h.taps) t = rng.uniform(-1.0, 1.0);
  const Waveform out = dir_convolve(w, h);

  double peak = 0.0;
  for (double t : h.taps) peak = std::max(peak, std::abs(t));
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < h.taps.size() && k <= i; ++k)
      acc += (h.taps[k] / peak) * w.samples[i - k];
    REQUIRE(out.samples[i] == Approx(acc).margin(1e-9));
  }
}

TEST_CASE("dir_convolve rejects mismatched sample rates") {
  Pcg32 rng(404);
  const Waveform w = random_waveform(128, rng);
  ImpulseResponse h;
  h.taps = {1.0};
  h.sample_rate = 8000;
  REQUIRE_THROWS_AS(dir_convolve(w, h), ConfigError);
}

TEST_CASE("apply_policy with p = 0 leaves the batch untouched") {
  Pcg32 rng(501);
  std::vector<PolicyItem> batch;
  for (int i = 0; i < 8; ++i)
    batch.push_back({random_waveform(24000, rng), i % 2});
  AugmentationPolicy policy;
  policy.apply_probability = 0.0;
  policy.enabled = {Technique::kFreqMasking};
  const auto sparse = apply_policy_sparse(batch, policy, 99);
  for (const auto& s : sparse) REQUIRE_FALSE(s.has_value());
  const auto dense = apply_policy(batch, policy, 99);
  for (std::size_t i = 0; i < batch.size(); ++i)
    REQUIRE(dense[i].samples == batch[i].wave.samples);
}

TEST_CASE("apply_policy with p = 1 and a delta DIR is a near-identity") {
  Pcg32 rng(502);
  std::vector<PolicyItem> batch;
  for (int i = 0; i < 4; ++i)
    batch.push_back({random_waveform(24000, rng), 1});
  AugmentationPolicy policy;
  policy.apply_probability = 1.0;
  policy.enabled = {Technique::kDir};
  ImpulseResponse delta;
  delta.taps = {1.0};
  policy.impulse_responses = {delta};
  const auto out = apply_policy(batch, policy, 7);
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (std::size_t s = 0; s < batch[i].wave.samples.size(); ++s)
      REQUIRE(out[i].samples[s] ==
              Approx(batch[i].wave.samples[s]).margin(1e-6));
}

TEST_CASE("apply_policy gating count sits in the binomial band") {
  Pcg32 rng(503);
  std::vector<PolicyItem> batch;
  for (int i = 0; i < 1000; ++i)
    batch.push_back({random_waveform(2000, rng), i % 2});
  AugmentationPolicy policy;
  policy.apply_probability = 0.2;
  policy.enabled = {Technique::kDir};
  ImpulseResponse delta;
  delta.taps = {1.0};
  policy.impulse_responses = {delta};
  const auto sparse = apply_policy_sparse(batch, policy, 20240517);
  int gated = 0;
  for (const auto& s : sparse) gated += s.has_value() ? 1 : 0;
  REQUIRE(gated >= 160);
  REQUIRE(gated <= 240);
}

TEST_CASE("apply_policy skips mixing when no same-label partner exists") {
  Pcg32 rng(504);
  std::vector<PolicyItem> batch;
  batch.push_back({random_waveform(24000, rng), 1});
  for (int i = 0; i < 3; ++i)
    batch.push_back({random_waveform(24000, rng), 0});
  AugmentationPolicy policy;
  policy.apply_probability = 1.0;
  policy.enabled = {Technique::kFreqMixStyle};
  const auto sparse = apply_policy_sparse(batch, policy, 3);
  REQUIRE_FALSE(sparse[0].has_value());  // lone positive: mixing skipped
  for (std::size_t i = 1; i < sparse.size(); ++i) REQUIRE(sparse[i].has_value());
}

TEST_CASE("apply_policy is reproducible and scheduling independent") {
  Pcg32 rng(505);
  std::vector<PolicyItem> batch;
  for (int i = 0; i < 10; ++i)
    batch.push_back({random_waveform(24000, rng), i % 2});
  AugmentationPolicy policy;
  policy.apply_probability = 0.7;
  policy.enabled = {Technique::kFreqMasking, Technique::kFilterAugment,
                    Technique::kFreqMixStyle};
  const auto a = apply_policy(batch, policy, 42, /*n_threads=*/1);
  const auto b = apply_policy(batch, policy, 42, /*n_threads=*/2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    REQUIRE(a[i].samples == b[i].samples);
}

TEST_CASE("magnitude augmentations preserve shape and non-negativity") {
  Pcg32 rng(506);
  const Spectrogram x = random_power_spectrogram(11, rng, 0.0, 2.0);
  const Spectrogram mix =
      freq_mix_style(x, random_power_spectrogram(11, rng, 0.0, 2.0),
                     FreqMixStyleConfig{}, rng);
  const Spectrogram fa = filter_augment(x, FilterAugmentConfig{}, rng);
  const Spectrogram fm = freq_mask(x, FreqMaskConfig{}, rng);
  for (const Spectrogram* s : {&mix, &fa, &fm}) {
    REQUIRE(s->values.rows() == x.values.rows());
    REQUIRE(s->values.cols() == x.values.cols());
    REQUIRE(s->values.minCoeff() >= 0.0);
    REQUIRE(s->values.allFinite());
  }
}

TEST_CASE("gated reconstruction reuses the analysis phase bit for bit") {
  Pcg32 rng(507);
  const Waveform w = random_waveform(24000, rng);
  const FrameConfig frame;

  detail::MagnitudeAugmentTrace trace;
  const Waveform out = detail::apply_magnitude_transform(
      w, frame,
      [&](const Spectrogram& power) {
        return freq_mask_band(power, 20, 15, 128).values;
      },
      &trace);
  REQUIRE(out.samples.size() == w.samples.size());

  // Recompute the analysis phase and the synthesis input independently; both
  // must match the trace exactly, element by element.
  const ComplexSpectrogram spec = stft(w, frame);
  const Eigen::MatrixXd phase = phase_of(spec);
  REQUIRE((trace.analysis_phase.array() == phase.array()).all());
  for (Eigen::Index t = 0; t < phase.rows(); ++t)
    for (Eigen::Index f = 0; f < phase.cols(); ++f) {
      const double mag = std::sqrt(std::max(trace.transformed_power(t, f), 0.0));
      const std::complex<double> expect(mag * std::cos(phase(t, f)),
                                        mag * std::sin(phase(t, f)));
      REQUIRE(trace.synthesis_input.frames(t, f).real() == expect.real());
      REQUIRE(trace.synthesis_input.frames(t, f).imag() == expect.imag());
    }
}

TEST_CASE("validation_perturb with infinite SNR and a delta RIR is benign") {
  Pcg32 rng(601);
  const Waveform w = random_waveform(24000, rng);
  ImpulseResponse delta;
  delta.taps = {1.0};
  Waveform noise = random_waveform(30000, rng);
  Pcg32 prng(5);
  const Waveform out = validation_perturb(
      w, noise, delta, std::numeric_limits<double>::infinity(), prng);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    REQUIRE(out.samples[i] == Approx(w.samples[i]).margin(1e-9));
}

TEST_CASE("validation_perturb at 0 dB matches signal and noise power") {
  Pcg32 rng(602);
  const Waveform w = random_waveform(24000, rng);
  ImpulseResponse rir;
  rir.taps.resize(64);
  for (auto& t : rir.taps) t = rng.uniform(-0.5, 0.5);
  Waveform noise = random_waveform(40000, rng, 0.2);

  Pcg32 prng(77);
  const Waveform reverberated = dir_convolve(w, rir);
  const Waveform out = validation_perturb(w, noise, rir, 0.0, prng);

  double p_signal = 0.0;
  double p_added = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    p_signal += reverberated.samples[i] * reverberated.samples[i];
    const double d = out.samples[i] - reverberated.samples[i];
    p_added += d * d;
  }
  REQUIRE(p_added == Approx(p_signal).epsilon(1e-6));
}

TEST_CASE("validation_perturb rejects zero-power noise at finite SNR") {
  Pcg32 rng(603);
  const Waveform w = random_waveform(1000, rng);
  ImpulseResponse delta;
  delta.taps = {1.0};
  Waveform silence;
  silence.samples.assign(2000, 0.0);
  Pcg32 prng(1);
  REQUIRE_THROWS_AS(validation_perturb(w, silence, delta, 10.0, prng),
                    ConfigError);
}

TEST_CASE("validation_perturb is deterministic under a fixed seed") {
  Pcg32 rng(604);
  const Waveform w = random_waveform(4000, rng);
  ImpulseResponse rir;
  rir.taps = {1.0, 0.4, -0.2, 0.1};
  Waveform noise = random_waveform(9000, rng, 0.3);
  Pcg32 r1(31337);
  Pcg32 r2(31337);
  const Waveform a = validation_perturb(w, noise, rir, 12.0, r1);
  const Waveform b = validation_perturb(w, noise, rir, 12.0, r2);
  REQUIRE(a.samples == b.samples);
}
