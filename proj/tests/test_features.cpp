#include <catch2/catch.hpp>

#include <cmath>

#include "qot/datagen.hpp"
#include "qot/features.hpp"
#include "qot/rng.hpp"

using namespace qot;

namespace {

Scenario scenario_with(std::vector<double> span_lengths,
                       std::vector<std::pair<Payload, double>> chans, std::size_t cut) {
  Scenario s;
  for (double len : span_lengths) s.link.spans.push_back({len, 0.2, 1.3, 16.7});
  for (const auto& [p, f] : chans) s.plan.channels.push_back(make_channel(p, f, 0.0));
  s.plan.cut_index = cut;
  s.plan.channels[cut].is_cut = true;
  return s;
}

double cumsum_mean(const std::vector<double>& x) {
  double run = 0.0, total = 0.0;
  for (double v : x) {
    run += v;
    total += run;
  }
  return total / x.size();
}

}  // namespace

TEST_CASE("span aggregates") {
  const Scenario a = scenario_with({80, 80, 80}, {{Payload::Qpsk100G, 193.7}}, 0);
  const FeatureVector fa = extract(a);
  CHECK(fa[0] == 3.0);
  CHECK(fa[1] == Approx(80.0));
  CHECK(fa[4] == Approx(0.0).margin(1e-12));   // variance
  CHECK(fa[5] == Approx(160.0));               // cumsum mean

  const Scenario b = scenario_with({10, 120}, {{Payload::Qpsk100G, 193.7}}, 0);
  const FeatureVector fb = extract(b);
  CHECK(fb[1] == Approx(65.0));
  CHECK(fb[2] == Approx(10.0));
  CHECK(fb[3] == Approx(120.0));
  CHECK(fb[5] == Approx(70.0));  // (10 + 130) / 2
}

TEST_CASE("CUT alone in band: sentinel neighbors, one occupied window") {
  const Scenario s = scenario_with({80}, {{Payload::Qpsk100G, 193.7}}, 0);
  const FeatureVector f = extract(s);
  // neighbor slots [2L, 1L, 1R, 2R]: (rate, power, distance)
  for (int slot = 0; slot < 4; ++slot) {
    CHECK(f[neighbor_block_offset + 3 * slot] == 0.0);
    CHECK(f[neighbor_block_offset + 3 * slot + 1] == absent_neighbor_power_dbm);
  }
  CHECK(f[neighbor_block_offset + 2] == -absent_neighbor_distance_ghz);
  CHECK(f[neighbor_block_offset + 5] == -absent_neighbor_distance_ghz);
  CHECK(f[neighbor_block_offset + 8] == absent_neighbor_distance_ghz);
  CHECK(f[neighbor_block_offset + 11] == absent_neighbor_distance_ghz);
  // only the CUT's own 150 GHz window is occupied
  for (int w = 0; w < 10; ++w)
    CHECK(f[window_block_offset + w] == (w == 5 ? 1.0 : 0.0));
  CHECK(f[10] == 1.0);  // total channel count
}

TEST_CASE("neighbor block carries rate, power, signed distance") {
  Scenario s = scenario_with({80},
                             {{Payload::Qpsk100G, 193.60},
                              {Payload::Qpsk200G, 193.6625},
                              {Payload::Qpsk100G, 193.7250},
                              {Payload::Qpsk100G, 193.7750}},
                             2);
  s.plan.channels[1].launch_power = -3.0;
  const FeatureVector f = extract(s);
  // 2nd-left at 193.60: 35 GBd, distance -125 GHz
  CHECK(f[neighbor_block_offset + 0] == 35.0);
  CHECK(f[neighbor_block_offset + 2] == Approx(-125.0));
  // 1st-left at 193.6625: 69 GBd at -3 dBm, distance -62.5 GHz
  CHECK(f[neighbor_block_offset + 3] == 69.0);
  CHECK(f[neighbor_block_offset + 4] == -3.0);
  CHECK(f[neighbor_block_offset + 5] == Approx(-62.5));
  // 1st-right at 193.775: +50 GHz
  CHECK(f[neighbor_block_offset + 8] == Approx(50.0));
  // 2nd-right absent
  CHECK(f[neighbor_block_offset + 9] == 0.0);
  CHECK(f[neighbor_block_offset + 11] == absent_neighbor_distance_ghz);

  CHECK(f[8] == 35.0);                  // CUT symbol rate
  CHECK(f[9] == Approx(25.0));          // CUT offset from band centre, GHz
  CHECK(f[11] == Approx((50 + 75 + 50 + 50) / c_band_width_ghz));
}

TEST_CASE("window counts never exceed the total channel count") {
  GenConfig cfg;
  cfg.base_seed = 5;
  cfg.n_records = 50;
  for (std::size_t i = 0; i < cfg.n_records; ++i) {
    const FeatureVector f = extract(generate_scenario(cfg, i));
    double in_windows = 0.0;
    for (int w = 0; w < 10; ++w) {
      in_windows += f[window_block_offset + w];
      CHECK(f[window_block_offset + w] >= 0.0);
      CHECK(f[window_block_offset + w] == std::floor(f[window_block_offset + w]));
    }
    CHECK(in_windows <= f[10]);
    CHECK(f[11] >= 0.0);
    CHECK(f[11] <= 1.0);
  }
}

TEST_CASE("cumulative-sum reversal identity") {
  RngEngine eng = make_engine(17, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = static_cast<int>(uniform_int(eng, 1, 60));
    std::vector<double> x(n);
    double sum = 0.0;
    for (double& v : x) {
      v = static_cast<double>(uniform_int(eng, 10, 120));
      sum += v;
    }
    std::vector<double> rev(x.rbegin(), x.rend());
    const double lhs = cumsum_mean(x) + cumsum_mean(rev);
    const double rhs = (1.0 + 1.0 / n) * sum;
    CHECK(lhs == Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("extract is invariant under channel permutation") {
  GenConfig cfg;
  cfg.base_seed = 23;
  cfg.n_records = 20;
  RngEngine eng = make_engine(29, 0);
  for (std::size_t i = 0; i < cfg.n_records; ++i) {
    Scenario s = generate_scenario(cfg, i);
    const FeatureVector base = extract(s);
    shuffle(eng, s.plan.channels);
    for (std::size_t k = 0; k < s.plan.channels.size(); ++k)
      if (s.plan.channels[k].is_cut) s.plan.cut_index = k;
    const FeatureVector shuffled = extract(s);
    for (std::size_t k = 0; k < feature_count; ++k) CHECK(base[k] == shuffled[k]);
  }
}

TEST_CASE("normalizer fits z-scores on the training split") {
  GenConfig cfg;
  cfg.base_seed = 31;
  cfg.n_records = 300;
  std::vector<FeatureVector> features;
  std::vector<double> etas;
  for (std::size_t i = 0; i < cfg.n_records; ++i) {
    const LabeledRecord rec = generate_record(cfg, i);
    features.push_back(extract(rec.scenario));
    etas.push_back(rec.eta);
  }
  const NormStats stats = fit_normalizer(features, etas);

  // self-normalization: per-feature mean 0, std 1 (unless the column is constant)
  std::array<double, feature_count> mean{}, var{};
  for (const FeatureVector& f : features) {
    const FeatureVector z = normalize(f, stats);
    for (std::size_t k = 0; k < feature_count; ++k) mean[k] += z[k];
  }
  for (std::size_t k = 0; k < feature_count; ++k) mean[k] /= features.size();
  for (const FeatureVector& f : features) {
    const FeatureVector z = normalize(f, stats);
    for (std::size_t k = 0; k < feature_count; ++k)
      var[k] += (z[k] - mean[k]) * (z[k] - mean[k]);
  }
  for (std::size_t k = 0; k < feature_count; ++k) {
    CHECK(std::abs(mean[k]) < 1e-9);
    const double sd = std::sqrt(var[k] / features.size());
    if (stats.stddev[k] > stddev_floor) CHECK(sd == Approx(1.0).epsilon(1e-9));
  }

  // v = mean -> zero vector; mean + std -> all ones
  FeatureVector at_mean, at_plus;
  for (std::size_t k = 0; k < feature_count; ++k) {
    at_mean[k] = stats.mean[k];
    at_plus[k] = stats.mean[k] + stats.stddev[k];
  }
  const FeatureVector z0 = normalize(at_mean, stats);
  const FeatureVector z1 = normalize(at_plus, stats);
  for (std::size_t k = 0; k < feature_count; ++k) {
    CHECK(z0[k] == Approx(0.0).margin(1e-12));
    CHECK(z1[k] == Approx(1.0).epsilon(1e-12));
  }

  // target transform round trip
  for (double eta : {etas[0], etas[10], 123.456}) {
    const double y = normalize_target(eta, stats);
    CHECK(denormalize_target(y, stats) == Approx(eta).epsilon(1e-12));
  }
}

TEST_CASE("constant feature columns normalize to zero") {
  std::vector<FeatureVector> features(5);
  std::vector<double> etas(5, 100.0);
  for (std::size_t i = 0; i < 5; ++i) {
    features[i].fill(3.5);        // constant everywhere
    features[i][0] = 1.0 + i;     // except one live column
  }
  const NormStats stats = fit_normalizer(features, etas);
  const FeatureVector z = normalize(features[0], stats);
  for (std::size_t k = 1; k < feature_count; ++k) CHECK(z[k] == 0.0);
  CHECK(z[0] != 0.0);
  CHECK_THROWS_AS(fit_normalizer({}, {}), std::invalid_argument);
}
