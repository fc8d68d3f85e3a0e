#include <catch2/catch.hpp>

#include <cmath>

#include "qot/physics.hpp"
#include "qot/rng.hpp"

using namespace qot;

namespace {

Link uniform_link(int n_spans, double length_km = 80.0, double alpha = 0.2) {
  Link link;
  link.spans.assign(n_spans, Span{length_km, alpha, 1.3, 16.7});
  return link;
}

ChannelPlan comb(int n, Payload p, double spacing_ghz, double power_dbm, int cut) {
  ChannelPlan plan;
  const double f0 = c_band_center_thz - 0.5 * (n - 1) * spacing_ghz * 1e-3;
  for (int i = 0; i < n; ++i)
    plan.channels.push_back(make_channel(p, f0 + i * spacing_ghz * 1e-3, power_dbm, i == cut));
  plan.cut_index = cut;
  return plan;
}

}  // namespace

TEST_CASE("span_derived matches direct evaluation of the closed forms") {
  const SpanDerived d = span_derived({80.0, 0.2, 1.3, 16.7});
  CHECK(d.attenuation == Approx(0.2 * std::log(10.0) / 10.0).epsilon(1e-12));
  CHECK(d.attenuation == Approx(0.046052).epsilon(1e-4));
  CHECK(d.effective_length_km == Approx(21.17).epsilon(1e-3));
  CHECK(d.asymptotic_length_km == Approx(21.71).epsilon(1e-3));
  CHECK(d.effective_length_km <= 80.0);
  CHECK(d.effective_length_km <= d.asymptotic_length_km);
}

TEST_CASE("effective length approaches L as alpha -> 0") {
  const SpanDerived d = span_derived({80.0, 1e-9, 1.3, 16.7});
  CHECK(d.effective_length_km == Approx(80.0).epsilon(1e-8));
}

TEST_CASE("beta2 from D at 1550 nm") {
  const SpanDerived d = span_derived({80.0, 0.2, 1.3, 16.7});
  // beta2 = D * lambda^2 / (2 pi c), evaluated by hand: ~21.3 ps^2/km
  CHECK(d.beta2_abs_ps2_per_km == Approx(21.3).epsilon(1e-3));
}

TEST_CASE("incoherent accumulation: N identical spans scale eta by N") {
  const ChannelPlan plan = comb(5, Payload::Qpsk100G, 50.0, 0.0, 2);
  const double one = eta_closed_form(uniform_link(1), plan);
  for (int n : {3, 10, 59})
    CHECK(eta_closed_form(uniform_link(n), plan) == Approx(n * one).epsilon(1e-9));
}

TEST_CASE("eta is invariant under uniform power scaling") {
  ChannelPlan plan = comb(7, Payload::Qpsk100G, 50.0, 0.0, 3);
  RngEngine eng = make_engine(3, 0);
  for (std::size_t i = 0; i < plan.channels.size(); ++i)
    plan.channels[i].launch_power = uniform_real(eng, -6.0, 2.5);
  const Link link = uniform_link(4);
  const double base = eta_closed_form(link, plan);
  ChannelPlan scaled = plan;
  for (Channel& c : scaled.channels) c.launch_power += 1.7;  // common factor in dB
  CHECK(eta_closed_form(link, scaled) == Approx(base).epsilon(1e-12));
}

TEST_CASE("single channel, single span: closed form within 1 dB of the GN integral") {
  const Link link = uniform_link(1);
  const ChannelPlan plan = comb(1, Payload::Qpsk100G, 50.0, 0.0, 0);
  const double cf = eta_closed_form(link, plan);
  const double num = eta_numerical(link, plan, 64);
  CHECK(std::abs(10.0 * std::log10(cf / num)) < 1.0);
}

TEST_CASE("numerical eta: negligible neighbor power reduces to the SCI-only integral") {
  const Link link = uniform_link(1);
  ChannelPlan with_neighbors = comb(5, Payload::Qpsk100G, 50.0, -300.0, 2);
  with_neighbors.channels[2].launch_power = 0.0;
  const ChannelPlan alone = comb(1, Payload::Qpsk100G, 50.0, 0.0, 0);
  const double a = eta_numerical(link, with_neighbors, 64);
  const double b = eta_numerical(link, alone, 64);
  CHECK(a == Approx(b).epsilon(1e-10));
}

TEST_CASE("numerical eta converges: doubling the point count moves < 0.05 dB") {
  const Link link = uniform_link(1);
  for (const ChannelPlan& plan :
       {comb(1, Payload::Qpsk100G, 50.0, 0.0, 0), comb(5, Payload::Qpsk100G, 50.0, 0.0, 2)}) {
    const double n64 = eta_numerical(link, plan, 64);
    const double n128 = eta_numerical(link, plan, 128);
    CHECK(std::abs(10.0 * std::log10(n128 / n64)) < 0.05);
  }
}

TEST_CASE("numerical eta: 3 identical spans are exactly 3x one span") {
  const ChannelPlan plan = comb(3, Payload::Qpsk100G, 50.0, 0.0, 1);
  const double one = eta_numerical(uniform_link(1), plan, 64);
  const double three = eta_numerical(uniform_link(3), plan, 64);
  CHECK(three == Approx(3.0 * one).epsilon(1e-12));
}

TEST_CASE("numerical eta rejects a too-coarse grid") {
  CHECK_THROWS_AS(eta_numerical(uniform_link(1), comb(1, Payload::Qpsk100G, 50, 0, 0), 63),
                  std::invalid_argument);
}

TEST_CASE("eta grows with neighbor power and shrinks with separation") {
  const Link link = uniform_link(2);
  ChannelPlan near = comb(3, Payload::Qpsk100G, 50.0, 0.0, 1);
  ChannelPlan louder = near;
  louder.channels[0].launch_power = 2.0;
  CHECK(eta_closed_form(link, louder) > eta_closed_form(link, near));

  ChannelPlan far = comb(3, Payload::Qpsk100G, 100.0, 0.0, 1);
  CHECK(eta_closed_form(link, far) < eta_closed_form(link, near));
}

TEST_CASE("overlapping 69 GBd interferer uses the clamped separation, never throws") {
  // 69 GBd channels 50 GHz apart: spectra overlap (69 > 50)
  ChannelPlan plan;
  plan.channels.push_back(make_channel(Payload::Qpsk200G, 193.70, 0.0, true));
  plan.channels.push_back(make_channel(Payload::Qpsk200G, 193.75, 0.0));
  plan.cut_index = 0;
  CHECK(eta_closed_form(uniform_link(1), plan) > 0.0);
}

TEST_CASE("linear noise: hand-evaluated single span") {
  const Link link = uniform_link(1);
  const Channel cut = make_channel(Payload::Qpsk100G, 193.5, 0.0, true);
  const double sigma2 = linear_noise(link, cut, 5.0);
  // h*nu*F*(G-1)*B recomputed independently
  const double expected = 6.62607015e-34 * 193.5e12 * std::pow(10.0, 0.5) *
                          (std::pow(10.0, 1.6) - 1.0) * 35e9;
  CHECK(sigma2 == Approx(expected).epsilon(1e-12));
  CHECK(sigma2 == Approx(5.51e-7).epsilon(2e-3));
  CHECK(watt_to_dbm(sigma2) == Approx(-32.6).margin(0.05));
}

TEST_CASE("linear noise vanishes with span length and adds across spans") {
  const Channel cut = make_channel(Payload::Qpsk100G, 193.5, 0.0, true);
  Link zero;
  zero.spans.push_back({1e-9, 0.2, 1.3, 16.7});
  CHECK(linear_noise(zero, cut, 5.0) == Approx(0.0).margin(1e-15));

  const double one = linear_noise(uniform_link(1), cut, 5.0);
  CHECK(linear_noise(uniform_link(10), cut, 5.0) == Approx(10.0 * one).epsilon(1e-12));
}

TEST_CASE("combine_snr arithmetic") {
  CHECK(combine_snr(0.0, 1e-5, 0.0, 0.0) == Approx(20.0).margin(1e-9));
  CHECK(combine_snr(0.0, 5e-5, 5e4, 0.0) == Approx(10.0).margin(1e-9));
  const double unpenalized = combine_snr(1.0, 3e-6, 2e3, 0.0);
  CHECK(combine_snr(1.0, 3e-6, 2e3, 2.2) == unpenalized - 2.2);
  CHECK_THROWS_AS(combine_snr(0.0, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("optimal power: cube-root law and maximality") {
  CHECK(optimal_power_dbm(5e-5, 2.5e4) == Approx(0.0).margin(1e-9));
  const double base = optimal_power_dbm(5e-5, 2.5e4);
  CHECK(optimal_power_dbm(8.0 * 5e-5, 2.5e4) == Approx(base + 10.0 * std::log10(2.0)).margin(1e-9));
  CHECK_THROWS_AS(optimal_power_dbm(0.0, 1.0), std::invalid_argument);

  // grid scan +-3 dB at 0.01 dB steps never exceeds SNR(p_opt)
  for (const auto& [sigma2, eta] : {std::pair{5e-5, 2.5e4}, {1e-6, 300.0}, {3e-4, 9e5}}) {
    const double p_opt = optimal_power_dbm(sigma2, eta);
    const double best = combine_snr(p_opt, sigma2, eta, 0.0);
    for (int i = -300; i <= 300; ++i)
      CHECK(combine_snr(p_opt + 0.01 * i, sigma2, eta, 0.0) <= best + 1e-9);
  }
}

TEST_CASE("penalties: named only for 69 GBd CUTs") {
  CHECK(penalties_for(comb(1, Payload::Qpsk100G, 50.0, 0.0, 0)) == 0.0);
  CHECK(penalties_for(comb(3, Payload::Qpsk100G, 50.0, 0.0, 1)) == 0.0);
  CHECK(penalties_for(comb(1, Payload::Qpsk200G, 75.0, 0.0, 0)) == Approx(2.0));
  CHECK(penalties_for(comb(3, Payload::Qpsk200G, 75.0, 0.0, 1)) == Approx(2.2));
  // 35 GBd neighbors do not trigger the overlap penalty
  ChannelPlan mixed;
  mixed.channels.push_back(make_channel(Payload::Qpsk200G, 193.70, 0.0, true));
  mixed.channels.push_back(make_channel(Payload::Qpsk100G, 193.7625, 0.0));
  mixed.cut_index = 0;
  CHECK(penalties_for(mixed) == Approx(2.0));
}
