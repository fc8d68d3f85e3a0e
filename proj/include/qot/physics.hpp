// Ground-truth QoT physics: incoherent-GN nonlinear interference, the
// numerical GN reference integral, EDFA ASE noise, SNR combination and the
// fixed ROADM penalties.
//
// Every function is pure; NLI accumulates incoherently (plain sum over
// spans), so eta(N identical spans) == N * eta(one span) to the last bit.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qot/linkmodel.hpp"

namespace qot {

inline constexpr double planck_j_s = 6.62607015e-34;
inline constexpr double speed_of_light_m_s = 299792458.0;
inline constexpr double default_lambda_ref_nm = 1550.0;
inline constexpr double default_nf_db = 5.0;

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

struct SpanDerived {
  double attenuation;            // power attenuation a = alpha*ln(10)/10, 1/km
  double effective_length_km;    // (1 - e^{-aL}) / a
  double asymptotic_length_km;   // 1 / a
  double beta2_abs_ps2_per_km;   // |beta2| = D*lambda^2 / (2*pi*c)
};

inline SpanDerived span_derived(const Span& span, double lambda_ref_nm = default_lambda_ref_nm) {
  SpanDerived d;
  d.attenuation = span.alpha * std::log(10.0) / 10.0;
  d.effective_length_km = -std::expm1(-d.attenuation * span.length) / d.attenuation;
  d.asymptotic_length_km = 1.0 / d.attenuation;
  // c in nm/ps keeps D [ps/(nm km)] * lambda^2 [nm^2] directly in ps^2/km.
  const double c_nm_per_ps = speed_of_light_m_s * 1e-3;
  d.beta2_abs_ps2_per_km =
      std::abs(span.dispersion) * lambda_ref_nm * lambda_ref_nm / (2.0 * M_PI * c_nm_per_ps);
  return d;
}

struct NoiseBudget {
  double sigma2 = 0.0;        // W, dual-polarisation ASE in the CUT bandwidth
  double eta = 0.0;           // 1/W^2
  double penalties_db = 0.0;  // dB
};

// --- closed-form GN --------------------------------------------------------

namespace detail {

/// Per-span SCI eta in km/THz/ps^2-per-km units (dimensionless asinh
/// argument, (gamma*L_eff)^2 carrying the 1/W^2).
inline double span_sci(const Span& span, const SpanDerived& d, double b_thz) {
  const double beta2_la = d.beta2_abs_ps2_per_km * d.asymptotic_length_km;
  return (8.0 / 27.0) * span.gamma * span.gamma * d.effective_length_km * d.effective_length_km *
         std::asinh(0.5 * M_PI * M_PI * beta2_la * b_thz * b_thz) /
         (M_PI * beta2_la * b_thz * b_thz);
}

}  // namespace detail

/// SCI-only eta: the nonlinear coefficient a bare channel of the given
/// symbol rate would see on this link. For any valid plan containing such a
/// CUT, eta_closed_form is bounded below by this value.
inline double eta_sci(const Link& link, double symbol_rate_gbd) {
  const double b = symbol_rate_gbd * 1e-3;
  double eta = 0.0;
  for (const Span& span : link.spans) eta += detail::span_sci(span, span_derived(span), b);
  return eta;
}

/// Incoherent-GN nonlinear coefficient of the CUT: per span SCI plus one XCI
/// term per interferer, summed over spans.
///
/// Working units: km, THz, ps^2/km — beta2*L*B^2 is then dimensionless and
/// (gamma*L_eff)^2 carries the 1/W^2. The XCI term uses the two symmetric
/// XPM islands of the GN reference integral, i.e. 16/27 over 2*pi.
/// Interferers whose spectrum overlaps the CUT's (possible for 69 GBd
/// channels on a 75 GHz grid) never raise: the separation is clamped to
/// (B_cut + B_j)/2 and the residual damage is covered by the 0.2 dB penalty.
inline double eta_closed_form(const Link& link, const ChannelPlan& plan_in) {
  const ChannelPlan plan = canonical(plan_in);
  const Channel& cut = plan.cut();
  const double b_cut = cut.symbol_rate * 1e-3;  // THz

  // Per-interferer spectral factor, independent of the span.
  double xci_sum = 0.0;
  for (std::size_t j = 0; j < plan.channels.size(); ++j) {
    if (j == plan.cut_index) continue;
    const Channel& ch = plan.channels[j];
    const double b_j = ch.symbol_rate * 1e-3;
    double df = std::abs(ch.center_frequency - cut.center_frequency);
    if (df - 0.5 * b_j <= 0.0) df = 0.5 * (b_cut + b_j);
    const double power_ratio_sq =
        std::pow(10.0, (ch.launch_power - cut.launch_power) / 5.0);
    xci_sum += power_ratio_sq *
               std::log((df + 0.5 * b_j) / (df - 0.5 * b_j)) / (b_j * b_j);
  }

  double eta = 0.0;
  for (const Span& span : link.spans) {
    const SpanDerived d = span_derived(span);
    const double g_leff_sq =
        span.gamma * span.gamma * d.effective_length_km * d.effective_length_km;
    const double beta2_la = d.beta2_abs_ps2_per_km * d.asymptotic_length_km;
    const double sci = detail::span_sci(span, d, b_cut);
    const double xci = (16.0 / 27.0) * g_leff_sq * xci_sum / (2.0 * M_PI * beta2_la);
    eta += sci + xci;
  }
  return eta;
}

// --- numerical GN reference ------------------------------------------------

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
struct GaussLegendre {
  std::vector<double> node;
  std::vector<double> weight;

  explicit GaussLegendre(int n) : node(n), weight(n) {
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      node[i] = -x;
      node[n - 1 - i] = x;
      weight[i] = weight[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

struct BandPsd {
  double lo_hz, hi_hz, psd;  // rectangular PSD P/B over [lo, hi], W/Hz
};

}  // namespace detail

/// GN reference integral around the CUT frequency,
///   G_NLI(f) = 16/27 gamma^2 sum_spans |mu|^2-weighted PSD triple product,
/// evaluated by per-island tensor-product Gauss-Legendre quadrature with
/// `quadrature_points` nodes per axis. The (f1, f2) domain is split at the
/// breakpoints where the third-factor support enters or leaves a channel, so
/// every panel integrates a smooth function and doubling the point count is
/// a genuine convergence check. Summation order is fixed; the result does
/// not depend on any parallel partitioning because there is none.
inline double eta_numerical(const Link& link, const ChannelPlan& plan_in, int quadrature_points) {
  if (quadrature_points < 64)
    throw std::invalid_argument("eta_numerical: quadrature_points must be >= 64 per axis");
  const ChannelPlan plan = canonical(plan_in);
  const Channel& cut = plan.cut();
  const double f_cut = cut.center_frequency * 1e12;  // Hz
  const double b_cut = cut.symbol_rate * 1e9;        // Hz
  const double p_cut = dbm_to_watt(cut.launch_power);

  std::vector<detail::BandPsd> bands;
  bands.reserve(plan.channels.size());
  for (const Channel& ch : plan.channels) {
    const double b = ch.symbol_rate * 1e9;
    bands.push_back({ch.center_frequency * 1e12 - 0.5 * b,
                     ch.center_frequency * 1e12 + 0.5 * b,
                     dbm_to_watt(ch.launch_power) / b});
  }

  const detail::GaussLegendre gl(quadrature_points);
  const int n_nodes = quadrature_points;

  double eta = 0.0;
  for (const Span& span : link.spans) {
    const SpanDerived d = span_derived(span);
    const double a = d.attenuation * 1e-3;                       // 1/m
    const double length_m = span.length * 1e3;                   // m
    const double beta2 = d.beta2_abs_ps2_per_km * 1e-27;         // s^2/m
    const double kappa = 4.0 * M_PI * M_PI * beta2;              // phase factor
    const double gamma_m = span.gamma * 1e-3;                    // 1/(W*m)
    const double decay = std::exp(-a * length_m);
    const double decay_sq = decay * decay;

    double g_nli = 0.0;
    for (const auto& bi : bands) {
      for (const auto& bj : bands) {
        for (const auto& bk : bands) {
          // f1 in band i, f2 in band j, f1 + f2 - f_cut in band k.
          const double psd3 = bi.psd * bj.psd * bk.psd;
          if (psd3 == 0.0) continue;
          // f2 window as a function of f1: [max(bj.lo, s_lo - f1), min(bj.hi, s_hi - f1)]
          const double s_lo = f_cut + bk.lo_hz;
          const double s_hi = f_cut + bk.hi_hz;
          // Breakpoints in f1 where the min/max switch.
          double cuts[6] = {bi.lo_hz, bi.hi_hz, s_lo - bj.lo_hz, s_lo - bj.hi_hz,
                            s_hi - bj.lo_hz, s_hi - bj.hi_hz};
          std::sort(std::begin(cuts), std::end(cuts));
          for (int seg = 0; seg + 1 < 6; ++seg) {
            const double f1_lo = std::max(cuts[seg], bi.lo_hz);
            const double f1_hi = std::min(cuts[seg + 1], bi.hi_hz);
            if (f1_hi - f1_lo <= 0.0) continue;
            // Reject panels whose f2 window is empty (probe the midpoint;
            // within a segment the window width varies monotonically).
            const double f1_mid = 0.5 * (f1_lo + f1_hi);
            if (std::min(bj.hi_hz, s_hi - f1_mid) - std::max(bj.lo_hz, s_lo - f1_mid) <= 0.0)
              continue;
            const double c1 = 0.5 * (f1_lo + f1_hi), h1 = 0.5 * (f1_hi - f1_lo);
            double panel = 0.0;
            for (int u = 0; u < n_nodes; ++u) {
              const double f1 = c1 + h1 * gl.node[u];
              const double f2_lo = std::max(bj.lo_hz, s_lo - f1);
              const double f2_hi = std::min(bj.hi_hz, s_hi - f1);
              if (f2_hi - f2_lo <= 0.0) continue;
              const double c2 = 0.5 * (f2_lo + f2_hi), h2 = 0.5 * (f2_hi - f2_lo);
              const double nu1 = f1 - f_cut;
              double inner = 0.0;
              for (int v = 0; v < n_nodes; ++v) {
                const double f2 = c2 + h2 * gl.node[v];
                const double mismatch = kappa * nu1 * (f2 - f_cut);
                const double mu_sq = (1.0 + decay_sq - 2.0 * decay * std::cos(mismatch * length_m)) /
                                     (a * a + mismatch * mismatch);
                inner += gl.weight[v] * mu_sq;
              }
              panel += gl.weight[u] * h2 * inner;
            }
            g_nli += psd3 * h1 * panel;
          }
        }
      }
    }
    eta += (16.0 / 27.0) * gamma_m * gamma_m * g_nli * b_cut / (p_cut * p_cut * p_cut);
  }
  return eta;
}

// --- linear noise, penalties, SNR ------------------------------------------

/// Total dual-polarisation ASE power in the CUT bandwidth, one EDFA per span
/// with gain exactly compensating span loss.
inline double linear_noise(const Link& link, const Channel& cut, double nf_db = default_nf_db) {
  const double nu = cut.center_frequency * 1e12;   // Hz
  const double bandwidth = cut.symbol_rate * 1e9;  // Hz
  const double noise_factor = std::pow(10.0, nf_db / 10.0);
  double sigma2 = 0.0;
  for (const Span& span : link.spans) {
    const double gain = std::pow(10.0, span.alpha * span.length / 10.0);
    sigma2 += planck_j_s * nu * noise_factor * (gain - 1.0) * bandwidth;
  }
  return sigma2;
}

/// Fixed dB penalties: in-line ROADM filtering of 69 GBd channels (2 dB),
/// plus 0.2 dB when a 69 GBd CUT has another 69 GBd channel within 75 GHz.
inline double penalties_for(const ChannelPlan& plan_in) {
  const ChannelPlan plan = canonical(plan_in);
  const Channel& cut = plan.cut();
  if (cut.symbol_rate != 69.0) return 0.0;
  double penalty = 2.0;
  for (std::size_t j = 0; j < plan.channels.size(); ++j) {
    if (j == plan.cut_index) continue;
    const Channel& ch = plan.channels[j];
    const double df_ghz = std::abs(ch.center_frequency - cut.center_frequency) * 1e3;
    if (ch.symbol_rate == 69.0 && df_ghz <= 75.0 + 1e-6) {
      penalty += 0.2;
      break;
    }
  }
  return penalty;
}

/// SNR = P / (sigma2 + eta P^3) in dB, minus fixed penalties.
inline double combine_snr(double p_tx_dbm, double sigma2_w, double eta, double penalties_db) {
  if (sigma2_w < 0.0 || eta < 0.0)
    throw std::invalid_argument("combine_snr: noise terms must be non-negative");
  if (sigma2_w == 0.0 && eta == 0.0)
    throw std::invalid_argument("combine_snr: both noise terms zero (infinite SNR)");
  const double p = dbm_to_watt(p_tx_dbm);
  return 10.0 * std::log10(p / (sigma2_w + eta * p * p * p)) - penalties_db;
}

/// Launch power maximising combine_snr: P_opt = (sigma2 / (2 eta))^{1/3}.
inline double optimal_power_dbm(double sigma2_w, double eta) {
  if (sigma2_w <= 0.0 || eta <= 0.0)
    throw std::invalid_argument("optimal_power: sigma2 and eta must be positive");
  return watt_to_dbm(std::cbrt(sigma2_w / (2.0 * eta)));
}

}  // namespace qot
