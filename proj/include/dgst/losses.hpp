#pragma once

// Forward values of the adversarial training objective: conditional GAN
// discriminator and generator terms plus the L2 reconstruction term.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "dgst/error.hpp"

namespace dgst {

inline constexpr double kProbEpsilon = 1e-7;
inline constexpr double kDefaultLambda = 100.0;

enum class L2Mode { rms, raw };
enum class GeneratorLossForm { non_saturating, literal };

struct DiscriminatorScores {
  std::vector<double> on_real;
  std::vector<double> on_fake;
};

struct LossParams {
  double lambda = kDefaultLambda;
};

inline double clamp_prob(double p) { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }

/// ||gt - pred||_2, divided by sqrt(N) in RMS mode.
template <typename T>
double l2_term(std::span<const T> pred, std::span<const T> gt, L2Mode mode = L2Mode::rms) {
  if (pred.size() != gt.size()) throw DimensionMismatch("l2_term: length mismatch");
  if (pred.empty()) throw std::invalid_argument("l2_term: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(gt[i]) - static_cast<double>(pred[i]);
    s += d * d;
  }
  const double n = std::sqrt(s);
  return mode == L2Mode::rms ? n / std::sqrt(static_cast<double>(pred.size())) : n;
}

template <typename T>
double l2_term(const std::vector<T>& pred, const std::vector<T>& gt, L2Mode mode = L2Mode::rms) {
  return l2_term(std::span<const T>(pred), std::span<const T>(gt), mode);
}

namespace detail {

inline double mean_log(std::span<const double> xs, bool complement) {
  if (xs.empty()) throw std::invalid_argument("discriminator scores must be nonempty");
  double s = 0.0;
  for (const double x : xs) {
    const double p = clamp_prob(x);
    s += std::log(complement ? 1.0 - p : p);
  }
  return s / static_cast<double>(xs.size());
}

}  // namespace detail

/// -(E[log D(x,y)] + E[log(1 - D(x,G(x)))]), minimized by the discriminator.
inline double cgan_d_loss(const DiscriminatorScores& s) {
  return -(detail::mean_log(s.on_real, false) + detail::mean_log(s.on_fake, true));
}

/// Generator adversarial term. The non-saturating form is -E[log D(G)];
/// the literal form is E[log(1 - D(G))], the generator's side of the minimax.
inline double cgan_g_loss(std::span<const double> on_fake,
                          GeneratorLossForm form = GeneratorLossForm::non_saturating) {
  if (form == GeneratorLossForm::literal) return detail::mean_log(on_fake, true);
  return -detail::mean_log(on_fake, false);
}

inline double combined_objective(double g_adv, double l2, const LossParams& p = {}) {
  if (!std::isfinite(g_adv) || !std::isfinite(l2) || !std::isfinite(p.lambda)) {
    throw std::invalid_argument("combined_objective: non-finite input");
  }
  return g_adv + p.lambda * l2;
}

}  // namespace dgst
