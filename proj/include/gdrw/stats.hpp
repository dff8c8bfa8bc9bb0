#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace gdrw::stats {

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;

  bool passes(double alpha) const noexcept { return p_value > alpha; }
};

/// Upper tail of the chi-square distribution.
inline double chi_square_sf(double x, std::size_t dof) {
  if (dof == 0) return 1.0;
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(static_cast<double>(dof) / 2.0, x / 2.0);
}

/// Pearson goodness of fit of `observed` against probabilities `expected_p`.
/// Cells with expected count below `min_expected` are pooled into one cell.
/// An observation in a zero-probability cell yields p = 0.
inline ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                                      std::span<const double> expected_p, double min_expected = 5.0) {
  if (observed.size() != expected_p.size()) {
    throw std::invalid_argument("chi_square_gof: size mismatch");
  }
  const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  ChiSquareResult out;
  if (n == 0) return out;

  double pooled_obs = 0, pooled_exp = 0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = expected_p[i] * n;
    const double o = static_cast<double>(observed[i]);
    if (e <= 0.0) {
      if (o > 0) return {std::numeric_limits<double>::infinity(), 0, 0.0};
      continue;
    }
    if (e < min_expected) {
      pooled_obs += o;
      pooled_exp += e;
      continue;
    }
    out.statistic += (o - e) * (o - e) / e;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    out.statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  out.dof = cells > 0 ? cells - 1 : 0;
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

/// Two-sample chi-square homogeneity test on histograms over the same bins.
/// Bins whose pooled count gives either sample an expected count below
/// `min_expected` are merged.
inline ChiSquareResult chi_square_two_sample(std::span<const std::uint64_t> a,
                                             std::span<const std::uint64_t> b,
                                             double min_expected = 5.0) {
  if (a.size() != b.size()) throw std::invalid_argument("chi_square_two_sample: size mismatch");
  const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), std::uint64_t{0}));
  const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), std::uint64_t{0}));
  ChiSquareResult out;
  if (na == 0 || nb == 0) return out;
  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  const double share = std::min(na, nb) / (na + nb);

  auto term = [&](double x, double y) {
    const double d = ka * x - kb * y;
    return d * d / (x + y);
  };
  double pa = 0, pb = 0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = static_cast<double>(a[i]);
    const double y = static_cast<double>(b[i]);
    if (x + y == 0) continue;
    if ((x + y) * share < min_expected) {
      pa += x;
      pb += y;
      continue;
    }
    out.statistic += term(x, y);
    ++cells;
  }
  if (pa + pb > 0) {
    out.statistic += term(pa, pb);
    ++cells;
  }
  out.dof = cells > 0 ? cells - 1 : 0;
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: bad input");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

/// Average ranks (ties share the mean rank).
inline std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = mean_rank;
    i = j + 1;
  }
  return r;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double d = 0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return d / 2.0;
}

}  // namespace gdrw::stats
