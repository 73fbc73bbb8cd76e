#include <algorithm>
#include <cmath>
#include <limits>

#include "xwalk/errors.hpp"
#include "xwalk/stats.hpp"

namespace xwalk::stats {

namespace {

struct RankSums {
  std::vector<double> r;  // per column
  double a1 = 0.0;        // sum of squared ranks
  std::size_t n = 0;
  std::size_t k = 0;
};

RankSums block_rank_sums(const BlockMatrix& m) {
  RankSums s;
  s.n = m.rows();
  s.k = m.cols();
  s.r.assign(s.k, 0.0);
  for (std::size_t i = 0; i < s.n; ++i) {
    const auto ranks = midranks(m.row(i));
    for (std::size_t j = 0; j < s.k; ++j) {
      s.r[j] += ranks[j];
      s.a1 += ranks[j] * ranks[j];
    }
  }
  return s;
}

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw DegenerateInput(std::string(what) + ": non-finite value");
  }
}

}  // namespace

StatResult friedman(const BlockMatrix& m) {
  const RankSums s = block_rank_sums(m);
  const double n = static_cast<double>(s.n);
  const double k = static_cast<double>(s.k);
  const double c1 = n * k * (k + 1.0) * (k + 1.0) / 4.0;
  double spread = 0.0;
  for (double r : s.r) spread += (r - n * (k + 1.0) / 2.0) * (r - n * (k + 1.0) / 2.0);
  StatResult out;
  out.df = k - 1.0;
  const double denom = s.a1 - c1;
  if (denom <= 0.0) {
    out.statistic = 0.0;
    out.p = 1.0;
    return out;
  }
  out.statistic = (k - 1.0) * spread / denom;
  out.p = chi_square_sf(out.statistic, out.df);
  return out;
}

PairwiseResult conover_posthoc(const BlockMatrix& m) {
  const RankSums s = block_rank_sums(m);
  const double n = static_cast<double>(s.n);
  const double k = static_cast<double>(s.k);
  double sum_r2 = 0.0;
  for (double r : s.r) sum_r2 += r * r;
  PairwiseResult out;
  out.labels = m.col_labels();
  out.k = s.k;
  out.df = (n - 1.0) * (k - 1.0);
  out.t.assign(s.k * s.k, 0.0);
  out.p.assign(s.k * s.k, 1.0);
  const double variance = 2.0 * (n * s.a1 - sum_r2) / out.df;
  for (std::size_t i = 0; i < s.k; ++i) {
    for (std::size_t j = i + 1; j < s.k; ++j) {
      const double diff = std::fabs(s.r[i] - s.r[j]);
      double t = 0.0;
      double p = 1.0;
      if (diff > 0.0) {
        if (variance > 0.0) {
          t = diff / std::sqrt(variance);
          p = student_t_two_sided(t, out.df);
        } else {
          t = std::numeric_limits<double>::infinity();
          p = 0.0;
        }
      }
      out.t[i * s.k + j] = out.t[j * s.k + i] = t;
      out.p[i * s.k + j] = out.p[j * s.k + i] = p;
    }
  }
  return out;
}

MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DegenerateInput("mann_whitney: both samples must be non-empty");
  require_finite(a, "mann_whitney");
  require_finite(b, "mann_whitney");
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  double ra = 0.0;
  for (std::size_t i = 0; i < na; ++i) ra += ranks[i];
  MannWhitneyResult out;
  out.u = ra - static_cast<double>(na * (na + 1)) / 2.0;

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  bool ties = false;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    if (j - i > 1) ties = true;
    tie_term += t * t * t - t;
    i = j;
  }

  if (!ties && std::min(na, nb) <= 8) {
    // counts[u] = number of rank arrangements giving U = u, built one element at a time.
    const std::size_t umax = na * nb;
    std::vector<std::vector<double>> prev(nb + 1, std::vector<double>(umax + 1, 0.0));
    for (std::size_t j = 0; j <= nb; ++j) prev[j][0] = 1.0;
    for (std::size_t i = 1; i <= na; ++i) {
      std::vector<std::vector<double>> cur(nb + 1, std::vector<double>(umax + 1, 0.0));
      cur[0][0] = 1.0;
      for (std::size_t j = 1; j <= nb; ++j) {
        for (std::size_t u = 0; u <= i * j; ++u) {
          double c = cur[j - 1][u];
          if (u >= j) c += prev[j][u - j];
          cur[j][u] = c;
        }
      }
      prev = std::move(cur);
    }
    const auto& counts = prev[nb];
    double total = 0.0;
    for (double c : counts) total += c;
    const auto u = static_cast<std::size_t>(std::llround(out.u));
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t v = 0; v <= umax; ++v) {
      if (v <= u) lower += counts[v];
      if (v >= u) upper += counts[v];
    }
    out.exact = true;
    out.p = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    return out;
  }

  const double n = static_cast<double>(na + nb);
  const double mu = static_cast<double>(na * nb) / 2.0;
  const double var = static_cast<double>(na * nb) / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) {
    out.p = 1.0;
    return out;
  }
  const double dev = std::max(0.0, std::fabs(out.u - mu) - 0.5);
  out.z = dev / std::sqrt(var);
  out.p = std::min(1.0, 2.0 * normal_sf(out.z));
  return out;
}

double cronbach_alpha(const BlockMatrix& items) {
  const std::size_t n = items.rows();
  const std::size_t k = items.cols();
  const double nn = static_cast<double>(n);
  // Sums of squares scaled by n(n - 1), exact for integer scores.
  auto scaled_ss = [&](auto value_of) {
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = value_of(r);
      s += v;
      s2 += v * v;
    }
    return nn * s2 - s * s;
  };
  double item_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) item_sum += scaled_ss([&](std::size_t r) { return items.at(r, c); });
  const double total = scaled_ss([&](std::size_t r) {
    double t = 0.0;
    for (std::size_t c = 0; c < k; ++c) t += items.at(r, c);
    return t;
  });
  if (!(total > 0.0)) throw DegenerateInput("cronbach_alpha: total score has zero variance");
  const double kk = static_cast<double>(k);
  return kk * (total - item_sum) / ((kk - 1.0) * total);
}

Correlation spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DegenerateInput("spearman: samples differ in length");
  if (a.size() < 3) throw DegenerateInput("spearman: need at least 3 pairs");
  require_finite(a, "spearman");
  require_finite(b, "spearman");
  const auto ra = midranks(a);
  const auto rb = midranks(b);
  const double n = static_cast<double>(a.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sx += ra[i];
    sy += rb[i];
    sxx += ra[i] * ra[i];
    syy += rb[i] * rb[i];
    sxy += ra[i] * rb[i];
  }
  const double cxx = n * sxx - sx * sx;
  const double cyy = n * syy - sy * sy;
  const double cxy = n * sxy - sx * sy;
  if (!(cxx > 0.0) || !(cyy > 0.0)) throw DegenerateInput("spearman: zero rank variance");
  Correlation out;
  out.df = n - 2.0;
  out.rho = std::clamp(cxy / std::sqrt(cxx * cyy), -1.0, 1.0);
  if (std::fabs(out.rho) == 1.0) {
    out.p = 0.0;
  } else {
    const double t = out.rho * std::sqrt(out.df / (1.0 - out.rho * out.rho));
    out.p = student_t_two_sided(t, out.df);
  }
  return out;
}

}  // namespace xwalk::stats
