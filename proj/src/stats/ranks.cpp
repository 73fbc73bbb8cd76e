#include <algorithm>
#include <cmath>
#include <numeric>

#include "xwalk/errors.hpp"
#include "xwalk/stats.hpp"

namespace xwalk::stats {

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) ranks[order[m]] = rank;
    i = j;
  }
  return ranks;
}

BlockMatrix::BlockMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                         std::vector<std::string> row_labels, std::vector<std::string> col_labels)
    : rows_(rows), cols_(cols), values_(std::move(values)), row_labels_(std::move(row_labels)),
      col_labels_(std::move(col_labels)) {
  if (rows_ < 2 || cols_ < 2) throw DegenerateInput("block matrix needs at least 2 rows and 2 columns");
  if (values_.size() != rows_ * cols_) throw DegenerateInput("block matrix value count does not match its shape");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DegenerateInput("block matrix has a missing or non-finite cell");
  }
  if (row_labels_.empty()) {
    for (std::size_t r = 0; r < rows_; ++r) row_labels_.push_back(std::to_string(r + 1));
  }
  if (col_labels_.empty()) {
    for (std::size_t c = 0; c < cols_; ++c) col_labels_.push_back(std::to_string(c + 1));
  }
  if (row_labels_.size() != rows_ || col_labels_.size() != cols_) {
    throw DegenerateInput("block matrix label count does not match its shape");
  }
}

Description describe(std::span<const double> sample) {
  Description d;
  d.n = sample.size();
  if (sample.empty()) return d;
  double sum = 0.0;
  for (double x : sample) sum += x;
  d.mean = sum / static_cast<double>(d.n);
  if (d.n >= 2) {
    double ss = 0.0;
    for (double x : sample) ss += (x - d.mean) * (x - d.mean);
    d.sd = std::sqrt(ss / static_cast<double>(d.n - 1));
  }
  return d;
}

}  // namespace xwalk::stats
