#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xwalk::stats {

// Regularized incomplete gamma P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);
// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

double chi_square_sf(double x, double df);
/// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);
double normal_sf(double z);

/// Ranks 1..n with ties given their average rank.
std::vector<double> midranks(std::span<const double> values);

/// n blocks (rows) by k conditions (columns), row-major.
class BlockMatrix {
 public:
  BlockMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
              std::vector<std::string> row_labels = {}, std::vector<std::string> col_labels = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
};

struct StatResult {
  double statistic = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Tie-corrected Friedman chi-square with k - 1 df.
StatResult friedman(const BlockMatrix& m);

struct PairwiseResult {
  std::vector<std::string> labels;
  std::size_t k = 0;
  double df = 0.0;
  std::vector<double> t;  // k x k, |t| of each pair
  std::vector<double> p;  // k x k, unit diagonal

  double p_at(std::size_t i, std::size_t j) const { return p[i * k + j]; }
  double t_at(std::size_t i, std::size_t j) const { return t[i * k + j]; }
};

/// Conover-Iman pairwise comparison of Friedman rank sums, two-sided, unadjusted.
PairwiseResult conover_posthoc(const BlockMatrix& m);

struct MannWhitneyResult {
  double u = 0.0;  // U of the first sample
  double p = 1.0;
  bool exact = false;
  double z = 0.0;  // normal approximation only
};

/// Two-sided. Exact when min(|a|, |b|) <= 8 and there are no ties.
MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b);

/// Rows are respondents, columns are items.
double cronbach_alpha(const BlockMatrix& items);

struct Correlation {
  double rho = 0.0;
  double p = 1.0;
  double df = 0.0;
};

Correlation spearman(std::span<const double> a, std::span<const double> b);

struct Description {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd;
};

Description describe(std::span<const double> sample);

using Ballot = std::vector<std::string>;  // most preferred first

struct BucklinEntry {
  std::string label;
  std::optional<std::size_t> elect_round;  // 1-based; absent if never reaches the majority
  std::size_t votes_at_round = 0;
  std::size_t borda = 0;                   // sum of 1-based positions
  std::vector<std::size_t> cumulative;     // votes within the top r, r = 1..k
};

/// Majority defaults to ceil(n / 2).
std::size_t default_majority(std::size_t ballots);

/// Ordered by elect round, then votes at that round (desc), Borda sum, label.
std::vector<BucklinEntry> rpss_aggregate(const std::vector<Ballot>& ballots, std::size_t majority);

/// Long-format table "subject,condition,value" pivoted into a block matrix.
/// Columns are sorted condition labels, rows subjects in first-seen order.
/// Throws DegenerateInput with the row number on schema problems or missing cells.
BlockMatrix read_long_table(std::istream& in, const std::string& subject_col = "subject",
                            const std::string& condition_col = "interface", const std::string& value_col = "value");

}  // namespace xwalk::stats
