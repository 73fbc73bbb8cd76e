#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "xwalk/errors.hpp"
#include "xwalk/stats.hpp"

namespace xwalk::stats {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

BlockMatrix read_long_table(std::istream& in, const std::string& subject_col, const std::string& condition_col,
                            const std::string& value_col) {
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw DegenerateInput("table is empty");
  const auto header = split_csv(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DegenerateInput("row 1: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cs = column(subject_col);
  const std::size_t cc = column(condition_col);
  const std::size_t cv = column(value_col);

  std::vector<std::string> subjects;
  std::set<std::string> conditions;
  std::map<std::pair<std::string, std::string>, double> cells;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells_in = split_csv(line);
    if (cells_in.size() != header.size()) {
      throw DegenerateInput("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(cells_in.size()));
    }
    const std::string& subject = cells_in[cs];
    const std::string& condition = cells_in[cc];
    const std::string& text = cells_in[cv];
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
      throw DegenerateInput("row " + std::to_string(row) + ": value '" + text + "' is not a number");
    }
    if (std::find(subjects.begin(), subjects.end(), subject) == subjects.end()) subjects.push_back(subject);
    conditions.insert(condition);
    if (!cells.emplace(std::make_pair(subject, condition), value).second) {
      throw DegenerateInput("row " + std::to_string(row) + ": duplicate cell for subject '" + subject +
                            "' and " + condition_col + " '" + condition + "'");
    }
  }
  if (subjects.empty()) throw DegenerateInput("table has a header but no rows");
  const std::vector<std::string> cols(conditions.begin(), conditions.end());
  std::vector<double> values;
  values.reserve(subjects.size() * cols.size());
  for (const auto& s : subjects) {
    for (const auto& c : cols) {
      auto it = cells.find({s, c});
      if (it == cells.end()) {
        throw DegenerateInput("missing cell for subject '" + s + "' and " + condition_col + " '" + c + "'");
      }
      values.push_back(it->second);
    }
  }
  return BlockMatrix(subjects.size(), cols.size(), std::move(values), subjects, cols);
}

}  // namespace xwalk::stats
