#include "panelcp/panel.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "panelcp/feedback.hpp"
#include "panelcp/rng.hpp"

namespace panelcp {

void Panel::validate() const {
  if (n_units <= 0 || horizon <= 0 || feature_dim <= 0)
    throw std::invalid_argument("panel: empty dimensions");
  const auto cells = static_cast<std::size_t>(n_units) * horizon;
  if (outcomes.size() != cells)
    throw std::invalid_argument("panel: outcome count does not match n_units * horizon");
  if (features.size() != cells * static_cast<std::size_t>(feature_dim))
    throw std::invalid_argument("panel: feature count does not match shape");
  if (burn_in_end < 0 || burn_in_end >= horizon)
    throw std::invalid_argument("panel: burn_in_end must lie in [0, horizon)");
  if (!unit_tags.empty() && unit_tags.size() != static_cast<std::size_t>(n_units))
    throw std::invalid_argument("panel: unit_tags length mismatch");
}

RoundBatch::RoundBatch(const Panel& panel, const std::vector<int>& calib_ids,
                       int target_id, int t, bool lagged_reveal,
                       std::optional<double> lagged_label)
    : panel_(&panel),
      calib_ids_(&calib_ids),
      target_id_(target_id),
      t_(t),
      lagged_reveal_(lagged_reveal),
      lagged_label_(std::move(lagged_label)) {
  if (lagged_reveal_ != lagged_label_.has_value())
    throw std::invalid_argument("round batch: lagged label present iff lagged reveal");
}

RoundBatch stream_round(const Panel& panel, const UnitSplit& split, int target,
                        const FeedbackSchedule& feedback, int t) {
  if (t < panel.burn_in_end || t >= panel.horizon)
    throw std::out_of_range("stream_round: t outside the conformal period");
  if (std::find(split.calib_ids.begin(), split.calib_ids.end(), target) !=
      split.calib_ids.end())
    throw std::invalid_argument("stream_round: target is a calibration unit");
  if (std::find(split.test_ids.begin(), split.test_ids.end(), target) ==
      split.test_ids.end())
    throw std::invalid_argument("stream_round: target not in the test split");

  const int round_idx = t - panel.burn_in_end;
  bool reveal = false;
  std::optional<double> label;
  if (round_idx > 0 && feedback.revealed(round_idx - 1)) {
    reveal = true;
    label = panel.y(target, t - 1);
  }
  return RoundBatch(panel, split.calib_ids, target, t, reveal, label);
}

UnitSplit random_unit_split(const Panel& panel, int n_calib, int n_test,
                            std::uint64_t seed, bool stratified) {
  if (n_calib < 0 || n_test < 0 || n_calib + n_test > panel.n_units)
    throw std::invalid_argument("random_unit_split: counts exceed available units");

  UnitSplit split;
  split.seed = seed;
  Rng rng(seed, 0x5117);

  if (stratified) {
    if (panel.unit_tags.empty())
      throw std::invalid_argument("random_unit_split: stratified split needs unit tags");
    std::vector<int> majority, minority;
    for (int i = 0; i < panel.n_units; ++i) {
      (panel.unit_tags[static_cast<std::size_t>(i)] == 0 ? majority : minority)
          .push_back(i);
    }
    if (static_cast<int>(majority.size()) > n_calib)
      throw std::invalid_argument(
          "random_unit_split: calibration size smaller than the majority stratum");
    const int minority_calib = n_calib - static_cast<int>(majority.size());
    if (minority_calib + n_test > static_cast<int>(minority.size()))
      throw std::invalid_argument("random_unit_split: counts exceed the minority stratum");
    const auto perm = rng.permutation(static_cast<int>(minority.size()));
    split.calib_ids = majority;
    for (int j = 0; j < minority_calib; ++j)
      split.calib_ids.push_back(minority[static_cast<std::size_t>(perm[j])]);
    for (int j = minority_calib; j < minority_calib + n_test; ++j)
      split.test_ids.push_back(minority[static_cast<std::size_t>(perm[j])]);
  } else {
    const auto perm = rng.permutation(panel.n_units);
    split.calib_ids.assign(perm.begin(), perm.begin() + n_calib);
    split.test_ids.assign(perm.begin() + n_calib, perm.begin() + n_calib + n_test);
  }
  std::sort(split.calib_ids.begin(), split.calib_ids.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  return split;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t row, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::runtime_error("panel csv: non-numeric " + std::string(what) +
                             " at data row " + std::to_string(row));
  return v;
}

long parse_long(const std::string& s, std::size_t row, const char* what) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw std::runtime_error("panel csv: non-numeric " + std::string(what) +
                             " at data row " + std::to_string(row));
  return v;
}

}  // namespace

Panel load_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("panel csv: cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("panel csv: empty file");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const auto cols = split_csv_line(header);
  if (cols.size() < 4 || cols[0] != "unit_id" || cols[1] != "time_id" || cols[2] != "y")
    throw std::runtime_error("panel csv: header must be unit_id,time_id,y,x_0,...");
  const int d = static_cast<int>(cols.size()) - 3;
  for (int j = 0; j < d; ++j) {
    if (cols[static_cast<std::size_t>(3 + j)] != "x_" + std::to_string(j))
      throw std::runtime_error("panel csv: feature columns must be x_0..x_" +
                               std::to_string(d - 1));
  }

  struct Cell {
    double y;
    std::vector<double> x;
  };
  std::vector<long> unit_order;                       // by first appearance
  std::unordered_map<long, int> unit_index;
  std::map<long, int> time_index_builder;             // sorted time ids
  std::vector<std::pair<std::pair<long, long>, Cell>> rows;

  std::string line;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_no;
    const auto fields = split_csv_line(line);
    if (fields.size() != cols.size())
      throw std::runtime_error("panel csv: wrong field count at data row " +
                               std::to_string(row_no));
    const long unit = parse_long(fields[0], row_no, "unit_id");
    const long time = parse_long(fields[1], row_no, "time_id");
    Cell cell;
    cell.y = parse_double(fields[2], row_no, "y");
    cell.x.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j)
      cell.x[static_cast<std::size_t>(j)] =
          parse_double(fields[static_cast<std::size_t>(3 + j)], row_no, "x");
    if (unit_index.find(unit) == unit_index.end()) {
      unit_index[unit] = static_cast<int>(unit_order.size());
      unit_order.push_back(unit);
    }
    time_index_builder.emplace(time, 0);
    rows.push_back({{unit, time}, std::move(cell)});
  }
  if (rows.empty()) throw std::runtime_error("panel csv: no data rows (empty panel)");

  int ti = 0;
  for (auto& [time, idx] : time_index_builder) idx = ti++;

  Panel panel;
  panel.n_units = static_cast<int>(unit_order.size());
  panel.horizon = static_cast<int>(time_index_builder.size());
  panel.feature_dim = d;
  const auto cells = static_cast<std::size_t>(panel.n_units) * panel.horizon;
  panel.features.assign(cells * static_cast<std::size_t>(d), 0.0);
  panel.outcomes.assign(cells, 0.0);
  std::vector<char> seen(cells, 0);

  for (auto& [key, cell] : rows) {
    const int u = unit_index[key.first];
    const int t = time_index_builder[key.second];
    const auto flat = static_cast<std::size_t>(u) * panel.horizon + t;
    if (seen[flat])
      throw std::runtime_error("panel csv: duplicate cell (unit " +
                               std::to_string(key.first) + ", time " +
                               std::to_string(key.second) + ")");
    seen[flat] = 1;
    panel.outcomes[flat] = cell.y;
    std::copy(cell.x.begin(), cell.x.end(),
              panel.features.begin() + flat * static_cast<std::size_t>(d));
  }
  for (int u = 0; u < panel.n_units; ++u) {
    for (int t = 0; t < panel.horizon; ++t) {
      if (!seen[static_cast<std::size_t>(u) * panel.horizon + t]) {
        long time_id = 0;
        for (const auto& [tid, idx] : time_index_builder)
          if (idx == t) time_id = tid;
        throw std::runtime_error("panel csv: ragged panel, missing cell (unit " +
                                 std::to_string(unit_order[static_cast<std::size_t>(u)]) +
                                 ", time " + std::to_string(time_id) + ")");
      }
    }
  }
  panel.validate();
  return panel;
}

void write_panel_csv(const Panel& panel, const std::string& path) {
  panel.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("panel csv: cannot write " + path);
  out << "unit_id,time_id,y";
  for (int j = 0; j < panel.feature_dim; ++j) out << ",x_" << j;
  out << "\n";
  char buf[32];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (int u = 0; u < panel.n_units; ++u) {
    for (int t = 0; t < panel.horizon; ++t) {
      out << u << ',' << t << ',';
      put(panel.y(u, t));
      for (double v : panel.x(u, t)) {
        out << ',';
        put(v);
      }
      out << "\n";
    }
  }
}

}  // namespace panelcp
