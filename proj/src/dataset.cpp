#include "rpmixl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "rpmixl/error.hpp"

namespace rpmixl {

std::size_t Dataset::find(std::string_view name) const noexcept {
  auto it = std::find_if(columns.begin(), columns.end(), [&](const Column& c) { return c.name == name; });
  return static_cast<std::size_t>(it - columns.begin());
}

std::size_t Dataset::index_of(std::string_view name) const {
  const std::size_t i = find(name);
  if (i == width()) throw DataError(fmt::format("unknown column '{}'", name), 0, std::string(name));
  return i;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      break;
    }
    cells.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawTable read_raw(std::istream& in) {
  RawTable table;
  std::string line;
  bool have_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.empty()) continue;
      table.header = split_csv_line(line);
      have_header = true;
      std::set<std::string> seen;
      for (const auto& name : table.header) {
        if (name.empty()) throw DataError("empty column name in header");
        if (!seen.insert(name).second) throw DataError(fmt::format("duplicate column '{}' in header", name), 0, name);
      }
      continue;
    }
    if (line.empty()) continue;
    ++row;
    auto cells = split_csv_line(line);
    if (cells.size() != table.header.size())
      throw DataError(fmt::format("row {} has {} cells, header has {}", row, cells.size(), table.header.size()), row);
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw DataError("missing header row");
  return table;
}

bool is_indicator(double v) { return v == 0.0 || v == 1.0; }

}  // namespace

Dataset read_dataset(std::istream& in, const ModelSpec& spec, const LoadOptions& options, std::string source) {
  const RawTable raw = read_raw(in);
  auto header_index = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(raw.header.begin(), raw.header.end(), name) - raw.header.begin());
  };

  const std::size_t label_pos = header_index(spec.label_column);
  if (label_pos == raw.header.size())
    throw DataError(fmt::format("missing label column '{}'", spec.label_column), 0, spec.label_column);
  const auto referenced = spec.referenced_columns();
  for (const auto& name : referenced) {
    const bool derived = std::any_of(options.interactions.begin(), options.interactions.end(),
                                     [&](const Interaction& i) { return i.name == name; });
    if (!derived && header_index(name) == raw.header.size())
      throw DataError(fmt::format("missing column '{}'", name), 0, name);
  }
  for (const auto& name : options.continuous) {
    const bool derived = std::any_of(options.interactions.begin(), options.interactions.end(),
                                     [&](const Interaction& i) { return i.name == name; });
    if (!derived && header_index(name) == raw.header.size())
      throw DataError(fmt::format("unknown continuous column '{}'", name), 0, name);
  }

  Dataset ds;
  ds.labels = spec.alternatives.labels;
  ds.label_column = spec.label_column;
  ds.provenance.source = std::move(source);
  std::vector<std::size_t> source_pos;
  for (std::size_t j = 0; j < raw.header.size(); ++j) {
    if (j == label_pos) continue;
    ds.columns.push_back({raw.header[j], false});
    source_pos.push_back(j);
  }

  ds.observations.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    const auto& cells = raw.rows[r];
    const std::size_t row = r + 1;
    Observation obs;
    std::string label = cells[label_pos];
    if (auto it = options.label_map.find(label); it != options.label_map.end()) label = it->second;
    obs.chosen = spec.alternatives.find(label);
    if (obs.chosen == spec.alternatives.size())
      throw DataError(fmt::format("row {}: label '{}' is not an alternative", row, cells[label_pos]), row,
                      spec.label_column);
    obs.values.resize(ds.columns.size());
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
      if (!parse_double(cells[source_pos[c]], obs.values[c]))
        throw DataError(fmt::format("row {}, column '{}': cannot parse '{}'", row, ds.columns[c].name,
                                    cells[source_pos[c]]),
                        row, ds.columns[c].name);
    }
    ds.observations.push_back(std::move(obs));
  }

  for (const auto& inter : options.interactions) {
    // A stored copy of a derived column must agree with the product; it is then rebuilt.
    const std::size_t stored = ds.find(inter.name);
    if (stored != ds.width()) {
      const std::size_t ia = ds.index_of(inter.a);
      const std::size_t ib = ds.index_of(inter.b);
      for (std::size_t r = 0; r < ds.size(); ++r) {
        const auto& v = ds.observations[r].values;
        if (v[stored] != v[ia] * v[ib])
          throw DataError(fmt::format("row {}, column '{}': stored value {} is not {} * {}", r + 1, inter.name,
                                      v[stored], inter.a, inter.b),
                          r + 1, inter.name);
      }
      ds.columns.erase(ds.columns.begin() + static_cast<std::ptrdiff_t>(stored));
      for (auto& obs : ds.observations) obs.values.erase(obs.values.begin() + static_cast<std::ptrdiff_t>(stored));
    }
    ds = derive_interaction(ds, inter.a, inter.b, inter.name);
  }

  auto contains = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    auto& col = ds.columns[c];
    if (contains(options.continuous, col.name)) continue;
    if (contains(referenced, col.name)) {
      for (std::size_t r = 0; r < ds.size(); ++r) {
        const double v = ds.observations[r].values[c];
        if (!is_indicator(v))
          throw DataError(fmt::format("row {}, column '{}': value {} is not 0/1", r + 1, col.name, v), r + 1,
                          col.name);
      }
      col.binary = true;
    } else {
      col.binary = std::all_of(ds.observations.begin(), ds.observations.end(),
                               [c](const Observation& o) { return is_indicator(o.values[c]); });
    }
  }
  return ds;
}

Dataset load_dataset(const std::string& path, const ModelSpec& spec, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open data file '{}'", path));
  return read_dataset(in, spec, options, path);
}

Dataset read_numeric_table(std::istream& in, std::string source, std::vector<std::string>* skipped) {
  const RawTable raw = read_raw(in);
  Dataset ds;
  ds.provenance.source = std::move(source);
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < raw.header.size(); ++j) {
    double v = 0.0;
    const bool numeric =
        std::all_of(raw.rows.begin(), raw.rows.end(), [&](const auto& row) { return parse_double(row[j], v); });
    if (numeric) {
      keep.push_back(j);
      ds.columns.push_back({raw.header[j], false});
    } else if (skipped) {
      skipped->push_back(raw.header[j]);
    }
  }
  for (const auto& cells : raw.rows) {
    Observation obs;
    obs.values.resize(keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) parse_double(cells[keep[c]], obs.values[c]);
    ds.observations.push_back(std::move(obs));
  }
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    ds.columns[c].binary = std::all_of(ds.observations.begin(), ds.observations.end(),
                                       [c](const Observation& o) { return is_indicator(o.values[c]); });
  }
  return ds;
}

Dataset load_numeric_table(const std::string& path, std::vector<std::string>* skipped) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open data file '{}'", path));
  return read_numeric_table(in, path, skipped);
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  const bool has_label = !ds.label_column.empty();
  std::string line;
  if (has_label) line = ds.label_column;
  for (std::size_t c = 0; c < ds.width(); ++c) {
    if (has_label || c > 0) line += ',';
    line += ds.columns[c].name;
  }
  out << line << '\n';
  for (const auto& obs : ds.observations) {
    line.clear();
    if (has_label) line = ds.labels.at(obs.chosen);
    for (std::size_t c = 0; c < obs.values.size(); ++c) {
      if (has_label || c > 0) line += ',';
      line += fmt::format("{}", obs.values[c]);
    }
    out << line << '\n';
  }
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write data file '{}'", path));
  write_dataset(ds, out);
}

Dataset derive_interaction(const Dataset& ds, std::string_view a, std::string_view b, std::string_view name) {
  const std::size_t ia = ds.index_of(a);
  const std::size_t ib = ds.index_of(b);
  if (name.empty()) throw DataError("interaction name is empty");
  if (ds.find(name) != ds.width() || name == ds.label_column)
    throw DataError(fmt::format("column '{}' already exists", name), 0, std::string(name));

  Dataset out = ds;
  out.columns.push_back({std::string(name), ds.columns[ia].binary && ds.columns[ib].binary});
  for (auto& obs : out.observations) obs.values.push_back(obs.values[ia] * obs.values[ib]);
  out.provenance.derivations.push_back({std::string(name), std::string(a), std::string(b)});
  return out;
}

Interaction parse_interaction(std::string_view text) {
  const auto eq = text.find('=');
  const auto star = text.find('*', eq == std::string_view::npos ? 0 : eq);
  if (eq == std::string_view::npos || star == std::string_view::npos || eq == 0 || star == eq + 1 ||
      star + 1 == text.size())
    throw DataError(fmt::format("malformed interaction '{}' (expected name=a*b)", text));
  return {std::string(text.substr(0, eq)), std::string(text.substr(eq + 1, star - eq - 1)),
          std::string(text.substr(star + 1))};
}

SummaryTable summarize(const Dataset& ds) {
  if (ds.empty()) throw DataError("cannot summarize an empty dataset");
  const double n = static_cast<double>(ds.size());
  SummaryTable table;
  for (std::size_t c = 0; c < ds.width(); ++c) {
    ColumnSummary s;
    s.column = ds.columns[c].name;
    double sum = 0.0;
    s.min = s.max = ds.observations.front().values[c];
    for (const auto& obs : ds.observations) {
      const double v = obs.values[c];
      sum += v;
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
    s.mean = sum / n;
    double ss = 0.0;
    for (const auto& obs : ds.observations) {
      const double d = obs.values[c] - s.mean;
      ss += d * d;
    }
    s.sd = std::sqrt(ss / n);
    table.rows.push_back(std::move(s));
  }
  return table;
}

std::string render_summary_text(const SummaryTable& table) {
  std::size_t width = 8;
  for (const auto& r : table.rows) width = std::max(width, r.column.size());
  std::string out = fmt::format("{:<{}}  {:>10}  {:>10}  {:>10}  {:>10}\n", "Variable", width, "Mean", "Std. Dev.",
                                "Max.", "Min.");
  for (const auto& r : table.rows)
    out += fmt::format("{:<{}}  {:>10.3f}  {:>10.3f}  {:>10.3f}  {:>10.3f}\n", r.column, width, r.mean, r.sd, r.max,
                       r.min);
  return out;
}

std::string render_summary_json(const SummaryTable& table) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json row;
    row["column"] = r.column;
    row["mean"] = r.mean;
    row["sd"] = r.sd;
    row["max"] = r.max;
    row["min"] = r.min;
    rows.push_back(std::move(row));
  }
  return rows.dump(2);
}

}  // namespace rpmixl
