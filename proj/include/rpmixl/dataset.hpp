#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rpmixl/model_spec.hpp"

namespace rpmixl {

struct Column {
  std::string name;
  bool binary = false;

  bool operator==(const Column&) const = default;
};

/// Record of a derived product column: name = a * b.
struct Interaction {
  std::string name;
  std::string a;
  std::string b;

  bool operator==(const Interaction&) const = default;
};

struct Observation {
  std::size_t chosen = 0;
  std::vector<double> values;  // aligned to Dataset::columns

  bool operator==(const Observation&) const = default;
};

struct Provenance {
  std::string source;
  std::vector<Interaction> derivations;
};

class Dataset {
 public:
  std::vector<Column> columns;
  std::vector<std::string> labels;  // outcome labels, index = Observation::chosen
  std::string label_column;
  std::vector<Observation> observations;
  Provenance provenance;

  std::size_t size() const noexcept { return observations.size(); }
  bool empty() const noexcept { return observations.empty(); }
  std::size_t width() const noexcept { return columns.size(); }

  /// Column position, or width() when absent.
  std::size_t find(std::string_view name) const noexcept;
  /// Column position; throws DataError when absent.
  std::size_t index_of(std::string_view name) const;

  /// Compares schema, labels and rows; provenance is metadata and is ignored.
  bool operator==(const Dataset& other) const {
    return columns == other.columns && labels == other.labels && label_column == other.label_column &&
           observations == other.observations;
  }
};

struct LoadOptions {
  /// Columns allowed to hold arbitrary finite values even when the model references them.
  std::vector<std::string> continuous;
  /// Raw label text -> alternative label, applied before exact matching.
  std::map<std::string, std::string> label_map;
  /// Product columns derived, in order, right after reading.
  std::vector<Interaction> interactions;
};

/// Reads and validates observations for `spec`.
///
/// Columns referenced by the model are binary indicators unless listed in
/// LoadOptions::continuous; other columns are flagged binary when every value is 0 or 1.
Dataset load_dataset(const std::string& path, const ModelSpec& spec, const LoadOptions& options = {});
Dataset read_dataset(std::istream& in, const ModelSpec& spec, const LoadOptions& options = {},
                     std::string source = "<stream>");

/// Reads a CSV without a model. Columns containing any non-numeric cell are skipped and
/// their names appended to `skipped` when provided.
Dataset read_numeric_table(std::istream& in, std::string source = "<stream>",
                           std::vector<std::string>* skipped = nullptr);
Dataset load_numeric_table(const std::string& path, std::vector<std::string>* skipped = nullptr);

/// Writes the label column first, then every data column, using round-trip precision.
void write_dataset(const Dataset& ds, std::ostream& out);
void save_dataset(const Dataset& ds, const std::string& path);

/// Returns a copy with column `name` = a * b appended and the derivation logged.
Dataset derive_interaction(const Dataset& ds, std::string_view a, std::string_view b, std::string_view name);

/// Parses "name=a*b".
Interaction parse_interaction(std::string_view text);

struct ColumnSummary {
  std::string column;
  double mean = 0.0;
  double sd = 0.0;  // population convention, divisor N
  double max = 0.0;
  double min = 0.0;
};

struct SummaryTable {
  std::vector<ColumnSummary> rows;
};

SummaryTable summarize(const Dataset& ds);
std::string render_summary_text(const SummaryTable& table);
std::string render_summary_json(const SummaryTable& table);

}  // namespace rpmixl
