#include "rpmixl/model_spec.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "rpmixl/error.hpp"

namespace rpmixl {

using nlohmann::json;

std::size_t AlternativeSet::find(std::string_view label) const noexcept {
  auto it = std::find(labels.begin(), labels.end(), label);
  return static_cast<std::size_t>(it - labels.begin());
}

std::size_t ModelSpec::random_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const UtilityEntry& e) { return e.is_random(); }));
}

std::vector<std::string> ModelSpec::referenced_columns() const {
  std::vector<std::string> out;
  auto add = [&out](const std::string& c) {
    if (c != kConstant && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  for (const auto& e : entries) add(e.variable);
  for (const auto& e : entries) {
    for (const auto& z : e.mean_shifters) add(z);
    for (const auto& w : e.variance_shifters) add(w);
  }
  return out;
}

std::string ModelSpec::entry_name(const UtilityEntry& entry) const {
  return alternatives.labels.at(entry.alternative) + ":" + entry.variable;
}

std::string_view to_string(ParameterRole role) noexcept {
  switch (role) {
    case ParameterRole::FixedBeta: return "fixed";
    case ParameterRole::RandomMean: return "random_mean";
    case ParameterRole::RandomScale: return "random_scale";
    case ParameterRole::MeanShifter: return "mean_shifter";
    case ParameterRole::VarianceShifter: return "variance_shifter";
  }
  return "unknown";
}

ParameterLayout::ParameterLayout(const ModelSpec& spec) : slots_(spec.entries.size()) {
  auto push = [this](std::string name, ParameterRole role, std::size_t entry, std::string shifter = {}) {
    const std::size_t index = descriptors_.size();
    descriptors_.push_back({std::move(name), role, entry, index, std::move(shifter)});
    return index;
  };

  // Fixed constants by alternative order, then the other fixed entries in spec order.
  for (std::size_t alt = 0; alt < spec.alternatives.size(); ++alt) {
    for (std::size_t i = 0; i < spec.entries.size(); ++i) {
      const auto& e = spec.entries[i];
      if (e.alternative == alt && e.is_constant() && !e.is_random())
        slots_[i].beta = push(spec.entry_name(e), ParameterRole::FixedBeta, i);
    }
  }
  for (std::size_t i = 0; i < spec.entries.size(); ++i) {
    const auto& e = spec.entries[i];
    if (!e.is_constant() && !e.is_random())
      slots_[i].beta = push(spec.entry_name(e), ParameterRole::FixedBeta, i);
  }
  for (std::size_t i = 0; i < spec.entries.size(); ++i) {
    const auto& e = spec.entries[i];
    if (!e.is_random()) continue;
    const std::string stem = spec.entry_name(e);
    auto& slot = slots_[i];
    slot.beta = push(stem, ParameterRole::RandomMean, i);
    slot.scale = push(stem + ":sd", ParameterRole::RandomScale, i);
    for (const auto& z : e.mean_shifters)
      slot.mean_shifters.push_back(push(stem + ":mean:" + z, ParameterRole::MeanShifter, i, z));
    for (const auto& w : e.variance_shifters)
      slot.variance_shifters.push_back(push(stem + ":var:" + w, ParameterRole::VarianceShifter, i, w));
  }
}

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> out;
  out.reserve(descriptors_.size());
  for (const auto& d : descriptors_) out.push_back(d.name);
  return out;
}

std::size_t ParameterLayout::find(std::string_view name) const noexcept {
  auto it = std::find_if(descriptors_.begin(), descriptors_.end(),
                         [&](const ParameterDescriptor& d) { return d.name == name; });
  return static_cast<std::size_t>(it - descriptors_.begin());
}

void validate(const ModelSpec& spec) {
  const auto& alts = spec.alternatives;
  if (alts.size() < 2) throw SpecError("alternatives", "at least 2 alternatives are required");
  std::set<std::string> seen_labels;
  for (std::size_t i = 0; i < alts.size(); ++i) {
    if (alts.labels[i].empty()) throw SpecError(fmt::format("alternatives[{}]", i), "empty label");
    if (!seen_labels.insert(alts.labels[i]).second)
      throw SpecError(fmt::format("alternatives[{}]", i), fmt::format("duplicate alternative '{}'", alts.labels[i]));
  }
  if (alts.base_index >= alts.size()) throw SpecError("base", "base alternative out of range");
  if (spec.label_column.empty()) throw SpecError("label_column", "must be a non-empty column name");
  if (spec.entries.empty()) throw SpecError("utilities", "at least one utility entry is required");

  std::set<std::pair<std::size_t, std::string>> seen_pairs;
  for (std::size_t i = 0; i < spec.entries.size(); ++i) {
    const auto& e = spec.entries[i];
    const std::string path = fmt::format("utilities[{}]", i);
    if (e.alternative >= alts.size()) throw SpecError(path + ".alt", "alternative index out of range");
    if (e.variable.empty()) throw SpecError(path + ".var", "empty variable name");
    if (e.variable == spec.label_column)
      throw SpecError(path + ".var", fmt::format("'{}' is the label column", e.variable));
    if (e.is_constant() && e.alternative == alts.base_index)
      throw SpecError(path, fmt::format("constant on base alternative '{}' is not identified",
                                        alts.labels[e.alternative]));
    if (!seen_pairs.emplace(e.alternative, e.variable).second)
      throw SpecError(path, fmt::format("duplicate entry ({}, {})", alts.labels[e.alternative], e.variable));
    if (!e.is_random() && (!e.mean_shifters.empty() || !e.variance_shifters.empty()))
      throw SpecError(path, "shifters are only allowed on random entries");

    auto check_shifters = [&](const std::vector<std::string>& list, const char* key) {
      std::set<std::string> seen;
      for (std::size_t j = 0; j < list.size(); ++j) {
        const std::string sp = fmt::format("{}.{}[{}]", path, key, j);
        if (list[j].empty() || list[j] == kConstant) throw SpecError(sp, "shifter must name a data column");
        if (list[j] == e.variable) throw SpecError(sp, "shifter equals the entry's own variable");
        if (list[j] == spec.label_column) throw SpecError(sp, "shifter is the label column");
        if (!seen.insert(list[j]).second) throw SpecError(sp, fmt::format("duplicate shifter '{}'", list[j]));
      }
    };
    check_shifters(e.mean_shifters, "het_mean");
    check_shifters(e.variance_shifters, "het_var");
  }
}

namespace {

const std::string& expect_string(const json& node, const std::string& path) {
  if (!node.is_string()) throw SpecError(path, "expected a string");
  return node.get_ref<const std::string&>();
}

std::vector<std::string> expect_string_list(const json& node, const std::string& path) {
  if (!node.is_array()) throw SpecError(path, "expected a list of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(expect_string(node[i], fmt::format("{}[{}]", path, i)));
  return out;
}

void reject_unknown_keys(const json& node, std::initializer_list<std::string_view> allowed, const std::string& path) {
  for (const auto& [key, value] : node.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw SpecError(path.empty() ? key : path + "." + key, "unknown key");
  }
}

const json& require(const json& node, const char* key, const std::string& path) {
  auto it = node.find(key);
  if (it == node.end()) throw SpecError(path.empty() ? key : path + "." + key, "missing required key");
  return *it;
}

}  // namespace

ModelSpec parse_model_spec(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SpecError("", fmt::format("syntax error: {}", e.what()));
  }
  if (!doc.is_object()) throw SpecError("", "top level must be a map");
  reject_unknown_keys(doc, {"alternatives", "base", "label_column", "utilities"}, "");

  ModelSpec spec;
  spec.alternatives.labels = expect_string_list(require(doc, "alternatives", ""), "alternatives");
  if (spec.alternatives.size() < 2) throw SpecError("alternatives", "at least 2 alternatives are required");
  const std::string& base = expect_string(require(doc, "base", ""), "base");
  spec.alternatives.base_index = spec.alternatives.find(base);
  if (spec.alternatives.base_index == spec.alternatives.size())
    throw SpecError("base", fmt::format("unknown alternative '{}'", base));
  spec.label_column = expect_string(require(doc, "label_column", ""), "label_column");

  const json& utilities = require(doc, "utilities", "");
  if (!utilities.is_array()) throw SpecError("utilities", "expected a list of maps");
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    const std::string path = fmt::format("utilities[{}]", i);
    const json& u = utilities[i];
    if (!u.is_object()) throw SpecError(path, "expected a map");
    reject_unknown_keys(u, {"alt", "var", "kind", "het_mean", "het_var", "dist"}, path);

    UtilityEntry entry;
    const std::string& alt = expect_string(require(u, "alt", path), path + ".alt");
    entry.alternative = spec.alternatives.find(alt);
    if (entry.alternative == spec.alternatives.size())
      throw SpecError(path + ".alt", fmt::format("unknown alternative '{}'", alt));
    entry.variable = expect_string(require(u, "var", path), path + ".var");

    const std::string& kind = expect_string(require(u, "kind", path), path + ".kind");
    if (kind == "fixed") {
      entry.kind = CoefficientKind::Fixed;
    } else if (kind == "random") {
      entry.kind = CoefficientKind::Random;
    } else {
      throw SpecError(path + ".kind", fmt::format("unknown kind '{}' (expected fixed or random)", kind));
    }
    if (auto it = u.find("het_mean"); it != u.end()) entry.mean_shifters = expect_string_list(*it, path + ".het_mean");
    if (auto it = u.find("het_var"); it != u.end()) entry.variance_shifters = expect_string_list(*it, path + ".het_var");
    if (auto it = u.find("dist"); it != u.end()) {
      const std::string& dist = expect_string(*it, path + ".dist");
      if (dist != "normal") throw SpecError(path + ".dist", fmt::format("unsupported distribution '{}'", dist));
    }
    spec.entries.push_back(std::move(entry));
  }

  validate(spec);
  return spec;
}

ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("", fmt::format("cannot open model file '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_spec(buf.str());
}

std::string serialize_model_spec(const ModelSpec& spec) {
  nlohmann::ordered_json doc;
  doc["alternatives"] = spec.alternatives.labels;
  doc["base"] = spec.alternatives.labels.at(spec.alternatives.base_index);
  doc["label_column"] = spec.label_column;
  auto utilities = nlohmann::ordered_json::array();
  for (const auto& e : spec.entries) {
    nlohmann::ordered_json u;
    u["alt"] = spec.alternatives.labels.at(e.alternative);
    u["var"] = e.variable;
    u["kind"] = e.is_random() ? "random" : "fixed";
    if (!e.mean_shifters.empty()) u["het_mean"] = e.mean_shifters;
    if (!e.variance_shifters.empty()) u["het_var"] = e.variance_shifters;
    if (e.is_random()) u["dist"] = "normal";
    utilities.push_back(std::move(u));
  }
  doc["utilities"] = std::move(utilities);
  return doc.dump(2);
}

}  // namespace rpmixl
