#pragma once

// Scenario files (JSON), the read-only Genius utility-space XML subset, and a
// seeded scenario generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "micro/domain.hpp"
#include "micro/rng.hpp"

namespace micro {

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& object, const char* key,
                                     const std::string& where) {
  if (!object.is_object()) throw ValidationError(where + ": expected an object");
  auto it = object.find(key);
  if (it == object.end()) throw ValidationError(where + "." + key + ": missing");
  return *it;
}

inline double require_number(const nlohmann::json& value, const std::string& where) {
  if (!value.is_number()) throw ValidationError(where + ": expected a number");
  return value.get<double>();
}

inline std::string require_string(const nlohmann::json& value, const std::string& where) {
  if (!value.is_string()) throw ValidationError(where + ": expected a string");
  return value.get<std::string>();
}

inline Profile profile_from_json(const nlohmann::json& node, const OutcomeSpace& space,
                                 const std::string& where) {
  Profile profile;
  const auto& weights = require(node, "weights", where);
  const auto& evaluations = require(node, "evaluations", where);
  if (!weights.is_object()) throw ValidationError(where + ".weights: expected an object");
  if (!evaluations.is_object()) throw ValidationError(where + ".evaluations: expected an object");
  for (const auto& [key, _] : weights.items())
    if (space.issue_index(key) == space.issue_count())
      throw ValidationError(where + ".weights." + key + ": unknown issue");
  for (const auto& [key, _] : evaluations.items())
    if (space.issue_index(key) == space.issue_count())
      throw ValidationError(where + ".evaluations." + key + ": unknown issue");

  for (const auto& issue : space.issues()) {
    profile.weights.push_back(
        require_number(require(weights, issue.name.c_str(), where + ".weights"),
                       where + ".weights." + issue.name));
    const std::string table_where = where + ".evaluations." + issue.name;
    const auto& table = require(evaluations, issue.name.c_str(), where + ".evaluations");
    if (!table.is_object()) throw ValidationError(table_where + ": expected an object");
    for (const auto& [label, _] : table.items())
      if (issue.index_of(label) == issue.size())
        throw ValidationError(table_where + "." + label + ": unknown value label");
    std::vector<double> row;
    for (const auto& label : issue.values)
      row.push_back(require_number(require(table, label.c_str(), table_where),
                                   table_where + "." + label));
    profile.evaluations.push_back(std::move(row));
  }
  profile.reservation = require_number(require(node, "reservation", where), where + ".reservation");
  return profile;
}

}  // namespace detail

/// Parses and validates a JSON scenario document.
inline Scenario load_scenario(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("scenario: top level must be an object");
  const std::string name = detail::require_string(detail::require(doc, "name", "scenario"), "name");

  const auto& issues_node = detail::require(doc, "issues", "scenario");
  if (!issues_node.is_array()) throw ValidationError("issues: expected an array");
  std::vector<Issue> issues;
  for (std::size_t j = 0; j < issues_node.size(); ++j) {
    const std::string where = "issues[" + std::to_string(j) + "]";
    Issue issue;
    issue.name = detail::require_string(detail::require(issues_node[j], "name", where), where + ".name");
    const auto& values = detail::require(issues_node[j], "values", where);
    if (!values.is_array()) throw ValidationError(where + ".values: expected an array");
    for (std::size_t v = 0; v < values.size(); ++v)
      issue.values.push_back(
          detail::require_string(values[v], where + ".values[" + std::to_string(v) + "]"));
    issues.push_back(std::move(issue));
  }
  OutcomeSpace space(std::move(issues));

  const auto& profiles_node = detail::require(doc, "profiles", "scenario");
  if (!profiles_node.is_array()) throw ValidationError("profiles: expected an array");
  std::vector<Profile> profiles;
  for (std::size_t i = 0; i < profiles_node.size(); ++i)
    profiles.push_back(
        detail::profile_from_json(profiles_node[i], space, "profiles[" + std::to_string(i) + "]"));
  return Scenario(name, std::move(space), std::move(profiles));
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return load_scenario(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

/// Serializes to the JSON scenario format (two-space indent, trailing newline).
inline std::string serialize_scenario(const Scenario& scenario) {
  using ordered = nlohmann::ordered_json;
  ordered doc;
  doc["name"] = scenario.name;
  ordered issues = ordered::array();
  for (const auto& issue : scenario.space.issues())
    issues.push_back(ordered{{"name", issue.name}, {"values", issue.values}});
  doc["issues"] = std::move(issues);
  ordered profiles = ordered::array();
  for (const auto& profile : scenario.profiles) {
    ordered weights = ordered::object();
    ordered evaluations = ordered::object();
    for (std::size_t j = 0; j < scenario.space.issue_count(); ++j) {
      const auto& issue = scenario.space.issue(j);
      weights[issue.name] = profile.weights[j];
      ordered table = ordered::object();
      for (std::size_t v = 0; v < issue.size(); ++v) table[issue.values[v]] = profile.evaluations[j][v];
      evaluations[issue.name] = std::move(table);
    }
    profiles.push_back(ordered{
        {"weights", std::move(weights)},
        {"evaluations", std::move(evaluations)},
        {"reservation", profile.reservation},
    });
  }
  doc["profiles"] = std::move(profiles);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Genius utility-space XML

struct GeniusProfile {
  Profile profile;
  std::vector<std::string> warnings;
};

/// Reads weighted discrete issues from a Genius `<utility_space>` document.
///
/// Item evaluations are divided by the per-issue maximum and weights by their
/// sum when it differs from 1; both rescalings are reported in `warnings`, as
/// is every element outside the supported subset. With `strict` any warning
/// becomes a ValidationError.
inline GeniusProfile parse_genius_profile(std::string_view xml_text, const OutcomeSpace& space,
                                          bool strict = false) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml_text)};
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("genius XML: line " + std::to_string(e.line()) + ": " + e.message());
  }

  GeniusProfile result;
  auto warn = [&](std::string message) {
    if (strict) throw ValidationError("genius XML (strict): " + message);
    result.warnings.push_back(std::move(message));
  };

  auto root = tree.get_child_optional("utility_space");
  if (!root) throw ParseError("genius XML: missing <utility_space> root element");
  auto objective = root->get_child_optional("objective");
  if (!objective) throw ParseError("genius XML: missing <objective> element");

  const std::size_t m = space.issue_count();
  std::vector<std::optional<std::vector<double>>> raw_evals(m);
  std::map<std::string, std::size_t> index_attr_to_issue;
  std::vector<std::pair<std::string, double>> raw_weights;

  for (const auto& [tag, child] : *root) {
    if (tag == "objective" || tag == "<xmlattr>") continue;
    if (tag == "reservation") {
      result.profile.reservation = child.get<double>("<xmlattr>.value", 0.0);
      continue;
    }
    warn("ignored element <" + tag + ">");
  }

  for (const auto& [tag, child] : *objective) {
    if (tag == "<xmlattr>") continue;
    if (tag == "issue") {
      const auto name = child.get<std::string>("<xmlattr>.name", "");
      const auto type = child.get<std::string>("<xmlattr>.type", "discrete");
      if (type != "discrete") throw ValidationError("genius XML: issue '" + name + "' is not discrete");
      const std::size_t j = space.issue_index(name);
      if (j == m) throw ValidationError("genius XML: unknown issue '" + name + "'");
      if (raw_evals[j]) throw ValidationError("genius XML: issue '" + name + "' listed twice");
      index_attr_to_issue[child.get<std::string>("<xmlattr>.index", std::to_string(j + 1))] = j;

      const Issue& issue = space.issue(j);
      std::vector<std::optional<double>> evals(issue.size());
      for (const auto& [item_tag, item] : child) {
        if (item_tag == "<xmlattr>") continue;
        if (item_tag != "item") {
          warn("ignored element <" + item_tag + "> in issue '" + name + "'");
          continue;
        }
        const auto label = item.get<std::string>("<xmlattr>.value", "");
        const std::size_t v = issue.index_of(label);
        if (v == issue.size())
          throw ValidationError("genius XML: unknown value '" + label + "' for issue '" + name + "'");
        auto evaluation = item.get_optional<double>("<xmlattr>.evaluation");
        if (!evaluation)
          throw ParseError("genius XML: item '" + label + "' of issue '" + name +
                           "' has no numeric evaluation");
        if (!(*evaluation >= 0.0) || !std::isfinite(*evaluation))
          throw ValidationError("genius XML: negative evaluation for '" + name + "." + label + "'");
        evals[v] = *evaluation;
      }
      std::vector<double> row;
      for (std::size_t v = 0; v < evals.size(); ++v) {
        if (!evals[v])
          throw ValidationError("genius XML: issue '" + name + "' has no item for value '" +
                                issue.values[v] + "'");
        row.push_back(*evals[v]);
      }
      raw_evals[j] = std::move(row);
    } else if (tag == "weight") {
      auto value = child.get_optional<double>("<xmlattr>.value");
      auto index = child.get_optional<std::string>("<xmlattr>.index");
      if (!value || !index) throw ParseError("genius XML: <weight> needs index and value attributes");
      raw_weights.emplace_back(*index, *value);
    } else {
      warn("ignored element <" + tag + "> in objective");
    }
  }

  for (std::size_t j = 0; j < m; ++j)
    if (!raw_evals[j]) throw ValidationError("genius XML: issue '" + space.issue(j).name + "' missing");

  std::vector<std::optional<double>> weights(m);
  for (const auto& [index, value] : raw_weights) {
    auto it = index_attr_to_issue.find(index);
    if (it == index_attr_to_issue.end())
      throw ValidationError("genius XML: weight index " + index + " matches no issue");
    if (!(value >= 0.0) || !std::isfinite(value))
      throw ValidationError("genius XML: weight index " + index + " is negative");
    weights[it->second] = value;
  }
  double weight_sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!weights[j]) throw ParseError("genius XML: missing weight for issue '" + space.issue(j).name + "'");
    weight_sum += *weights[j];
  }
  if (!(weight_sum > 0.0)) throw ValidationError("genius XML: weights sum to zero");
  const bool renormalize = std::abs(weight_sum - 1.0) > kWeightTolerance;
  if (renormalize) {
    std::ostringstream message;
    message << "weights summed to " << weight_sum << "; divided by their sum";
    warn(message.str());
  }

  Profile& profile = result.profile;
  for (std::size_t j = 0; j < m; ++j) {
    profile.weights.push_back(renormalize ? *weights[j] / weight_sum : *weights[j]);
    auto row = std::move(*raw_evals[j]);
    const double top = *std::max_element(row.begin(), row.end());
    if (!(top > 0.0))
      throw ValidationError("genius XML: issue '" + space.issue(j).name + "' has all-zero evaluations");
    if (top != 1.0) {
      std::ostringstream message;
      message << "issue '" << space.issue(j).name << "' evaluations divided by maximum " << top;
      warn(message.str());
    }
    for (double& e : row) e /= top;
    profile.evaluations.push_back(std::move(row));
  }
  try {
    profile.validate(space);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("genius XML: ") + e.what());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Generator

struct GeneratorConfig {
  std::uint64_t seed = 0;
  std::size_t issue_count = 3;
  /// One entry applies to every issue; otherwise one entry per issue.
  std::vector<std::size_t> values_per_issue{4};
  std::size_t seats = 3;
  double reservation = 0.0;
  std::string name;
  std::uint64_t outcome_cap = kDefaultOutcomeCap;
};

/// Random linear-additive scenario, a pure function of the config.
///
/// Weights are drawn in (0,1] and divided by their sum; evaluations are drawn
/// in [0,1) and divided by the per-issue maximum so the best value scores 1.
inline Scenario generate_scenario(const GeneratorConfig& config) {
  if (config.issue_count == 0) throw ValidationError("issue_count: must be positive");
  if (config.seats < 2) throw ValidationError("seats: must be at least 2");
  if (!(config.reservation >= 0.0 && config.reservation <= 1.0))
    throw ValidationError("reservation: must lie in [0,1]");
  if (config.values_per_issue.size() != 1 && config.values_per_issue.size() != config.issue_count)
    throw ValidationError("values_per_issue: need one entry or one per issue");

  std::vector<Issue> issues;
  for (std::size_t j = 0; j < config.issue_count; ++j) {
    const std::size_t n =
        config.values_per_issue.size() == 1 ? config.values_per_issue[0] : config.values_per_issue[j];
    if (n == 0) throw ValidationError("values_per_issue: must be positive");
    Issue issue{"issue" + std::to_string(j), {}};
    for (std::size_t v = 0; v < n; ++v) issue.values.push_back("v" + std::to_string(v));
    issues.push_back(std::move(issue));
  }
  OutcomeSpace space(std::move(issues));
  check_capacity(space, config.outcome_cap);

  Rng rng(derive_seed(config.seed, 0x5CE4A210ull));
  std::vector<Profile> profiles;
  for (std::size_t seat = 0; seat < config.seats; ++seat) {
    Profile profile;
    double sum = 0.0;
    for (std::size_t j = 0; j < config.issue_count; ++j) {
      const double w = 1.0 - uniform_unit(rng);
      profile.weights.push_back(w);
      sum += w;
    }
    for (double& w : profile.weights) w /= sum;
    for (std::size_t j = 0; j < config.issue_count; ++j) {
      std::vector<double> row(space.issue(j).size());
      for (double& e : row) e = uniform_unit(rng);
      const double top = *std::max_element(row.begin(), row.end());
      // a single-valued issue drawn at exactly 0 still has to reach 1
      for (double& e : row) e = top > 0.0 ? e / top : 1.0;
      profile.evaluations.push_back(std::move(row));
    }
    profile.reservation = config.reservation;
    profiles.push_back(std::move(profile));
  }
  std::string name = config.name.empty() ? "generated-" + std::to_string(config.seed) : config.name;
  return Scenario(std::move(name), std::move(space), std::move(profiles));
}

}  // namespace micro
