// fairwake/fairness.hpp

// Copyright 2026  The Fairwake Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Bias quantification: per-group precision/recall/F1 at a fixed 0.5
// threshold, Disparate Impact over the labeled data, Predictive Disparity
// (max pairwise F1 gap), RRPD against a baseline report, min-support
// filtering, and report assembly/rendering. Metrics are computed in double
// precision; tables render 4 decimals while the JSON keeps full precision.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairwake/common.hpp"
#include "fairwake/corpus.hpp"

namespace fairwake {

inline constexpr int kDefaultMinSupport = 20;
inline constexpr double kDecisionThreshold = 0.5;

/// One scored evaluation window. `true_label` is the ground truth; the
/// predicted label is derived from the score at the decision threshold.
struct PredictionRecord {
  std::string utterance_id;
  int window_index = 0;
  double score = 0.0;  // probability of wuw
  std::string true_label;
};

inline void save_predictions(const std::filesystem::path& path,
                             const std::vector<PredictionRecord>& preds) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write predictions: " + path.string());
  for (const auto& p : preds) {
    nlohmann::ordered_json j;
    j["id"] = p.utterance_id;
    j["window"] = p.window_index;
    j["score"] = p.score;
    j["label"] = p.true_label;
    os << j.dump() << "\n";
  }
}

inline std::vector<PredictionRecord> load_predictions(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions: " + path.string());
  std::vector<PredictionRecord> preds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed prediction line");
    PredictionRecord p;
    p.utterance_id = j.at("id").get<std::string>();
    p.window_index = j.at("window").get<int>();
    p.score = j.at("score").get<double>();
    p.true_label = j.at("label").get<std::string>();
    if (p.score < 0.0 || p.score > 1.0)
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": score outside [0, 1]");
    preds.push_back(std::move(p));
  }
  return preds;
}

struct GroupMetrics {
  std::string attribute;
  std::string group;
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  long support = 0;  // positive (wuw) windows in the group
  long total_windows = 0;
  long n_speakers = 0;  // distinct speakers, context only
  bool degenerate = false;  // no positives and no positive predictions
  bool below_min_support = false;
};

struct ExcludedGroup {
  std::string attribute;
  std::string group;
  std::string reason;
  long count = 0;
};

struct DiEntry {
  std::string attribute;
  std::string advantaged;
  std::string disadvantaged;
  double advantaged_rate = 0.0;
  double disadvantaged_rate = 0.0;
  double ratio = 0.0;  // disadvantaged / advantaged, <= 1
};

struct DiResult {
  std::vector<DiEntry> pairs;
  std::optional<DiEntry> extremal;  // minimum ratio ("most imbalanced pair")
  std::vector<ExcludedGroup> excluded;
};

struct PdResult {
  double value = 0.0;
  std::string group_a;  // extremal pair, lexicographically ordered
  std::string group_b;
};

struct InsufficientGroupsError : DataError {
  using DataError::DataError;
};

/// Maps an attribute name to the manifest field. "age" and "age_group" are
/// synonyms; the canonical report labels are sex / age / accent.
inline const std::string& attribute_value(const Utterance& u,
                                          const std::string& attribute) {
  if (attribute == "sex") return u.sex;
  if (attribute == "age" || attribute == "age_group") return u.age_group;
  if (attribute == "accent") return u.accent;
  throw ConfigError("unknown demographic attribute '" + attribute + "'");
}

namespace detail {

inline void finalize_metrics(GroupMetrics& m, int min_support) {
  m.support = m.tp + m.fn;
  m.total_windows = m.tp + m.fp + m.fn + m.tn;
  m.precision = (m.tp + m.fp) > 0
                    ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp)
                    : 0.0;
  m.recall = (m.tp + m.fn) > 0
                 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn)
                 : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.degenerate = (m.tp + m.fn) == 0 && (m.tp + m.fp) == 0;
  m.below_min_support = m.support < min_support;
}

}  // namespace detail

/// Confusion counts and P/R/F1 per demographic group at the fixed threshold.
/// Every prediction must join to a manifest row; groups are returned sorted
/// by name with the min-support flag set.
inline std::vector<GroupMetrics> group_metrics(
    const std::vector<PredictionRecord>& preds,
    const std::vector<Utterance>& manifest, const std::string& attribute,
    int min_support = kDefaultMinSupport,
    double threshold = kDecisionThreshold) {
  std::map<std::string, const Utterance*> by_id;
  for (const auto& u : manifest) by_id[u.id] = &u;

  std::map<std::string, GroupMetrics> groups;
  std::map<std::string, std::set<std::string>> speakers;
  for (const auto& p : preds) {
    const auto it = by_id.find(p.utterance_id);
    if (it == by_id.end())
      throw DataError("prediction references unknown utterance id '" +
                      p.utterance_id + "'");
    const std::string& group = attribute_value(*it->second, attribute);
    GroupMetrics& m = groups[group];
    m.attribute = attribute;
    m.group = group;
    if (!it->second->speaker_id.empty())
      speakers[group].insert(it->second->speaker_id);
    const bool truth = p.true_label == "wuw";
    const bool predicted = p.score >= threshold;
    if (truth && predicted)
      ++m.tp;
    else if (!truth && predicted)
      ++m.fp;
    else if (truth && !predicted)
      ++m.fn;
    else
      ++m.tn;
  }

  std::vector<GroupMetrics> out;
  out.reserve(groups.size());
  for (auto& [name, m] : groups) {
    detail::finalize_metrics(m, min_support);
    m.n_speakers = static_cast<long>(speakers[name].size());
    out.push_back(m);
  }
  return out;
}

/// Positive-label rate ratios over the labeled manifest rows of the given
/// splits (train+validation by default, matching the data-bias protocol).
/// Every unordered pair appears once with the higher-rate group as
/// advantaged; the extremal entry is the minimum ratio.
inline DiResult disparate_impact(
    const std::vector<Utterance>& manifest, const std::string& attribute,
    const std::vector<std::string>& splits = {"train", "validation"}) {
  struct Counts {
    long total = 0;
    long positive = 0;
  };
  std::map<std::string, Counts> by_group;
  for (const auto& u : manifest) {
    if (u.is_resource()) continue;
    Counts& c = by_group[attribute_value(u, attribute)];  // group discovery
    if (std::find(splits.begin(), splits.end(), u.split) == splits.end())
      continue;
    ++c.total;
    if (u.label == "wuw") ++c.positive;
  }

  DiResult result;
  std::vector<std::pair<std::string, double>> rates;
  for (const auto& [group, c] : by_group) {
    if (c.total == 0) {
      result.excluded.push_back({attribute, group, "no samples in splits", 0});
      continue;
    }
    rates.emplace_back(group,
                       static_cast<double>(c.positive) / static_cast<double>(c.total));
  }

  for (std::size_t i = 0; i < rates.size(); ++i) {
    for (std::size_t j = i + 1; j < rates.size(); ++j) {
      auto [name_a, rate_a] = rates[i];
      auto [name_b, rate_b] = rates[j];
      if (rate_b > rate_a) {
        std::swap(name_a, name_b);
        std::swap(rate_a, rate_b);
      }
      if (rate_a <= 0.0) continue;  // both rates zero: ratio undefined
      DiEntry entry;
      entry.attribute = attribute;
      entry.advantaged = name_a;
      entry.disadvantaged = name_b;
      entry.advantaged_rate = rate_a;
      entry.disadvantaged_rate = rate_b;
      entry.ratio = rate_b / rate_a;
      result.pairs.push_back(std::move(entry));
    }
  }
  for (const auto& e : result.pairs)
    if (!result.extremal.has_value() || e.ratio < result.extremal->ratio)
      result.extremal = e;
  return result;
}

/// PD = max |F1_i - F1_j| over retained groups. The extremal pair is
/// lexicographically ordered; ties break toward the lexicographically
/// smallest pair.
inline PdResult predictive_disparity(const std::vector<GroupMetrics>& metrics) {
  std::vector<const GroupMetrics*> retained;
  for (const auto& m : metrics)
    if (!m.below_min_support) retained.push_back(&m);
  std::sort(retained.begin(), retained.end(),
            [](const GroupMetrics* a, const GroupMetrics* b) {
              return a->group < b->group;
            });
  if (retained.size() < 2)
    throw InsufficientGroupsError(
        "predictive_disparity: fewer than 2 retained groups");

  PdResult best;
  bool first = true;
  for (std::size_t i = 0; i < retained.size(); ++i) {
    for (std::size_t j = i + 1; j < retained.size(); ++j) {
      const double diff = std::abs(retained[i]->f1 - retained[j]->f1);
      if (first || diff > best.value) {
        best.value = diff;
        best.group_a = retained[i]->group;
        best.group_b = retained[j]->group;
        first = false;
      }
    }
  }
  return best;
}

/// 100 * (PD_baseline - PD_technique) / PD_baseline; negative values mean
/// the technique increased disparity.
inline double rrpd(double pd_baseline, double pd_technique) {
  if (!(pd_baseline > 0.0))
    throw std::domain_error("rrpd: baseline PD must be positive");
  return 100.0 * ((pd_baseline - pd_technique) / pd_baseline);
}

struct AttributeSection {
  std::string attribute;
  std::vector<GroupMetrics> groups;  // retained, sorted by name
  std::vector<ExcludedGroup> excluded;
  std::optional<PdResult> pd;
  std::string pd_note;
  std::optional<double> rrpd_percent;
  std::string rrpd_note;
  DiResult di;
};

struct FairnessReport {
  int min_support = kDefaultMinSupport;
  double threshold = kDecisionThreshold;
  GroupMetrics overall;
  std::vector<AttributeSection> attributes;
  std::string baseline_source;
};

/// Assembles metrics, DI, PD per attribute, and RRPD when a baseline report
/// is supplied. Attributes with fewer than two retained groups keep a note
/// instead of a PD value.
inline FairnessReport build_report(
    const std::vector<PredictionRecord>& preds,
    const std::vector<Utterance>& manifest,
    const std::vector<std::string>& attributes,
    int min_support = kDefaultMinSupport,
    const FairnessReport* baseline = nullptr,
    const std::string& baseline_source = "") {
  if (attributes.empty())
    throw ConfigError("build_report: no attributes requested");

  FairnessReport report;
  report.min_support = min_support;

  {
    GroupMetrics overall;
    overall.attribute = "overall";
    overall.group = "all";
    for (const auto& p : preds) {
      const bool truth = p.true_label == "wuw";
      const bool predicted = p.score >= report.threshold;
      if (truth && predicted)
        ++overall.tp;
      else if (!truth && predicted)
        ++overall.fp;
      else if (truth && !predicted)
        ++overall.fn;
      else
        ++overall.tn;
    }
    detail::finalize_metrics(overall, 0);
    report.overall = overall;
  }

  for (const auto& attribute : attributes) {
    AttributeSection section;
    section.attribute = attribute;
    const auto all_groups =
        group_metrics(preds, manifest, attribute, min_support);
    for (const auto& m : all_groups) {
      if (m.below_min_support)
        section.excluded.push_back(
            {attribute, m.group,
             "support " + std::to_string(m.support) + " < min_support " +
                 std::to_string(min_support),
             m.support});
      else
        section.groups.push_back(m);
    }
    try {
      section.pd = predictive_disparity(all_groups);
    } catch (const InsufficientGroupsError&) {
      section.pd_note = "fewer than 2 retained groups; PD skipped";
    }
    section.di = disparate_impact(manifest, attribute);

    if (baseline != nullptr && section.pd.has_value()) {
      const AttributeSection* base_section = nullptr;
      for (const auto& b : baseline->attributes)
        if (b.attribute == attribute) base_section = &b;
      if (base_section == nullptr || !base_section->pd.has_value()) {
        section.rrpd_note = "baseline report lacks PD for this attribute";
      } else if (!(base_section->pd->value > 0.0)) {
        section.rrpd_note = "baseline PD is zero; RRPD undefined";
      } else {
        section.rrpd_percent = rrpd(base_section->pd->value, section.pd->value);
      }
    }
    report.attributes.push_back(std::move(section));
  }
  if (baseline != nullptr) report.baseline_source = baseline_source;
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const GroupMetrics& m) {
  nlohmann::json j;
  j["attribute"] = m.attribute;
  j["group"] = m.group;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["tn"] = m.tn;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["support"] = m.support;
  j["total_windows"] = m.total_windows;
  j["n_speakers"] = m.n_speakers;
  j["degenerate"] = m.degenerate;
  return j;
}

inline GroupMetrics group_metrics_from_json(const nlohmann::json& j) {
  GroupMetrics m;
  m.attribute = j.at("attribute").get<std::string>();
  m.group = j.at("group").get<std::string>();
  m.tp = j.at("tp").get<long>();
  m.fp = j.at("fp").get<long>();
  m.fn = j.at("fn").get<long>();
  m.tn = j.at("tn").get<long>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.support = j.at("support").get<long>();
  m.total_windows = j.at("total_windows").get<long>();
  m.n_speakers = j.value("n_speakers", 0L);
  m.degenerate = j.at("degenerate").get<bool>();
  return m;
}

inline nlohmann::json to_json(const FairnessReport& report) {
  nlohmann::json j;
  j["format"] = "fairwake-report";
  j["version"] = 1;
  j["min_support"] = report.min_support;
  j["threshold"] = report.threshold;
  j["overall"] = to_json(report.overall);
  if (!report.baseline_source.empty())
    j["baseline_source"] = report.baseline_source;
  nlohmann::json sections = nlohmann::json::array();
  for (const auto& s : report.attributes) {
    nlohmann::json js;
    js["attribute"] = s.attribute;
    js["groups"] = nlohmann::json::array();
    for (const auto& g : s.groups) js["groups"].push_back(to_json(g));
    js["excluded"] = nlohmann::json::array();
    for (const auto& e : s.excluded) {
      nlohmann::json je;
      je["group"] = e.group;
      je["reason"] = e.reason;
      je["support"] = e.count;
      js["excluded"].push_back(je);
    }
    if (s.pd.has_value()) {
      js["pd"] = s.pd->value;
      js["pd_pair"] = {s.pd->group_a, s.pd->group_b};
    }
    if (!s.pd_note.empty()) js["pd_note"] = s.pd_note;
    if (s.rrpd_percent.has_value()) js["rrpd_percent"] = *s.rrpd_percent;
    if (!s.rrpd_note.empty()) js["rrpd_note"] = s.rrpd_note;
    js["di"] = nlohmann::json::array();
    for (const auto& d : s.di.pairs) {
      nlohmann::json jd;
      jd["advantaged"] = d.advantaged;
      jd["disadvantaged"] = d.disadvantaged;
      jd["advantaged_rate"] = d.advantaged_rate;
      jd["disadvantaged_rate"] = d.disadvantaged_rate;
      jd["ratio"] = d.ratio;
      js["di"].push_back(jd);
    }
    if (s.di.extremal.has_value()) {
      js["di_extremal"] = {{"advantaged", s.di.extremal->advantaged},
                           {"disadvantaged", s.di.extremal->disadvantaged},
                           {"ratio", s.di.extremal->ratio}};
    }
    sections.push_back(js);
  }
  j["attributes"] = sections;
  return j;
}

inline FairnessReport report_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "fairwake-report")
    throw DataError("not a fairwake report document");
  FairnessReport report;
  report.min_support = j.at("min_support").get<int>();
  report.threshold = j.at("threshold").get<double>();
  report.overall = group_metrics_from_json(j.at("overall"));
  report.baseline_source = j.value("baseline_source", "");
  for (const auto& js : j.at("attributes")) {
    AttributeSection s;
    s.attribute = js.at("attribute").get<std::string>();
    for (const auto& jg : js.at("groups"))
      s.groups.push_back(group_metrics_from_json(jg));
    if (js.contains("excluded"))
      for (const auto& je : js.at("excluded"))
        s.excluded.push_back({s.attribute, je.at("group").get<std::string>(),
                              je.at("reason").get<std::string>(),
                              je.at("support").get<long>()});
    if (js.contains("pd")) {
      PdResult pd;
      pd.value = js.at("pd").get<double>();
      if (js.contains("pd_pair")) {
        pd.group_a = js.at("pd_pair").at(0).get<std::string>();
        pd.group_b = js.at("pd_pair").at(1).get<std::string>();
      }
      s.pd = pd;
    }
    if (js.contains("rrpd_percent"))
      s.rrpd_percent = js.at("rrpd_percent").get<double>();
    s.pd_note = js.value("pd_note", "");
    s.rrpd_note = js.value("rrpd_note", "");
    report.attributes.push_back(std::move(s));
  }
  return report;
}

inline void save_report(const std::filesystem::path& path,
                        const FairnessReport& report) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write report: " + path.string());
  os << to_json(report).dump(2) << "\n";
}

inline FairnessReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    throw DataError("malformed report JSON: " + path.string());
  }
  return report_from_json(j);
}

/// Plain-text table rendering (4 decimals).
inline std::string render_report_text(const FairnessReport& report) {
  char buf[256];
  std::string out;
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += buf;
    out += "\n";
  };

  line("%-28s %10s %8s %9s", "Group", "F1-score", "Support", "Speakers");
  line("%s", std::string(58, '-').c_str());
  for (const auto& s : report.attributes) {
    line("[%s]", s.attribute.c_str());
    for (const auto& g : s.groups)
      line("%-28s %10.4f %8ld %9ld", g.group.c_str(), g.f1, g.support,
           g.n_speakers);
    for (const auto& e : s.excluded)
      line("%-28s %10s %8ld  (excluded: %s)", e.group.c_str(), "-", e.count,
           e.reason.c_str());
    if (s.pd.has_value())
      line("PD (%s)%*s %10.4f   pair (%s, %s)", s.attribute.c_str(),
           static_cast<int>(22 - s.attribute.size()), "", s.pd->value,
           s.pd->group_a.c_str(), s.pd->group_b.c_str());
    else if (!s.pd_note.empty())
      line("PD (%s): %s", s.attribute.c_str(), s.pd_note.c_str());
    line("%s", "");
  }

  line("%-28s %10.4f %8ld", "overall", report.overall.f1,
       report.overall.support);
  line("%s", "");

  bool any_di = false;
  for (const auto& s : report.attributes) any_di |= !s.di.pairs.empty();
  if (any_di) {
    line("%s", "Disparate Impact (train+validation)");
    line("%-10s %-22s %-22s %8s", "Attribute", "Advantaged", "Disadvantaged",
         "DI");
    for (const auto& s : report.attributes) {
      if (!s.di.extremal.has_value()) continue;
      const DiEntry& e = *s.di.extremal;
      line("%-10s %-22s %-22s %8.4f", s.attribute.c_str(),
           e.advantaged.c_str(), e.disadvantaged.c_str(), e.ratio);
    }
    line("%s", "");
  }

  bool any_rrpd = false;
  for (const auto& s : report.attributes)
    any_rrpd |= s.rrpd_percent.has_value() || !s.rrpd_note.empty();
  if (any_rrpd) {
    line("RRPD vs baseline%s%s", report.baseline_source.empty() ? "" : " ",
         report.baseline_source.c_str());
    line("%-10s %10s", "Attribute", "RRPD (%)");
    for (const auto& s : report.attributes) {
      if (s.rrpd_percent.has_value())
        line("%-10s %10.2f", s.attribute.c_str(), *s.rrpd_percent);
      else if (!s.rrpd_note.empty())
        line("%-10s %10s  (%s)", s.attribute.c_str(), "-", s.rrpd_note.c_str());
    }
  }
  return out;
}

}  // namespace fairwake
