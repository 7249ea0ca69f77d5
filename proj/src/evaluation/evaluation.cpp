#include "evaluation/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "common/error.hpp"
#include "common/log.hpp"
#include "projection/projection.hpp"

namespace wsground {

namespace {

thread_local bool g_quiet = false;

struct QuietWarnings {
  QuietWarnings() : previous(g_quiet) { g_quiet = true; }
  ~QuietWarnings() { g_quiet = previous; }
  bool previous;
};

std::size_t count_missing(std::span<const EvalItem> items, const char* metric) {
  const auto missing = static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [](const EvalItem& i) { return i.prediction == nullptr; }));
  if (missing > 0 && !g_quiet)
    log::warn(std::to_string(missing) + " queries lack a prediction; counted wrong for " + metric);
  return missing;
}

std::string format_threshold(double m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", m);
  return buf;
}

}  // namespace

double acc_at_iou(std::span<const EvalItem> items, double m) {
  if (items.empty()) return 0.0;
  count_missing(items, "Acc@IoU");
  std::size_t hit = 0;
  for (const auto& i : items) {
    if (!i.prediction) continue;
    if (!i.truth.target_box) throw ContractError("acc_at_iou: query " + i.truth.query_id + " has no target box");
    if (iou_3d(i.prediction->predicted_box, *i.truth.target_box) >= m) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(items.size());
}

double selection_accuracy(std::span<const EvalItem> items) {
  if (items.empty()) return 0.0;
  count_missing(items, "selection accuracy");
  std::size_t hit = 0;
  for (const auto& i : items) {
    if (!i.prediction) continue;
    if (!i.truth.target_proposal_id)
      throw ContractError("selection_accuracy: query " + i.truth.query_id + " has no target proposal");
    if (i.prediction->predicted_proposal_id == *i.truth.target_proposal_id) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(items.size());
}

double recall_at_n_iou(std::span<const EvalItem> items, int n, double m) {
  if (n < 1) throw ContractError("recall_at_n_iou: n must be >= 1");
  if (items.empty()) return 0.0;
  count_missing(items, "R@n,IoU@m");
  std::size_t hit = 0;
  for (const auto& i : items) {
    if (!i.prediction) continue;
    if (!i.truth.target_box) throw ContractError("recall_at_n_iou: query " + i.truth.query_id + " has no target box");
    const auto top = std::min<std::size_t>(i.ranked_boxes.size(), static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < top; ++r)
      if (iou_3d(i.ranked_boxes[r], *i.truth.target_box) > m) {
        ++hit;
        break;
      }
  }
  return static_cast<double>(hit) / static_cast<double>(items.size());
}

std::string_view to_string(Subset subset) {
  switch (subset) {
    case Subset::overall: return "Overall";
    case Subset::unique: return "Unique";
    case Subset::multiple: return "Multiple";
    case Subset::easy: return "Easy";
    case Subset::hard: return "Hard";
    case Subset::view_dependent: return "View-dep.";
    case Subset::view_independent: return "View-indep.";
  }
  return "?";
}

std::vector<Subset> bucket_query(const GroundTruth& t, const BucketOptions& options) {
  std::vector<Subset> out{Subset::overall};
  if (t.unique) out.push_back(*t.unique ? Subset::unique : Subset::multiple);
  if (t.distractor_count) out.push_back(*t.distractor_count <= options.easy_max_distractors ? Subset::easy : Subset::hard);
  if (t.view_dependent) out.push_back(*t.view_dependent ? Subset::view_dependent : Subset::view_independent);
  return out;
}

std::vector<GroundTruth> ground_truth_for(const Scene& scene) {
  const bool labelled = std::all_of(scene.proposals.begin(), scene.proposals.end(),
                                    [](const Proposal& p) { return p.category_id.has_value(); });
  std::vector<GroundTruth> out;
  for (const auto& q : scene.queries) {
    GroundTruth t;
    t.scene_id = scene.scene_id;
    t.query_id = q.query_id;
    t.target_proposal_id = q.target_proposal_id();
    if (t.target_proposal_id)
      if (const auto* p = scene.find_proposal(*t.target_proposal_id)) t.target_box = p->box3d;
    t.target_category_id = q.target_category_id;
    t.distractor_count = q.distractor_count;
    t.view_dependent = q.view_dependent;
    if (labelled && !scene.proposals.empty()) {
      const auto same = std::count_if(scene.proposals.begin(), scene.proposals.end(), [&](const Proposal& p) {
        return *p.category_id == q.target_category_id;
      });
      t.unique = same == 1;
    }
    out.push_back(std::move(t));
  }
  return out;
}

const SubsetRow* EvalReport::row(Subset subset) const {
  for (const auto& r : rows)
    if (r.subset == subset) return &r;
  return nullptr;
}

EvalReport evaluate(std::span<const EvalItem> items, const MetricOptions& options, std::string variant) {
  EvalReport report;
  report.variant = std::move(variant);
  report.options = options;

  std::map<Subset, std::vector<EvalItem>> groups;
  std::size_t missing_meta[3] = {0, 0, 0};
  for (const auto& item : items) {
    for (Subset s : bucket_query(item.truth, options.buckets)) groups[s].push_back(item);
    missing_meta[0] += !item.truth.unique;
    missing_meta[1] += !item.truth.distractor_count;
    missing_meta[2] += !item.truth.view_dependent;
  }
  const char* partitions[3] = {"Unique/Multiple", "Easy/Hard", "View-dep./View-indep."};
  for (int p = 0; p < 3; ++p)
    if (missing_meta[p] > 0 && missing_meta[p] < items.size())
      log::warn(std::to_string(missing_meta[p]) + " queries lack metadata for the " + partitions[p] +
                " split and are left out of it");

  const auto missing = static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [](const EvalItem& i) { return i.prediction == nullptr; }));
  if (missing > 0) log::warn(std::to_string(missing) + " queries lack a prediction and count as wrong");
  const QuietWarnings quiet;
  for (Subset s : {Subset::overall, Subset::unique, Subset::multiple, Subset::easy, Subset::hard,
                   Subset::view_dependent, Subset::view_independent}) {
    const auto it = groups.find(s);
    if (it == groups.end() && s != Subset::overall) continue;
    const std::vector<EvalItem> empty;
    const auto& g = it == groups.end() ? empty : it->second;
    SubsetRow row;
    row.subset = s;
    row.count = g.size();
    if (options.acc_iou)
      for (double m : options.iou_thresholds) row.values.emplace_back("Acc@" + format_threshold(m), acc_at_iou(g, m));
    if (options.selection) row.values.emplace_back("Selection", selection_accuracy(g));
    if (options.recall)
      for (double m : options.iou_thresholds)
        row.values.emplace_back("R@" + std::to_string(options.recall_n) + ",IoU@" + format_threshold(m),
                                recall_at_n_iou(g, options.recall_n, m));
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string projection_variant_label(std::string_view extension_mode) {
  if (extension_mode == "none") return "Unmodified Projection";
  if (extension_mode == "boundary_extended") return "Boundary-Extended Projection";
  return std::string(extension_mode);
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [name, v] : r.values) values[name] = v;
    rows.push_back({{"subset", std::string(to_string(r.subset))}, {"count", r.count}, {"metrics", values}});
  }
  return {{"variant", report.variant},
          {"meta", report.meta},
          {"parameters",
           {{"iou_thresholds", report.options.iou_thresholds},
            {"recall_n", report.options.recall_n},
            {"easy_max_distractors", report.options.buckets.easy_max_distractors}}},
          {"rows", rows}};
}

std::string format_report_table(std::span<const EvalReport> reports) {
  std::ostringstream out;
  char cell[64];
  for (const auto& report : reports) {
    if (report.rows.empty()) continue;
    if (!report.variant.empty()) out << report.variant << '\n';
    const auto& columns = report.rows.front().values;
    std::snprintf(cell, sizeof cell, "%-12s %6s", "Subset", "Count");
    out << cell;
    for (const auto& [name, v] : columns) {
      std::snprintf(cell, sizeof cell, " %14s", name.c_str());
      out << cell;
    }
    out << '\n';
    for (const auto& r : report.rows) {
      std::snprintf(cell, sizeof cell, "%-12s %6zu", std::string(to_string(r.subset)).c_str(), r.count);
      out << cell;
      for (const auto& [name, v] : r.values) {
        std::snprintf(cell, sizeof cell, " %14.4f", v);
        out << cell;
      }
      out << '\n';
    }
    out << '\n';
  }
  if (reports.size() > 1) {
    std::size_t width = 8;
    for (const auto& r : reports) width = std::max(width, r.variant.size());
    const auto* first = reports.front().row(Subset::overall);
    out << std::string(width, ' ');
    if (first)
      for (const auto& [name, v] : first->values) {
        std::snprintf(cell, sizeof cell, " %14s", name.c_str());
        out << cell;
      }
    out << '\n';
    for (const auto& report : reports) {
      out << report.variant << std::string(width - report.variant.size(), ' ');
      if (const auto* row = report.row(Subset::overall))
        for (const auto& [name, v] : row->values) {
          std::snprintf(cell, sizeof cell, " %14.4f", v);
          out << cell;
        }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace wsground
