// Copyright 2026 The embshape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>

#include <fmt/core.h>

#include "embshape/aggregate.h"
#include "embshape/experiment.h"

namespace embshape {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string clean_message(std::string msg) {
  std::replace_if(msg.begin(), msg.end(),
                  [](char c) { return c == ';' || c == '\n' || c == '\r'; },
                  ',');
  return msg;
}

std::string method_label(const CellSpec& cell) {
  std::string out = cell.aggregation;
  if (!cell.post.empty() && cell.post != "none") out += " + " + cell.post;
  if (!(cell.layers.size() == 1 && cell.layers[0] == kStaticLayer)) {
    out += " [L" + format_layers(cell.layers) + "]";
  }
  return out;
}

std::string model_label(const CellSpec& cell) {
  if (!cell.weight) return cell.model;
  return fmt::format("{} (w={})", cell.model, *cell.weight);
}

std::string display_value(const CellResult& r) {
  if (!r.ok()) return "error";
  const EvalReport& rep = *r.report;
  bool percent = rep.metric == MetricKind::kSpearman ||
                 rep.metric == MetricKind::kClusterAccuracy ||
                 rep.metric == MetricKind::kClassifyAccuracy;
  if (percent) {
    if (rep.stddev > 0.0) {
      return fmt::format("{:.1f} ± {:.1f}", 100.0 * rep.value,
                         100.0 * rep.stddev);
    }
    return fmt::format("{:.1f}", 100.0 * rep.value);
  }
  if (rep.stddev > 0.0) return fmt::format("{:.3f} ± {:.3f}", rep.value, rep.stddev);
  return fmt::format("{:.3f}", rep.value);
}

template <typename T>
void add_unique(std::vector<T>& list, const T& item) {
  if (std::find(list.begin(), list.end(), item) == list.end()) list.push_back(item);
}

}  // namespace

std::string format_csv(const std::vector<CellResult>& results) {
  if (results.empty()) throw InvalidArgument("report: no results to format");
  std::string out = "task,metric,value,stddev,runs,provenance\n";
  for (const CellResult& r : results) {
    if (r.ok()) {
      const EvalReport& rep = *r.report;
      out += fmt::format("{},{},{},{},{},{}\n", csv_field(rep.task),
                         metric_name(rep.metric), rep.value, rep.stddev,
                         rep.runs, csv_field(rep.provenance));
    } else {
      out += fmt::format(
          "{},{},,,0,{}\n", csv_field(r.cell.task), metric_name(r.metric),
          csv_field(r.cell.provenance() + ";error=" + clean_message(r.error)));
    }
  }
  return out;
}

std::string format_markdown(const std::vector<CellResult>& results) {
  if (results.empty()) throw InvalidArgument("report: no results to format");
  std::vector<std::string> tasks;
  for (const CellResult& r : results) add_unique(tasks, r.cell.task);
  std::string out;
  for (const std::string& task : tasks) {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    MetricKind metric = MetricKind::kSpearman;
    for (const CellResult& r : results) {
      if (r.cell.task != task) continue;
      add_unique(rows, method_label(r.cell));
      add_unique(cols, model_label(r.cell));
      metric = r.metric;
    }
    if (!out.empty()) out += '\n';
    out += fmt::format("### {} ({})\n\n| method |", task, metric_name(metric));
    for (const std::string& c : cols) out += " " + c + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) out += "---|";
    out += '\n';
    for (const std::string& row : rows) {
      out += "| " + row + " |";
      for (const std::string& col : cols) {
        std::string cell;
        for (const CellResult& r : results) {
          if (r.cell.task == task && method_label(r.cell) == row &&
              model_label(r.cell) == col) {
            cell = display_value(r);
            break;
          }
        }
        out += " " + cell + " |";
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(fields));
      fields.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (quoted) throw FormatError("csv: unterminated quoted field");
  if (any) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  if (records.empty()) throw FormatError("csv: missing header");
  const std::vector<std::string> header = {"task", "metric", "value",
                                           "stddev", "runs", "provenance"};
  if (records.front() != header) throw FormatError("csv: unexpected header");
  std::vector<CsvRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    auto& r = records[i];
    if (r.size() != 6) {
      throw FormatError(fmt::format("csv: record {} has {} fields", i + 1, r.size()));
    }
    rows.push_back(CsvRow{r[0], r[1], r[2], r[3], r[4], r[5]});
  }
  return rows;
}

}  // namespace embshape
