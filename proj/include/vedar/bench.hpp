#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vedar/core.hpp"
#include "vedar/ingest.hpp"

namespace vedar {

struct Confusion {
    int tp{0};
    int fp{0};
    int fn{0};
};

struct Metrics {
    double precision{1.0};
    double recall{1.0};
    double f1{1.0};
};

// Eq-style metrics with empty-denominator conventions: an algorithm that
// predicts nothing scores recall 0, not a division error.
inline Metrics metrics(const Confusion& c) {
    Metrics m;
    m.precision = (c.tp + c.fp) == 0 ? 1.0 : static_cast<double>(c.tp) / (c.tp + c.fp);
    m.recall = (c.tp + c.fn) == 0 ? 1.0 : static_cast<double>(c.tp) / (c.tp + c.fn);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

// Window-hit scoring: each labeled window is one positive; any alert inside
// detects it (extra alerts in the same window are neither TP nor FP), and
// every alert outside all windows is one FP.
inline Confusion score_against_windows(
    const std::vector<ChangeAlert>& alerts,
    const std::vector<std::pair<Timestamp, Timestamp>>& windows) {
    Confusion c;
    std::vector<bool> hit(windows.size(), false);
    for (const auto& a : alerts) {
        bool inside = false;
        for (std::size_t w = 0; w < windows.size(); ++w) {
            if (a.timestamp >= windows[w].first && a.timestamp <= windows[w].second) {
                hit[w] = true;
                inside = true;
                break;
            }
        }
        if (!inside) ++c.fp;
    }
    for (bool h : hit)
        if (h)
            ++c.tp;
        else
            ++c.fn;
    return c;
}

// Re-derive detections from a published NAB results file (rows of
// timestamp,value,anomaly_score,label): a detection is any row whose
// anomaly_score >= 1 - epsilon.
inline std::vector<Timestamp> threshold_baseline_scores(const std::string& results_csv_path,
                                                        double epsilon = 0.01) {
    std::ifstream in(results_csv_path);
    if (!in) throw StreamError("cannot open " + results_csv_path);
    std::vector<Timestamp> out;
    std::string line;
    std::size_t line_no = 0;
    int score_col = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (line_no == 1) {
            for (std::size_t i = 0; i < cols.size(); ++i)
                if (cols[i] == "anomaly_score") score_col = static_cast<int>(i);
            if (score_col < 0) throw MalformedRow("no anomaly_score column", 1);
            continue;
        }
        if (cols.size() <= static_cast<std::size_t>(score_col))
            throw MalformedRow("short row", line_no);
        auto ts = parse_timestamp(cols[0]);
        if (!ts) throw MalformedRow("unparseable timestamp", line_no);
        double score = std::stod(cols[static_cast<std::size_t>(score_col)]);
        if (score >= 1.0 - epsilon) out.push_back(*ts);
    }
    return out;
}

struct BenchReport {
    std::string dataset;
    std::string algorithm;
    Confusion confusion;
    Metrics scores;
};

inline BenchReport make_report(std::string dataset, std::string algorithm, Confusion c) {
    return {std::move(dataset), std::move(algorithm), c, metrics(c)};
}

enum class ReportFormat { Text, Jsonl };

inline std::string emit_report(const std::vector<BenchReport>& reports, ReportFormat fmt) {
    std::ostringstream out;
    if (fmt == ReportFormat::Jsonl) {
        char buf[512];
        for (const auto& r : reports) {
            std::snprintf(buf, sizeof buf,
                          "{\"dataset\":\"%s\",\"algorithm\":\"%s\",\"tp\":%d,\"fp\":%d,"
                          "\"fn\":%d,\"precision\":%.17g,\"recall\":%.17g,\"f1\":%.17g}",
                          r.dataset.c_str(), r.algorithm.c_str(), r.confusion.tp, r.confusion.fp,
                          r.confusion.fn, r.scores.precision, r.scores.recall, r.scores.f1);
            out << buf << '\n';
        }
        return out.str();
    }
    std::size_t name_w = 7;
    for (const auto& r : reports) name_w = std::max(name_w, r.dataset.size());
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-*s  %-12s %3s %3s %3s  %6s %6s %6s\n",
                  static_cast<int>(name_w), "dataset", "algorithm", "TP", "FP", "FN", "prec",
                  "recall", "F1");
    out << buf;
    out << std::string(name_w + 49, '-') << '\n';
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-*s  %-12s %3d %3d %3d  %6.2f %6.2f %6.2f\n",
                      static_cast<int>(name_w), r.dataset.c_str(), r.algorithm.c_str(),
                      r.confusion.tp, r.confusion.fp, r.confusion.fn, r.scores.precision,
                      r.scores.recall, r.scores.f1);
        out << buf;
    }
    return out.str();
}

}  // namespace vedar
