#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mimgan {

struct RocPoint {
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;  // starts at (0,0), ends at (1,1)
    double auc = 0.0;              // trapezoidal area of the points
};

// ROC swept over all distinct score thresholds, descending. Tied scores move
// one simultaneous diagonal step, so the trapezoid rule awards them the
// Mann-Whitney half credit. Result depends only on the score/label multiset.
inline RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("metrics: " + std::to_string(scores.size()) + " scores vs " +
                                    std::to_string(labels.size()) + " labels");
    std::size_t pos = 0, neg = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw std::invalid_argument("metrics: labels must be 0 or 1");
        (l == 1 ? pos : neg)++;
    }
    if (pos == 0 || neg == 0)
        throw std::invalid_argument("metrics: ROC needs both classes present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return labels[a] > labels[b];  // tie-break only stabilizes the sort; groups merge below
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp)++;
            ++i;
        }
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                                static_cast<double>(tp) / static_cast<double>(pos)});
    }

    double area = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const RocPoint& a = curve.points[k - 1];
        const RocPoint& b = curve.points[k];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    curve.auc = area;
    return curve;
}

// 2*precision*recall / (precision + recall); zero when nothing is predicted
// positive. Requires at least one positive ground-truth label.
inline double f1_score(const std::vector<int>& decisions, const std::vector<int>& labels) {
    if (decisions.size() != labels.size())
        throw std::invalid_argument("metrics: " + std::to_string(decisions.size()) +
                                    " decisions vs " + std::to_string(labels.size()) + " labels");
    std::size_t tp = 0, fp = 0, fn = 0, pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) ++pos;
        if (decisions[i] == 1 && labels[i] == 1) ++tp;
        if (decisions[i] == 1 && labels[i] == 0) ++fp;
        if (decisions[i] == 0 && labels[i] == 1) ++fn;
    }
    if (pos == 0) throw std::invalid_argument("metrics: F1 needs at least one positive label");
    if (tp + fp == 0) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace mimgan
