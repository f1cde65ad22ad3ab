#include "cvqa/serial_reference.hpp"

#include <algorithm>
#include <cmath>

namespace cvqa::serial {

AttentionMap attention_from_detections(std::span<const Detection> detections, int rows, int cols) {
    AttentionMap map;
    map.rows = std::max(rows, 1);
    map.cols = std::max(cols, 1);
    map.weights.assign(static_cast<std::size_t>(map.rows) * map.cols, 0.0);
    if (detections.empty()) return map;

    bool any_mass = false;
    for (const auto& d : detections) any_mass = any_mass || d.confidence > 0.0;
    const double cell_w = 1.0 / map.cols;
    const double cell_h = 1.0 / map.rows;

    for (const auto& d : detections) {
        const int c0 = std::clamp(static_cast<int>(std::floor(d.box.x1 * map.cols)) - 1, 0, map.cols - 1);
        const int c1 = std::clamp(static_cast<int>(std::ceil(d.box.x2 * map.cols)) + 1, 0, map.cols);
        const int r0 = std::clamp(static_cast<int>(std::floor(d.box.y1 * map.rows)) - 1, 0, map.rows - 1);
        const int r1 = std::clamp(static_cast<int>(std::ceil(d.box.y2 * map.rows)) + 1, 0, map.rows);
        const double mass = any_mass ? d.confidence : 1.0;
        for (int r = r0; r < r1; ++r) {
            for (int c = c0; c < c1; ++c) {
                const std::ptrdiff_t cell = static_cast<std::ptrdiff_t>(r) * map.cols + c;
                // Same spans, geometry and per-cell order as the parallel kernel, so sums agree exactly.
                const double cx1 = static_cast<double>(cell % map.cols) * cell_w;
                const double cy1 = static_cast<double>(cell / map.cols) * cell_h;
                const double ox = std::min(cx1 + cell_w, d.box.x2) - std::max(cx1, d.box.x1);
                const double oy = std::min(cy1 + cell_h, d.box.y2) - std::max(cy1, d.box.y1);
                if (ox <= 0.0 || oy <= 0.0) continue;
                map.weights[static_cast<std::size_t>(cell)] += mass * (ox * oy) / d.box.area();
            }
        }
    }

    double total = 0.0;
    for (double w : map.weights) total += w;
    if (total > 0.0) {
        for (auto& w : map.weights) w /= total;
    }
    return map;
}

evalkit::MetricReport run_ablation(const Pipeline& pipeline, std::span<const EvalItem> items,
                                   evalkit::AblationConfig config) {
    std::vector<evalkit::MetricRow> rows;
    rows.reserve(items.size());
    for (const auto& item : items) rows.push_back(score_item(pipeline, item, config));
    return evalkit::make_report(std::move(rows), config);
}

}  // namespace cvqa::serial
