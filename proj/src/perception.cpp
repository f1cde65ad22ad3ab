#include "cvqa/perception.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cvqa/error.hpp"
#include "http.hpp"

namespace cvqa {

double AttentionMap::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

void validate_detection(const Detection& d, std::size_t index) {
    const auto at = " at index " + std::to_string(index);
    const auto& b = d.box;
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(b.x1) || !in_unit(b.y1) || !in_unit(b.x2) || !in_unit(b.y2))
        throw ValidationError("box coordinates outside [0,1]" + at);
    if (!(b.x1 < b.x2)) throw ValidationError("x1 < x2 violated" + at);
    if (!(b.y1 < b.y2)) throw ValidationError("y1 < y2 violated" + at);
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) throw ValidationError("confidence outside [0,1]" + at);
}

Detection detection_from_json(const Json& record, std::size_t line, std::size_t index) {
    Detection d;
    d.label = require_string(record, "label", line);
    d.confidence = require_number(record, "confidence", line);
    auto it = record.find("box");
    if (it == record.end() || !it->is_array() || it->size() != 4)
        throw FormatError("field \"box\" must be a list of 4 numbers", line);
    for (const auto& v : *it) {
        if (!v.is_number()) throw FormatError("field \"box\" must be a list of 4 numbers", line);
    }
    d.box = {(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>(), (*it)[3].get<double>()};
    validate_detection(d, index);
    return d;
}

Json to_json(const Detection& d) {
    return Json{{"label", d.label},
                {"confidence", d.confidence},
                {"box", Json::array({d.box.x1, d.box.y1, d.box.x2, d.box.y2})}};
}

std::vector<Detection> load_detections(std::istream& in) {
    std::vector<Detection> out;
    for (const auto& rec : read_json_lines(in)) {
        if (!rec.value.contains("label")) continue;  // image marker
        out.push_back(detection_from_json(rec.value, rec.line, out.size()));
    }
    return out;
}

DetectionFixture DetectionFixture::load(std::istream& in) {
    DetectionFixture fixture;
    std::size_t index = 0;
    for (const auto& rec : read_json_lines(in)) {
        const auto image_id = require_string(rec.value, "image_id", rec.line);
        auto& list = fixture.images_[image_id];
        if (!rec.value.contains("label")) continue;
        list.push_back(detection_from_json(rec.value, rec.line, index++));
    }
    return fixture;
}

DetectionFixture DetectionFixture::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("detection fixture file", path);
    return load(in);
}

const std::vector<Detection>* DetectionFixture::find(std::string_view image_id) const {
    auto it = images_.find(image_id);
    return it == images_.end() ? nullptr : &it->second;
}

std::vector<std::string> DetectionFixture::image_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, _] : images_) ids.push_back(id);
    return ids;
}

std::vector<std::size_t> rank_regions(std::span<const Detection> detections) {
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& da = detections[a];
        const auto& db = detections[b];
        if (da.confidence != db.confidence) return da.confidence > db.confidence;
        if (da.box.area() != db.box.area()) return da.box.area() > db.box.area();
        return da.label < db.label;
    });
    return order;
}

std::vector<std::size_t> top_region_indices(std::span<const Detection> detections, std::size_t k) {
    auto order = rank_regions(detections);
    if (order.size() > k) order.resize(k);
    return order;
}

std::vector<Detection> top_regions(std::span<const Detection> detections, std::size_t k) {
    std::vector<Detection> out;
    for (auto i : top_region_indices(detections, k)) out.push_back(detections[i]);
    return out;
}

AttentionMap attention_from_detections(std::span<const Detection> detections, int rows, int cols) {
    AttentionMap map;
    map.rows = std::max(rows, 1);
    map.cols = std::max(cols, 1);
    map.weights.assign(static_cast<std::size_t>(map.rows) * map.cols, 0.0);
    if (detections.empty()) return map;

    // All-zero confidences would leave nothing to normalize; fall back to equal mass.
    const bool any_mass =
        std::any_of(detections.begin(), detections.end(), [](const Detection& d) { return d.confidence > 0.0; });
    const double cell_w = 1.0 / map.cols;
    const double cell_h = 1.0 / map.rows;
    const int nrows = map.rows;
    const int ncols = map.cols;

    // Cell span of each box, padded by one cell against rounding at the edges.
    struct Span {
        int r0, r1, c0, c1;
    };
    std::vector<Span> spans;
    spans.reserve(detections.size());
    for (const auto& d : detections) {
        spans.push_back({std::clamp(static_cast<int>(std::floor(d.box.y1 * nrows)) - 1, 0, nrows - 1),
                         std::clamp(static_cast<int>(std::ceil(d.box.y2 * nrows)) + 1, 0, nrows),
                         std::clamp(static_cast<int>(std::floor(d.box.x1 * ncols)) - 1, 0, ncols - 1),
                         std::clamp(static_cast<int>(std::ceil(d.box.x2 * ncols)) + 1, 0, ncols)});
    }
    double* out = map.weights.data();

    // Rows are independent; within a cell, detections add in input order.
#pragma omp parallel for schedule(static)
    for (int r = 0; r < nrows; ++r) {
        for (std::size_t i = 0; i < detections.size(); ++i) {
            const auto& d = detections[i];
            const auto& sp = spans[i];
            if (r < sp.r0 || r >= sp.r1) continue;
            const double mass = any_mass ? d.confidence : 1.0;
            for (int c = sp.c0; c < sp.c1; ++c) {
                const std::ptrdiff_t cell = static_cast<std::ptrdiff_t>(r) * ncols + c;
                const double cx1 = static_cast<double>(cell % ncols) * cell_w;
                const double cy1 = static_cast<double>(cell / ncols) * cell_h;
                const double ox = std::min(cx1 + cell_w, d.box.x2) - std::max(cx1, d.box.x1);
                const double oy = std::min(cy1 + cell_h, d.box.y2) - std::max(cy1, d.box.y1);
                if (ox <= 0.0 || oy <= 0.0) continue;
                out[cell] += mass * (ox * oy) / d.box.area();
            }
        }
    }

    const double total = map.sum();
    if (total > 0.0) {
        for (auto& w : map.weights) w /= total;
    }
    return map;
}

std::vector<Detection> parse_detector_response(std::string_view body) {
    try {
        std::istringstream in{std::string(body)};
        return load_detections(in);
    } catch (const Error& e) {
        throw ServiceError(ServiceError::Kind::schema, std::string("detector response rejected: ") + e.what());
    }
}

std::vector<Detection> fetch_detections(std::string_view image_ref, std::string_view endpoint,
                                        std::chrono::milliseconds timeout) {
    const Json request{{"image_id", std::string(image_ref)}};
    try {
        auto response = detail::http_post(endpoint, "/detect", request.dump(), "application/json", {}, timeout);
        if (response.status < 200 || response.status >= 300) {
            throw ServiceError(ServiceError::Kind::status,
                               "detector returned status " + std::to_string(response.status), response.status);
        }
        return parse_detector_response(response.body);
    } catch (const ServiceError& e) {
        throw ServiceError(e.kind(), e.what(), e.status(), ServiceError::Service::detector);
    }
}

}  // namespace cvqa
