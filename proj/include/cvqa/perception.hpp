#pragma once

#include <chrono>
#include <cstddef>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvqa/jsonl.hpp"

namespace cvqa {

/// Normalized image coordinates, 0 <= x1 < x2 <= 1 and 0 <= y1 < y2 <= 1.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double area() const { return (x2 - x1) * (y2 - y1); }
    bool operator==(const Box&) const = default;
};

struct Detection {
    std::string label;
    double confidence = 0.0;
    Box box;

    bool operator==(const Detection&) const = default;
};

/// Row-major grid of non-negative weights summing to 1 (all zero when built from no detections).
struct AttentionMap {
    int rows = 0;
    int cols = 0;
    std::vector<double> weights;

    double at(int row, int col) const { return weights[static_cast<std::size_t>(row) * cols + col]; }
    double sum() const;
};

/// Throws ValidationError naming the violated invariant and `index`.
void validate_detection(const Detection& d, std::size_t index);

Detection detection_from_json(const Json& record, std::size_t line, std::size_t index);
Json to_json(const Detection& d);

/// Detection records of a fixture stream, in source order (image ids are ignored).
std::vector<Detection> load_detections(std::istream& in);

/// Detections grouped by image id. A record holding only `image_id` registers an
/// image with no detections.
class DetectionFixture {
public:
    static DetectionFixture load(std::istream& in);
    static DetectionFixture load_file(const std::string& path);

    const std::vector<Detection>* find(std::string_view image_id) const;
    std::vector<std::string> image_ids() const;

private:
    std::map<std::string, std::vector<Detection>, std::less<>> images_;
};

/// Indices ordered by confidence desc, then box area desc, then label asc, then index.
std::vector<std::size_t> rank_regions(std::span<const Detection> detections);
std::vector<std::size_t> top_region_indices(std::span<const Detection> detections, std::size_t k);
std::vector<Detection> top_regions(std::span<const Detection> detections, std::size_t k);

/// Each detection spreads its confidence over the cells its box covers, in
/// proportion to the covered area; the grid is then normalized to sum 1.
/// Cells are computed in parallel.
AttentionMap attention_from_detections(std::span<const Detection> detections, int rows, int cols);

/// Parses a detector response body (line-delimited detection records).
/// Throws ServiceError(schema) on malformed or invalid records.
std::vector<Detection> parse_detector_response(std::string_view body);

/// Asks a remote detector for the detections of `image_ref`.
/// POSTs {"image_id": ...} to `<endpoint>/detect`.
std::vector<Detection> fetch_detections(std::string_view image_ref, std::string_view endpoint,
                                        std::chrono::milliseconds timeout = std::chrono::seconds(10));

}  // namespace cvqa
