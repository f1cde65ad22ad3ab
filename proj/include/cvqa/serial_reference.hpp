#pragma once

// Single-threaded versions of the parallel kernels, kept for equivalence tests
// and benchmarks.

#include <span>

#include "cvqa/evalkit.hpp"
#include "cvqa/perception.hpp"
#include "cvqa/pipeline.hpp"

namespace cvqa::serial {

/// Scatters each detection over the cells it covers. Same result as
/// cvqa::attention_from_detections, bit for bit.
AttentionMap attention_from_detections(std::span<const Detection> detections, int rows, int cols);

evalkit::MetricReport run_ablation(const Pipeline& pipeline, std::span<const EvalItem> items,
                                   evalkit::AblationConfig config);

}  // namespace cvqa::serial
